"""Derivatives of critical relations and rank certification.

Rows of the Jacobian are coefficient-space gradients of

    R(g) = g^m(c_i(g)) - g^n(c_j(g)),

computed in closed form by telescoping along the orbit, then restricted to a
tangent basis (the Rat^mu tangent space, the polynomial chart, or a one
parameter family).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import config
from .algebra import INF, Moebius, Poly, is_inf, near_inf, poly_roots
from .errors import (
    ChartSolveFailure,
    NewtonDivergence,
    NonRepelling,
    OrbitHitsInfinity,
    PreconditionError,
    UncertifiableRank,
)
from .linalg import rank_by_gap
from .qdiff import QuadDiff, pushforward_eval, q_relation, qd_eval, sample_points
from .ratmap import (
    Chart,
    CriticalSet,
    RatMap,
    conjugate_to_finite,
    continue_critical_point,
    critical_set,
    iterate_derivative,
    mobius_directions,
    orbit,
    tangent_basis_polmu,
    tangent_basis_ratmu,
)
from .relations import CriticalRelation, as_relation


# ---------------------------------------------------------------- gradients

def _orbit_gradient(f: RatMap, z, m):
    """Coefficient gradient of g^m(z) at fixed z: sum_r Df^{m-r}(f^r z) * grad g(f^{r-1} z)."""
    n = 2 * f.degree + 2
    grad = np.zeros(n, dtype=config.COMPLEX)
    if m == 0:
        return grad
    pts = orbit(f, z, m)
    if any(is_inf(p) for p in pts):
        raise OrbitHitsInfinity(f"orbit of {z} meets infinity within {m} steps")
    acc = 1.0 + 0j
    for r in range(m, 0, -1):
        grad += acc * f.sensitivity(pts[r - 1], 0)[0]
        acc *= f.deriv(pts[r - 1])
    return grad


def critical_point_gradient(f: RatMap, c, mu) -> np.ndarray:
    """Gradient of the continued critical point: -d f^(mu)(c) / f^(mu+1)(c)."""
    if is_inf(c):
        raise OrbitHitsInfinity("critical point at infinity")
    S = f.sensitivity(c, mu)
    t = f.taylor(c, mu + 1)
    if t[mu + 1] == 0:
        raise PreconditionError(f"{c} has multiplicity above {mu}")
    return -S[mu] / ((mu + 1) * t[mu + 1])


def _ray_gradient(f, crit, i, m):
    c, mu = crit.points[i - 1], crit.multiplicities[i - 1]
    if m == 0:
        return critical_point_gradient(f, c, mu)
    # the c_i dot term is killed by Df^m(c_i) = 0
    return _orbit_gradient(f, c, m)


def relation_gradient(f: RatMap, rel, crit: CriticalSet | None = None) -> np.ndarray:
    """d R / d(coefficients), a vector of length 2d+2 ordered like ``f.vector``."""
    rel = as_relation(rel)
    crit = critical_set(f) if crit is None else crit
    return _ray_gradient(f, crit, rel.i, rel.m) - _ray_gradient(f, crit, rel.j, rel.n)


def relation_component_derivative(f: RatMap, rel, direction, crit: CriticalSet | None = None) -> complex:
    return complex(relation_gradient(f, rel, crit) @ np.asarray(direction, dtype=config.COMPLEX))


def relation_value(g: RatMap, rel, crit_ref: CriticalSet, sigma: Moebius | None = None) -> complex:
    """R(g) with critical points continued from ``crit_ref`` (optionally composed with sigma)."""
    rel = as_relation(rel)

    def point(i, m):
        c = crit_ref.points[i - 1]
        if not is_inf(c):
            c = continue_critical_point(g, c, crit_ref.multiplicities[i - 1])
        z = orbit(g, c, max(m, 1))[m]
        return sigma(z) if sigma is not None else z

    a, b = point(rel.i, rel.m), point(rel.j, rel.n)
    if is_inf(a) or is_inf(b):
        raise OrbitHitsInfinity(f"relation {rel} evaluates at infinity")
    return a - b


def fd_relation_derivative(f: RatMap, rel, direction, crit: CriticalSet | None = None,
                           rel_step=1e-5, sigma: Moebius | None = None) -> complex:
    """Richardson-extrapolated central difference of R along ``direction``."""
    crit = critical_set(f) if crit is None else crit
    v = np.asarray(direction, dtype=config.COMPLEX)
    base = f.vector
    h = rel_step * max(1.0, float(np.max(np.abs(base)))) / max(1.0, float(np.max(np.abs(v))))

    def R(t):
        return relation_value(RatMap.from_vector(base + t * v, f.degree), rel, crit, sigma)

    d1 = (R(h) - R(-h)) / (2 * h)
    d2 = (R(h / 2) - R(-h / 2)) / h
    return complex((4 * d2 - d1) / 3)


# ---------------------------------------------------------------- tangent data

@dataclass(frozen=True)
class Tangent:
    """A map, its labelled critical set and the directions being differentiated over."""

    map: RatMap
    crit: CriticalSet
    directions: np.ndarray = field(repr=False)
    chart: str
    conjugation: Moebius | None = None


def _needed_points(f, crit, F):
    pts = []
    for rel in F:
        for i, m in ((rel.i, rel.m), (rel.j, rel.n)):
            c = crit.points[i - 1]
            pts.append(c)
            if not is_inf(c):
                pts.extend(orbit(f, c, max(m, 1))[: m + 1])
    for c in crit.points:
        pts.append(c)
        if not is_inf(c):
            pts.append(f(c))
    return pts


def tangent(f: RatMap, F=(), chart="auto", crit: CriticalSet | None = None) -> Tangent:
    """Resolve a chart request into concrete directions, conjugating if needed.

    ``chart`` is "auto", "rat", "poly" or a :class:`Chart` (one parameter
    families and other explicit direction sets).
    """
    F = [as_relation(r) for r in F]
    if isinstance(chart, str) and chart == "auto":
        chart = "poly" if f.is_polynomial else "rat"
    if crit is None:
        crit = critical_set(f)
        if chart != "rat" and f.is_polynomial:
            crit = crit.finite()
    if any(max(r.i, r.j) > crit.nu for r in F):
        raise PreconditionError(f"relation index exceeds nu = {crit.nu}")
    infinite = any(near_inf(p) for p in _needed_points(f, crit, F))
    if chart == "rat":
        sigma = None
        g, cg = f, crit
        if infinite:
            g, cg, sigma = conjugate_to_finite(f, crit, _needed_points(f, crit, F))
        tb = tangent_basis_ratmu(g, cg)
        return Tangent(g, cg, tb.directions, tb.chart, sigma)
    if infinite:
        raise PreconditionError("orbit data meets infinity; only the rat chart conjugates automatically")
    if chart == "poly":
        tb = tangent_basis_polmu(f, crit)
        return Tangent(f, crit, tb.directions, tb.chart, None)
    if isinstance(chart, Chart):
        return Tangent(f, crit, chart.directions, chart.name, None)
    raise PreconditionError(f"unknown chart {chart!r}")


# ---------------------------------------------------------------- reports

@dataclass(frozen=True)
class JacobianReport:
    matrix: np.ndarray = field(repr=False)
    singular_values: np.ndarray
    certified_rank: int
    gap: float
    tolerance: float
    chart: str
    certified: bool = True
    relations: tuple = ()
    gradients: np.ndarray | None = field(default=None, repr=False)
    tangent: Tangent | None = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def to_json(self):
        return {
            "matrix": [[[complex(x).real, complex(x).imag] for x in row] for row in self.matrix],
            "singular_values": [float(s) for s in self.singular_values],
            "rank": int(self.certified_rank),
            "gap": _json_float(self.gap),
            "tolerance": self.tolerance,
            "chart": self.chart,
            "certified": bool(self.certified),
            "relations": [list(r) for r in self.relations],
        }


def _json_float(x):
    return "inf" if math.isinf(x) else float(x)


def _report(J, grads, rels, tg, gap_threshold, rtol, strict):
    rr = rank_by_gap(J, gap_threshold=gap_threshold, rtol=rtol)
    rep = JacobianReport(J, rr.singular_values, rr.rank, rr.gap, rtol, tg.chart, rr.certified,
                         tuple(rels), grads, tg)
    if strict and not rr.certified:
        raise UncertifiableRank(
            f"no decisive singular value gap (gap {rr.gap:.3g} < {gap_threshold:g})", report=rep
        )
    return rep


def jacobian(f: RatMap, F, chart="auto", crit: CriticalSet | None = None,
             gap_threshold=config.RANK_GAP, rtol=config.RANK_RTOL, strict=True) -> JacobianReport:
    """N x dim matrix of relation derivatives along the chart directions."""
    rels = [as_relation(r) for r in F]
    tg = tangent(f, rels, chart, crit)
    grads = np.array([relation_gradient(tg.map, r, tg.crit) for r in rels], dtype=config.COMPLEX)
    grads = grads.reshape(len(rels), 2 * tg.map.degree + 2)
    J = grads @ tg.directions.T
    return _report(J, grads, rels, tg, gap_threshold, rtol, strict)


@dataclass(frozen=True)
class Certificate:
    certified: bool
    rank: int
    N: int
    tangent_dim: int
    kernel_dim: int
    mobius_residual: float
    report: JacobianReport = field(repr=False)
    kernel: np.ndarray | None = field(default=None, repr=False)

    def to_json(self):
        out = {
            "certified": self.certified,
            "rank": self.rank,
            "N": self.N,
            "tangent_dim": self.tangent_dim,
            "kernel_dim": self.kernel_dim,
            "mobius_residual": self.mobius_residual,
            "jacobian": self.report.to_json(),
        }
        if self.kernel is not None:
            out["kernel_vector"] = [[complex(a).real, complex(a).imag] for a in self.kernel]
        return out


def mobius_residual(report: JacobianReport) -> float:
    """max over the three conjugation flows of |grad . v| / (|grad| |v|)."""
    G = report.gradients
    if G is None or G.size == 0:
        return 0.0
    M = mobius_directions(report.tangent.map)
    scale = np.linalg.norm(G, 2)
    return float(max(np.linalg.norm(G @ v) / (scale * np.linalg.norm(v)) for v in M)) if scale else 0.0


def certify(f: RatMap, F, chart="auto", crit: CriticalSet | None = None, **kw) -> Certificate:
    """Rank N check, kernel dimension dim - N and conjugation directions in the kernel."""
    rep = jacobian(f, F, chart, crit, **kw)
    N = rep.N
    ok = rep.certified_rank == N
    kernel = None if ok else kernel_vector(rep)
    return Certificate(ok, rep.certified_rank, N, rep.dim, rep.dim - rep.certified_rank,
                       mobius_residual(rep), rep, kernel)


def polynomial_chart_certify(f: RatMap, F, **kw) -> JacobianReport:
    """Rank of the relation map over Pol^mu; the affine conjugation flows must be annihilated."""
    if not f.is_polynomial:
        raise PreconditionError("polynomial chart needs a polynomial map")
    rep = jacobian(f, F, "poly", **kw)
    G = rep.gradients
    M = mobius_directions(f)[:2]
    scale = max(float(np.linalg.norm(G, 2)), 1e-300)
    worst = max(float(np.linalg.norm(G @ v) / (scale * np.linalg.norm(v))) for v in M)
    if worst > 1e-6:
        raise PreconditionError(f"affine conjugation directions leave the kernel (residual {worst:.2e})")
    return rep


# ---------------------------------------------------------------- invariance checks

def _sigma_rows(rep: JacobianReport, sigma: Moebius):
    tg = rep.tangent
    scales = []
    for r in rep.relations:
        c = tg.crit.points[r.i - 1]
        v = orbit(tg.map, c, max(r.m, 1))[r.m] if not is_inf(c) else INF
        w = sigma(v)
        if is_inf(v) or is_inf(w):
            raise PreconditionError(f"sigma sends the value of {r} to infinity")
        scales.append(sigma.derivative(v))
    return np.array(scales)[:, None] * rep.matrix


@dataclass(frozen=True)
class RankComparison:
    ranks: tuple
    agree: bool


def rank_sigma_independence(f: RatMap, F, sigmas, chart="auto", method="closed", **kw) -> RankComparison:
    """Certified ranks of sigma(R_F) for each sigma.

    ``method="closed"`` rescales rows by sigma'(value); ``method="fd"``
    differentiates sigma(g^m(c_i(g))) - sigma(g^n(c_j(g))) numerically.
    """
    base = jacobian(f, F, chart, strict=False, **kw)
    ranks = []
    for s in sigmas:
        if method == "closed":
            J = _sigma_rows(base, s)
        elif method == "fd":
            _sigma_rows(base, s)  # precondition check
            tg = base.tangent
            J = np.array([[fd_relation_derivative(tg.map, r, v, tg.crit, sigma=s) for v in tg.directions]
                          for r in base.relations])
        else:
            raise ValueError(f"unknown method {method!r}")
        rr = rank_by_gap(J, gap_threshold=kw.get("gap_threshold", config.RANK_GAP))
        if not rr.certified:
            raise UncertifiableRank(f"rank not certifiable for sigma = {s}")
        ranks.append(rr.rank)
    return RankComparison(tuple(ranks), len(set(ranks)) <= 1)


def rank_full_collection_independence(f: RatMap, F1, F2, chart="auto", **kw) -> RankComparison:
    r1 = jacobian(f, F1, chart, **kw).certified_rank
    r2 = jacobian(f, F2, chart, **kw).certified_rank
    return RankComparison((r1, r2), r1 == r2)


def periodic_point_gradient(f: RatMap, p, s) -> np.ndarray:
    """Gradient of the continued periodic point: L_s(p) / (1 - Df^s(p))."""
    mult = iterate_derivative(f, p, s)
    if abs(mult) <= 1.0:
        raise NonRepelling(f"periodic point {p} has multiplier of modulus {abs(mult):.6g} <= 1")
    return _orbit_gradient(f, p, s) / (1.0 - mult)


def repelling_variant(f: RatMap, assignments, chart="auto", crit: CriticalSet | None = None,
                      tol=1e-9, **kw) -> JacobianReport:
    """Rows d/dg [g^{m_i}(c_i(g)) - p_i(g)] for critical points landing on repelling cycles.

    ``assignments`` holds tuples (i, m_i, p_i, period_i).
    """
    tg = tangent(f, (), chart, crit)
    if tg.conjugation is not None:
        raise PreconditionError("repelling variant expects critical data away from infinity")
    g, cr = tg.map, tg.crit
    rows, rels = [], []
    for i, m, p, s in assignments:
        p = complex(p)
        c = cr.points[i - 1]
        pts = orbit(g, c, max(m, 1))
        if abs(pts[m] - p) > tol * max(1.0, abs(p)):
            raise PreconditionError(f"f^{m}(c{i}) = {pts[m]} is not the periodic point {p}")
        back = orbit(g, p, s)[s]
        if abs(back - p) > tol * max(1.0, abs(p)):
            raise PreconditionError(f"{p} is not periodic of period {s}")
        for k in range(1, m + 1):
            if any(abs(pts[k] - cc) <= tol * max(1.0, abs(cc)) for cc in cr.points if not is_inf(cc)):
                raise PreconditionError(f"f^{k}(c{i}) is critical")
        rows.append(_ray_gradient(g, cr, i, m) - periodic_point_gradient(g, p, s))
        rels.append(CriticalRelation(i, i, m, 0) if m > 0 else CriticalRelation(i, i, 1, 0))
    G = np.array(rows, dtype=config.COMPLEX)
    J = G @ tg.directions.T
    return _report(J, G, [], tg, kw.get("gap_threshold", config.RANK_GAP), kw.get("rtol", config.RANK_RTOL),
                   kw.get("strict", True))


# ---------------------------------------------------------------- duality

def kernel_vector(rep: JacobianReport) -> np.ndarray:
    """Coefficients a with sum_k a_k * row_k = 0, from the smallest left singular vector."""
    u, _, _ = np.linalg.svd(rep.matrix)
    return u[:, -1].conj()


def kernel_residual(rep: JacobianReport, a) -> float:
    a = np.asarray(a)
    return float(np.linalg.norm(a @ rep.matrix) / (np.linalg.norm(a) * max(np.linalg.norm(rep.matrix, 2), 1e-300)))


def kernel_qdiff(rep: JacobianReport, a) -> QuadDiff:
    """q = sum a_k Q_k over the rows with (m_k, n_k) != (1, 1), on the map the report lives on."""
    tg = rep.tangent
    q = QuadDiff.zero()
    for ak, r in zip(a, rep.relations):
        if (r.m, r.n) == (1, 1) or ak == 0:
            continue
        q = q + ak * q_relation(tg.map, r, tg.crit)
    return q


# ---------------------------------------------------------------- deficit identity

@dataclass(frozen=True)
class Normalized:
    """g = phi f phi^-1 with g(z) = s z + b + O(1/z); phi(z) = 1/(z - p)."""

    map: RatMap
    crit: CriticalSet
    phi: Moebius
    fixed_point: complex


def normalize_at_infinity(f: RatMap, crit: CriticalSet | None = None, avoid=(), p=None) -> Normalized:
    """Move a non-critical finite fixed point to infinity.

    Without an explicit ``p`` the fixed point farthest from ``avoid`` and
    from the first few critical orbit points is chosen.
    """
    crit = critical_set(f) if crit is None else crit
    d = f.degree
    if p is None:
        fix = f.num - f.den * Poly([0, 1])
        cands = [rc.center for rc in poly_roots(fix) if rc.multiplicity == 1]
        marks = [z for c in crit.points if not is_inf(c) for z in orbit(f, c, 8) if not is_inf(z)]
        marks += [complex(z) for z in avoid]
        good = [z for z in cands if abs(f.deriv(z)) > 1e-3]
        if not good:
            raise PreconditionError("no usable finite fixed point")
        p = max(good, key=lambda z: min([abs(z - w) for w in marks] or [1.0]))
    p = complex(p)
    if abs(f(p) - p) > 1e-9 * max(1.0, abs(p)):
        raise PreconditionError(f"{p} is not a fixed point")
    phi = Moebius(0, 1, 1, -p)
    g = f.conjugate(phi)
    num = g.num.padded(d + 1)
    den = g.den.padded(d + 1)
    den[d] = 0
    lead = den[d - 1]
    g = RatMap(Poly(num / lead), Poly(den[:d] / lead))
    return Normalized(g, crit.transport(phi), phi, p)


def _nchart_unpack(x, d, bpin):
    a = x[: d + 1]
    b = np.concatenate([x[d + 1 :], [bpin]])
    return RatMap(Poly(a), Poly(b))


def _nchart_coords(g: RatMap, crit_pts):
    """(critical values, s, b) and their Jacobian in (a_0..a_d, b_0..b_{d-2})."""
    d = g.degree
    a = g.num.padded(d + 1)
    bb = g.den.padded(d)
    b1, b2 = bb[d - 1], bb[d - 2]
    vals, rows = [], []
    for c in crit_pts:
        vals.append(g(c))
        S = g.sensitivity(c, 0)[0]
        rows.append(np.concatenate([S[: d + 1], S[d + 1 : 2 * d]]))
    s = a[d] / b1
    bt = (a[d - 1] * b1 - a[d] * b2) / b1**2
    rs = np.zeros(2 * d, dtype=config.COMPLEX)
    rs[d] = 1 / b1
    rb = np.zeros(2 * d, dtype=config.COMPLEX)
    rb[d - 1] = 1 / b1
    rb[d] = -b2 / b1**2
    rb[d + 1 + d - 2] = -a[d] / b1**2
    vals += [s, bt]
    rows += [rs, rb]
    return np.array(vals), np.array(rows)


def _solve_nchart(g0: RatMap, crit0: CriticalSet, target, maxiter=40):
    d = g0.degree
    bpin = g0.den.padded(d)[d - 1]
    x = np.concatenate([g0.num.padded(d + 1), g0.den.padded(d)[: d - 1]])
    pts = list(crit0.points)
    for _ in range(maxiter):
        g = _nchart_unpack(x, d, bpin)
        try:
            pts = [continue_critical_point(g, c, 1) for c in pts]
        except NewtonDivergence as exc:
            raise ChartSolveFailure(str(exc)) from exc
        vals, J = _nchart_coords(g, pts)
        res = vals - target
        if np.max(np.abs(res)) <= 1e-14 * max(1.0, float(np.max(np.abs(target)))):
            return g, pts
        try:
            dx = np.linalg.solve(J, res)
        except np.linalg.LinAlgError as exc:
            raise ChartSolveFailure("singular critical value chart") from exc
        x = x - dx
    if np.max(np.abs(res)) <= 1e-10 * max(1.0, float(np.max(np.abs(target)))):
        return g, pts
    raise ChartSolveFailure(f"Newton in the critical value chart stalled at residual {np.max(np.abs(res)):.2e}")


def _relation_on(g: RatMap, rel, pts):
    def point(i, m):
        return orbit(g, pts[i - 1], max(m, 1))[m]

    return point(rel.i, rel.m) - point(rel.j, rel.n)


def critical_value_partials(nm: Normalized, rel, h=1e-5):
    """dR/dv_k with s, b and the other critical values held fixed."""
    rel = as_relation(rel)
    g, crit = nm.map, nm.crit
    if any(mu != 1 for mu in crit.multiplicities) or any(is_inf(c) for c in crit.points):
        raise PreconditionError("identity check implemented for finite simple critical points")
    pts = list(crit.points)
    base, _ = _nchart_coords(g, pts)
    out = []

    def central(k, step):
        vals = []
        for sgn in (1, -1):
            t = base.copy()
            t[k] += sgn * step
            gk, pk = _solve_nchart(g, crit, t)
            vals.append(_relation_on(gk, rel, pk))
        return (vals[0] - vals[1]) / (2 * step)

    for k in range(len(pts)):
        step = h * max(1.0, abs(base[k]))
        out.append((4 * central(k, step / 2) - central(k, step)) / 3)
    return np.array(out), base[: len(pts)]


@dataclass(frozen=True)
class DeficitCheck:
    mismatch: float
    lhs: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)
    samples: np.ndarray = field(repr=False)
    normalized: Normalized = field(repr=False)


def deficit_identity_check(f: RatMap, rel, samples=None, crit: CriticalSet | None = None,
                           n_samples=10, seed=0, h=1e-5) -> DeficitCheck:
    """Compare Q - f_*Q with sum_k dR/dv_k / (x - v_k) in the normalized chart.

    With the convention Q(z) = sum residue / (z - pole) the critical value
    poles enter as 1/(x - v_k).
    """
    rel = as_relation(rel)
    crit = critical_set(f) if crit is None else crit
    nm = normalize_at_infinity(f, crit)
    g, cg = nm.map, nm.crit
    if rel.i == rel.j and rel.m == rel.n:
        xs = np.asarray(samples if samples is not None else sample_points([0j], n_samples, seed))
        z = np.zeros(len(xs), dtype=config.COMPLEX)
        return DeficitCheck(0.0, z, z, xs, nm)
    q = q_relation(g, rel, cg)
    partials, vks = critical_value_partials(nm, rel, h)
    if samples is None:
        marks = list(q.poles) + list(vks)
        samples = sample_points(marks, n_samples, seed)
    xs = np.asarray(samples, dtype=config.COMPLEX)
    lhs = np.array([qd_eval(q, x) - pushforward_eval(g, q, x) for x in xs])
    rhs = np.array([np.sum(partials / (x - vks)) for x in xs])
    return DeficitCheck(float(np.max(np.abs(lhs - rhs))), lhs, rhs, xs, nm)
