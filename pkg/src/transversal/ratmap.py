"""Rational maps as dynamical systems.

A map is stored as a coefficient pair ``(num, den)``.  Perturbation directions
live in the full coefficient space C^(2d+2): the first d+1 entries perturb the
numerator, the last d+1 the denominator.  Adding a multiple of the map's own
coefficient vector does not change the map, which is why charts pin one
coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import config
from .algebra import (
    INF,
    Moebius,
    Poly,
    is_inf,
    near_inf,
    moebius_conjugate,
    poly_roots,
    ratfn_reduce,
    rational_taylor,
)
from .errors import (
    DimensionMismatch,
    MultiplicityMismatch,
    NewtonDivergence,
    OrbitHitsInfinity,
    PreconditionError,
)
from .linalg import numerical_rank


@dataclass(frozen=True)
class RatMap:
    num: Poly
    den: Poly

    def __post_init__(self):
        if self.den.is_zero():
            raise PreconditionError("denominator is identically zero")
        if self.degree < 2:
            raise PreconditionError(f"rational maps must have degree >= 2, got {self.degree}")

    @classmethod
    def from_coeffs(cls, num, den=(1.0,), reduce=True, tol=config.ROOT_CLUSTER_TOL):
        num, den = Poly(num), Poly(den)
        if reduce:
            num, den = ratfn_reduce(num, den, tol)
        return cls(num, den)

    @classmethod
    def polynomial(cls, coeffs):
        return cls(Poly(coeffs), Poly([1.0]))

    @classmethod
    def from_vector(cls, vec, degree):
        vec = np.asarray(vec, dtype=config.COMPLEX)
        return cls(Poly(vec[: degree + 1]), Poly(vec[degree + 1 :]))

    @property
    def degree(self) -> int:
        return max(self.num.degree, self.den.degree)

    @property
    def is_polynomial(self) -> bool:
        return self.den.degree == 0 and self.num.degree >= 2

    @property
    def vector(self) -> np.ndarray:
        d = self.degree
        return np.concatenate([self.num.padded(d + 1), self.den.padded(d + 1)])

    def __call__(self, z):
        d = self.degree
        if is_inf(z):
            if self.num.degree > self.den.degree:
                return INF
            if self.num.degree < self.den.degree:
                return 0j
            return self.num.leading / self.den.leading
        z = complex(z)
        if abs(z) <= 1.0:
            p, q = self.num(z), self.den(z)
        else:
            # homogeneous evaluation in w = 1/z, both of formal degree d
            w = 1.0 / z
            p = q = 0j
            for a in self.num.padded(d + 1):
                p = p * w + a
            for b in self.den.padded(d + 1):
                q = q * w + b
        if q == 0:
            return INF
        val = p / q
        return INF if is_inf(val) else val

    def deriv(self, z):
        """f'(z) at a finite non-pole z."""
        if is_inf(z):
            raise OrbitHitsInfinity("derivative requested at infinity")
        q = self.den(z)
        if q == 0:
            raise OrbitHitsInfinity(f"derivative requested at a pole {z}")
        return (self.num.deriv()(z) * q - self.num(z) * self.den.deriv()(z)) / (q * q)

    def taylor(self, z, order):
        if is_inf(z):
            raise OrbitHitsInfinity("Taylor expansion requested at infinity")
        return rational_taylor(self.num, self.den, z, order)

    def wronskian(self) -> Poly:
        return self.num.deriv() * self.den - self.num * self.den.deriv()

    def perturbed(self, direction, t):
        return RatMap.from_vector(self.vector + t * np.asarray(direction), self.degree)

    def conjugate(self, s: Moebius, reduce=False):
        num, den = moebius_conjugate((self.num, self.den), s, reduce=reduce)
        if not reduce:
            scale = max(np.max(np.abs(num.coeffs)), np.max(np.abs(den.coeffs)))
            num, den = num * (1 / scale), den * (1 / scale)
        return RatMap(num, den)

    def sensitivity(self, z, order=0):
        """Taylor coefficients of the coefficient-gradient of f at a finite point.

        Row k holds d/d(coeff) of f^(k)(z)/k!, for k = 0..order; columns follow
        :attr:`vector`.
        """
        if is_inf(z):
            raise OrbitHitsInfinity("sensitivity requested at infinity")
        d = self.degree
        inv_q = rational_taylor(Poly([1.0]), self.den, z, order)
        p_q2 = rational_taylor(self.num, self.den * self.den, z, order)
        out = np.zeros((order + 1, 2 * d + 2), dtype=config.COMPLEX)
        for k in range(d + 1):
            # Taylor coefficients of z^k around z
            mono = np.array(
                [math.comb(k, l) * z ** (k - l) if l <= k else 0 for l in range(order + 1)],
                dtype=config.COMPLEX,
            )
            a = np.convolve(mono, inv_q)[: order + 1]
            b = np.convolve(mono, p_q2)[: order + 1]
            out[:, k] = a
            out[:, d + 1 + k] = -b
        return out

    def direction_derivative(self, direction, z):
        """The induced vector field f_dot(z) = d/dt f_t(z) for a coefficient direction."""
        return complex(self.sensitivity(z, 0)[0] @ np.asarray(direction))


@dataclass(frozen=True)
class CriticalSet:
    points: tuple
    multiplicities: tuple

    @property
    def nu(self) -> int:
        return len(self.points)

    @property
    def mu(self) -> tuple:
        return tuple(self.multiplicities)

    def __iter__(self):
        return iter(zip(self.points, self.multiplicities))

    def __len__(self):
        return len(self.points)

    def finite(self):
        keep = [(p, m) for p, m in self if not is_inf(p)]
        return CriticalSet(tuple(p for p, _ in keep), tuple(m for _, m in keep))

    def transport(self, s: Moebius):
        return CriticalSet(tuple(s(p) for p in self.points), self.multiplicities)

    def total(self) -> int:
        return sum(self.multiplicities)


def _sort_key(z):
    if is_inf(z):
        return (1, 0.0, 0.0)
    return (0, round(z.real, 9), round(z.imag, 9))


def _default_z0(points, seed=20170406, radius_factor=4.0):
    finite = [abs(p) for p in points if not near_inf(p)]
    radius = radius_factor * (1.0 + max(finite, default=0.0))
    theta = np.random.default_rng(seed).uniform(0, 2 * np.pi)
    return complex(radius * np.exp(1j * theta))


def _finite_roots(f: RatMap, tol):
    w = f.wronskian().trimmed(1e3 * config.EPS * f.degree)
    if w.degree < 1:
        return []
    return poly_roots(w, tol)


def critical_set(f: RatMap, tol=config.ROOT_CLUSTER_TOL) -> CriticalSet:
    """Critical points with multiplicities, finite points sorted, infinity last."""
    d = f.degree
    clusters = _finite_roots(f, tol)
    total = sum(c.multiplicity for c in clusters)
    inf_mult = 2 * d - 2 - total
    if inf_mult < 0:
        raise MultiplicityMismatch(f"found {total} finite critical points, more than 2d-2 = {2 * d - 2}")
    points = [(c.center, c.multiplicity) for c in clusters]
    if inf_mult > 0:
        # cross-check the multiplicity at infinity in a chart where it is finite
        z0 = _default_z0([p for p, _ in points] + [f(p) for p, _ in points])
        s = Moebius.inversion_near(z0)
        g = f.conjugate(s)
        target = s(INF)
        near = [c for c in _finite_roots(g, tol) if abs(c.center - target) <= 1e-3 * max(1.0, abs(target))]
        found = sum(c.multiplicity for c in near)
        if found != inf_mult:
            raise MultiplicityMismatch(
                f"multiplicity at infinity is {inf_mult} by degree count but {found} in a conjugate chart"
            )
        points.append((INF, inf_mult))
    points.sort(key=lambda pm: _sort_key(pm[0]))
    return CriticalSet(tuple(p for p, _ in points), tuple(m for _, m in points))


def orbit(f: RatMap, z0, H, return_flags=False, snap=None):
    """[z0, f(z0), ..., f^H(z0)] on the extended plane.

    With ``snap`` set, points of modulus above it are replaced by infinity.
    """
    if H < 1:
        raise PreconditionError("horizon must be >= 1")
    pts = [INF if is_inf(z0) else complex(z0)]
    flags = {"overflow": False, "underflow": False}
    for _ in range(H):
        z = pts[-1]
        w = f(z)
        if snap is not None and near_inf(w, snap):
            w = INF
        if is_inf(w) and not is_inf(z) and f.den(z) != 0:
            flags["overflow"] = True
        if not is_inf(w) and w != 0 and abs(w) < 1e-300:
            flags["underflow"] = True
        pts.append(w)
    return (pts, flags) if return_flags else pts


def iterate_derivative(f: RatMap, z, k):
    """(f^k)'(z) = prod_{r<k} f'(f^r(z))."""
    out = 1.0 + 0j
    for _ in range(k):
        if is_inf(z):
            raise OrbitHitsInfinity("orbit reaches infinity")
        out *= f.deriv(z)
        z = f(z)
    return out


def continue_critical_point(g: RatMap, c, mu, maxiter=60):
    """Newton on g^(mu)(zeta) = 0 seeded at c."""
    z = complex(c)
    scale = max(1.0, abs(z))
    for _ in range(maxiter):
        t = g.taylor(z, mu + 1)
        if t[mu + 1] == 0:
            raise NewtonDivergence("degenerate Newton step in critical point continuation")
        step = t[mu] / ((mu + 1) * t[mu + 1])
        z -= step
        if abs(z - c) > 0.1 * scale:
            raise NewtonDivergence(f"critical point continuation left the neighbourhood of {c}")
        if abs(step) <= 4 * config.EPS * scale:
            return z
    return z


@dataclass(frozen=True)
class Chart:
    """A set of coefficient directions spanning the space being differentiated over."""

    name: str
    directions: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.directions.shape[0]


def rat_chart(f: RatMap) -> Chart:
    """Affine chart of P C^(2d+1): all coefficients except the largest one."""
    vec = f.vector
    pin = int(np.argmax(np.abs(vec)))
    n = len(vec)
    dirs = np.eye(n, dtype=config.COMPLEX)[[k for k in range(n) if k != pin]]
    return Chart(f"rat(pin={pin})", dirs)


def poly_chart(f: RatMap) -> Chart:
    """Leading-coefficient-fixed polynomial chart: numerator coefficients 0..d-1."""
    if not f.is_polynomial:
        raise PreconditionError("polynomial chart needs a polynomial map")
    d = f.degree
    return Chart("poly", np.eye(2 * d + 2, dtype=config.COMPLEX)[:d])


def family_chart(f: RatMap, dnum=(), dden=(), name="family") -> Chart:
    """One-parameter family f + t*(dnum, dden)."""
    d = f.degree
    v = np.concatenate([Poly(dnum).padded(d + 1), Poly(dden).padded(d + 1)])
    return Chart(name, v[None, :])


def conjugate_to_finite(f: RatMap, crit: CriticalSet, points=(), seed=20170406):
    """Conjugate by sigma(z) = z0 z / (z0 - z) so that infinity avoids ``points``.

    Returns ``(g, crit_g, sigma)``; critical labels are transported, not recomputed.
    """
    pts = list(points) + list(crit.points)
    z0 = _default_z0(pts, seed)
    s = Moebius.inversion_near(z0)
    return f.conjugate(s), crit.transport(s), s


def _ensure_finite_critical_data(f, crit):
    pts = list(crit.points) + [f(c) for c in crit.points]
    if any(near_inf(p) for p in pts):
        return conjugate_to_finite(f, crit, pts)
    return f, crit, None


def _g_values(g: RatMap, crit: CriticalSet):
    vals = []
    for c, mu in crit:
        z = continue_critical_point(g, c, mu)
        t = g.taylor(z, mu)
        for j in range(mu):
            vals.append(math.factorial(j) * t[j])
    return np.array(vals)


def g_map_jacobian(f: RatMap, chart: Chart | None = None, crit: CriticalSet | None = None,
                   method="fd", rel_step=1e-5):
    """Jacobian of g -> (zeta_i^j(g)) over the chart, shape (2d-2, chart dim).

    ``method="fd"`` continues every critical point by Newton and differentiates
    by Richardson-extrapolated central differences; ``method="analytic"`` uses
    d zeta_i^j = f_dot^(j)(c_i), valid because f^(j+1)(c_i) = 0 for j < mu_i.
    If a critical point or value is infinite the map is conjugated first and
    the default chart is rebuilt there (ranks are conjugation invariant).
    """
    crit = critical_set(f) if crit is None else crit
    g0, crit0, sigma = _ensure_finite_critical_data(f, crit)
    if sigma is not None and chart is not None and not chart.name.startswith("rat"):
        raise PreconditionError("explicit charts cannot be transported through the automatic conjugation")
    if chart is None or sigma is not None:
        chart = rat_chart(g0)
    dirs = chart.directions
    if method == "analytic":
        rows = []
        for c, mu in crit0:
            S = g0.sensitivity(c, mu - 1)
            for j in range(mu):
                rows.append(math.factorial(j) * S[j] @ dirs.T)
        return np.array(rows)
    if method != "fd":
        raise ValueError(f"unknown method {method!r}")
    base = g0.vector
    h = rel_step * max(1.0, float(np.max(np.abs(base))))
    cols = []
    for v in dirs:
        def F(t):
            return _g_values(RatMap.from_vector(base + t * v, g0.degree), crit0)

        d1 = (F(h) - F(-h)) / (2 * h)
        d2 = (F(h / 2) - F(-h / 2)) / h
        cols.append((4 * d2 - d1) / 3)
    return np.array(cols).T


def mobius_directions(f: RatMap) -> np.ndarray:
    """Coefficient directions of conjugation by the flows of 1, z and z^2."""
    d = f.degree
    P, Q = f.num, f.den
    z = Poly([0, 1])
    trans = (Q - P.deriv(), -Q.deriv())
    scale = (P - z * P.deriv(), -(z * Q.deriv()))
    pn = Poly([0] + [(d - k) * a for k, a in enumerate(P.padded(d + 1))])
    qn = Poly([0] + [(d - k) * b for k, b in enumerate(Q.padded(d + 1))])
    quad = (pn, qn - P)
    return np.array([np.concatenate([a.padded(d + 1), b.padded(d + 1)]) for a, b in (trans, scale, quad)])


@dataclass(frozen=True)
class TangentBasis:
    chart: str
    directions: np.ndarray = field(repr=False)
    map: RatMap = field(repr=False)
    crit: CriticalSet = field(repr=False)
    conjugation: Moebius | None = None

    @property
    def dim(self) -> int:
        return self.directions.shape[0]

    def residual(self, v) -> float:
        """Relative distance of a coefficient direction from the tangent space.

        The map's own coefficient vector is added to the span since rescaling
        both coefficient sequences does not change the map.
        """
        return span_residual(v, np.vstack([self.directions, self.map.vector]))


def _kernel(rows, dirs, expected, label, rtol):
    if rows.size == 0:
        basis = dirs
    else:
        rank = numerical_rank(rows, rtol=rtol)
        _, _, vh = np.linalg.svd(rows)
        basis = vh[rank:].conj() @ dirs
    if basis.shape[0] != expected:
        raise DimensionMismatch(f"{label}: tangent dimension {basis.shape[0]}, expected {expected}")
    return basis


def tangent_basis_ratmu(f: RatMap, crit: CriticalSet | None = None, rtol=1e-8) -> TangentBasis:
    """Kernel of the multiplicity-constraint rows inside the affine chart; dimension nu+3."""
    crit = critical_set(f) if crit is None else crit
    g0, crit0, sigma = _ensure_finite_critical_data(f, crit)
    chart = rat_chart(g0)
    rows = []
    for c, mu in crit0:
        if mu > 1:
            S = g0.sensitivity(c, mu - 1)
            for j in range(1, mu):
                rows.append(math.factorial(j) * S[j] @ chart.directions.T)
    rows = np.array(rows, dtype=config.COMPLEX).reshape(len(rows), chart.dim)
    basis = _kernel(rows, chart.directions, crit0.nu + 3, "Rat^mu", rtol)
    return TangentBasis(chart.name + "|ratmu", basis, g0, crit0, sigma)


def tangent_basis_polmu(f: RatMap, crit: CriticalSet | None = None, rtol=1e-8) -> TangentBasis:
    """Tangent space of Pol^mu in the leading-coefficient-fixed chart; dimension nu+1."""
    crit = (critical_set(f) if crit is None else crit).finite()
    chart = poly_chart(f)
    rows = []
    for c, mu in crit:
        if mu > 1:
            S = f.sensitivity(c, mu - 1)
            for j in range(1, mu):
                rows.append(math.factorial(j) * S[j] @ chart.directions.T)
    rows = np.array(rows, dtype=config.COMPLEX).reshape(len(rows), chart.dim)
    basis = _kernel(rows, chart.directions, crit.nu + 1, "Pol^mu", rtol)
    return TangentBasis("poly|polmu", basis, f, crit, None)


def span_residual(v, basis) -> float:
    """Relative distance of v from the row span of ``basis``."""
    q, _ = np.linalg.qr(np.asarray(basis).T)
    v = np.asarray(v)
    r = v - q @ (q.conj().T @ v)
    return float(np.linalg.norm(r) / max(np.linalg.norm(v), 1e-300))
