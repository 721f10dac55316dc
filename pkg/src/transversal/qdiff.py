"""Quadratic differentials with simple poles and the push-forward operator.

A :class:`QuadDiff` stores q(z) = sum residue / (z - pole); the dz^2 is
implicit.  Push-forwards are only ever evaluated pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import config
from .algebra import Poly, aberth, is_inf
from .errors import (
    CriticalValue,
    NearPole,
    OrbitHitsInfinity,
    PreimageAtInfinity,
    PreimageAtPoleOfQ,
    RelationNotRealized,
)
from .ratmap import CriticalSet, RatMap, critical_set, orbit
from .relations import as_relation

MERGE_TOL = 1e-9


@dataclass(frozen=True)
class QuadDiff:
    poles: np.ndarray
    residues: np.ndarray
    meta: tuple = field(default=(), compare=False)

    @classmethod
    def from_terms(cls, terms, meta=(), merge_tol=MERGE_TOL):
        """Build from (pole, residue) pairs, summing residues at coincident poles.

        Residues that cancel down to rounding level are dropped, so a sum
        like 1/(z-v) - 1/(z-v) is the zero differential.
        """
        poles, res, mass = [], [], []
        for p, r in terms:
            if is_inf(p):
                raise OrbitHitsInfinity("quadratic differential pole at infinity")
            p, r = complex(p), complex(r)
            for k, q in enumerate(poles):
                if abs(p - q) <= merge_tol * max(1.0, abs(q)):
                    res[k] += r
                    mass[k] += abs(r)
                    break
            else:
                poles.append(p)
                res.append(r)
                mass.append(abs(r))
        keep = [k for k in range(len(poles)) if abs(res[k]) > 64 * config.EPS * mass[k]]
        return cls(
            np.array([poles[k] for k in keep], dtype=config.COMPLEX),
            np.array([res[k] for k in keep], dtype=config.COMPLEX),
            tuple(meta),
        )

    @classmethod
    def zero(cls, meta=()):
        return cls(np.zeros(0, dtype=config.COMPLEX), np.zeros(0, dtype=config.COMPLEX), tuple(meta))

    @property
    def terms(self):
        return list(zip(self.poles.tolist(), self.residues.tolist()))

    def is_zero(self) -> bool:
        return self.poles.size == 0

    def __call__(self, z):
        return qd_eval(self, z)

    def __add__(self, other):
        return QuadDiff.from_terms(self.terms + other.terms, self.meta + other.meta)

    def __mul__(self, a):
        if a == 0:
            return QuadDiff.zero(self.meta)
        return QuadDiff(self.poles.copy(), self.residues * complex(a), self.meta)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def transport_affine(self, alpha, beta=0.0):
        """Image under w = alpha z + beta: (res/alpha)/(w - (alpha p + beta))."""
        alpha = complex(alpha)
        return QuadDiff(alpha * self.poles + beta, self.residues / alpha, self.meta)

    def to_json(self):
        return {
            "terms": [[[p.real, p.imag], [r.real, r.imag]] for p, r in zip(self.poles, self.residues)],
            "meta": [str(m) for m in self.meta],
        }

    @classmethod
    def from_json(cls, data):
        terms = [(complex(*p), complex(*r)) for p, r in data["terms"]]
        return cls.from_terms(terms, tuple(data.get("meta", ())))


def qd_eval(q: QuadDiff, z, tol=1e-12) -> complex:
    if q.is_zero():
        return 0j
    z = complex(z)
    dist = np.abs(z - q.poles)
    if np.min(dist) <= tol * max(1.0, abs(z)):
        raise NearPole(f"{z} is within {tol} of a pole")
    return complex(np.sum(q.residues / (z - q.poles)))


def _orbit_terms(f: RatMap, c, m):
    """(pole, residue) pairs f^r(c), Df^{m-r}(f^r(c)) for r = 1..m."""
    if m == 0:
        return []
    pts = orbit(f, c, m)
    if any(is_inf(p) for p in pts[1:]):
        raise OrbitHitsInfinity(f"orbit of {c} meets infinity within {m} steps; conjugate first")
    out = []
    acc = 1.0 + 0j
    for r in range(m, 0, -1):
        out.append((pts[r], acc))
        if r > 1:
            acc = acc * f.deriv(pts[r - 1])
    return out[::-1]


def _crit(f, crit):
    return critical_set(f) if crit is None else crit


def q_relation(f: RatMap, rel, crit: CriticalSet | None = None) -> QuadDiff:
    """The differential attached to (i,j;m,n): m-sum minus n-sum of simple poles."""
    rel = as_relation(rel)
    crit = _crit(f, crit)
    ci, cj = crit.points[rel.i - 1], crit.points[rel.j - 1]
    terms = _orbit_terms(f, ci, rel.m)
    terms += [(p, -r) for p, r in _orbit_terms(f, cj, rel.n)]
    return QuadDiff.from_terms(terms, (rel,))


def q_relation_reduced(f: RatMap, rel, crit: CriticalSet | None = None, tol=1e-9) -> QuadDiff:
    """Same differential with the two cancelling leading terms removed."""
    rel = as_relation(rel)
    if rel.m < 1 or rel.n < 1:
        raise RelationNotRealized("the reduced form needs m, n >= 1")
    crit = _crit(f, crit)
    ci, cj = crit.points[rel.i - 1], crit.points[rel.j - 1]
    a, b = orbit(f, ci, rel.m)[-1], orbit(f, cj, rel.n)[-1]
    if is_inf(a) or is_inf(b):
        if not (is_inf(a) and is_inf(b)):
            raise RelationNotRealized(f"{rel} is not realized")
    elif abs(a - b) > tol * max(1.0, abs(a)):
        raise RelationNotRealized(f"{rel} is not realized: |difference| = {abs(a - b):.3e}")
    # the r = m and s = n terms are both 1/(z - f^m(c_i)) and cancel
    terms = _orbit_terms(f, ci, rel.m)[:-1]
    terms += [(p, -r) for p, r in _orbit_terms(f, cj, rel.n)[:-1]]
    return QuadDiff.from_terms(terms, (rel,))


def preimages(f: RatMap, z, polish=3):
    """The d preimages of a finite z: roots of num - z*den."""
    d = f.degree
    h = f.num - f.den * Poly([complex(z)])
    h = Poly(h.padded(d + 1))
    lead = abs(h.coeffs[d]) if len(h.coeffs) > d else 0.0
    if h.degree < d or lead <= 1e-12 * float(np.max(np.abs(h.coeffs))):
        raise PreimageAtInfinity(f"{z} has a preimage at infinity")
    w = aberth(h)
    dh = h.deriv()
    for _ in range(polish):
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.array([h(x) / dh(x) for x in w])
        step[~np.isfinite(step)] = 0
        w = w - step
    return w


def pushforward_eval(f: RatMap, q: QuadDiff | Callable, z, tol=1e-10) -> complex:
    """sum over preimages w of z of q(w) / f'(w)^2."""
    w = preimages(f, z)
    total = 0j
    for x in w:
        df = f.deriv(x)
        if abs(df) <= tol * max(1.0, abs(x)):
            raise CriticalValue(f"{z} is (numerically) a critical value")
        if isinstance(q, QuadDiff):
            try:
                qv = qd_eval(q, x)
            except NearPole as exc:
                raise PreimageAtPoleOfQ(f"preimage {x} of {z} sits on a pole") from exc
        else:
            qv = q(x)
        total += qv / (df * df)
    return complex(total)


def invariance_residual(f: RatMap, q: QuadDiff | Callable, samples) -> float:
    """max |f_*q - q| over samples, divided by max |q| (absolute when q vanishes there)."""
    ev = qd_eval if isinstance(q, QuadDiff) else (lambda qq, z: qq(z))
    lhs = np.array([pushforward_eval(f, q, z) for z in samples])
    rhs = np.array([ev(q, z) for z in samples])
    scale = float(np.max(np.abs(rhs))) if len(rhs) else 0.0
    err = float(np.max(np.abs(lhs - rhs))) if len(rhs) else 0.0
    return err / scale if scale > 0 else err


def infinity_moments(q: QuadDiff):
    """(sum a_p, sum a_p p, sum a_p p^2); all zero iff q = O(1/z^4) at infinity."""
    a, p = q.residues, q.poles
    return complex(np.sum(a)), complex(np.sum(a * p)), complex(np.sum(a * p * p))


def integrable_at_infinity(q: QuadDiff, tol=1e-6) -> bool:
    scale = max(1.0, float(np.sum(np.abs(q.residues) * np.maximum(1.0, np.abs(q.poles)) ** 2)))
    return all(abs(m) <= tol * scale for m in infinity_moments(q))


def sample_points(points, n=24, seed=0, radii=(3.0, 7.0)):
    """Deterministic jittered points on two circles around the barycenter of ``points``."""
    pts = np.array([complex(p) for p in points if not is_inf(p)], dtype=config.COMPLEX)
    center = complex(pts.mean()) if pts.size else 0j
    spread = float(np.max(np.abs(pts - center))) if pts.size else 0.0
    scale = max(1.0, spread / 2.0)
    rng = np.random.default_rng(seed)
    out = []
    per = [n // len(radii) + (1 if k < n % len(radii) else 0) for k in range(len(radii))]
    for r, cnt in zip(radii, per):
        jitter = rng.uniform(-0.25, 0.25, size=cnt)
        ang = 2 * np.pi * (np.arange(cnt) + jitter) / max(cnt, 1)
        out.extend(center + r * scale * np.exp(1j * ang))
    return np.array(out, dtype=config.COMPLEX)
