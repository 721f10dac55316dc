"""Flexible Lattès maps: the duplication map of a Legendre elliptic curve.

For y^2 = x(x-1)(x-a) doubling a point acts on x by

    f_a(x) = (x^2 - a)^2 / (4 x (x - 1)(x - a)).

Every critical point goes to one of 0, 1, a, which go to the repelling fixed
point at infinity.  Nothing here is taken on trust: the constructor checks
this structure numerically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import config
from .algebra import Moebius, Poly, is_inf
from .errors import PreconditionError, ValidationFailure
from .qdiff import QuadDiff, infinity_moments, invariance_residual, sample_points
from .ratmap import CriticalSet, RatMap, critical_set, orbit
from .relations import RelationCollection, build_proper, numeric_model
from .transversality import Certificate, certify, kernel_qdiff, kernel_residual


@dataclass(frozen=True)
class LattesMap:
    a: complex
    map: RatMap = field(repr=False)
    crit: CriticalSet = field(repr=False)
    multiplier_at_infinity: complex = 4.0


def lattes_coeffs(a):
    a = complex(a)
    num = (Poly([-a, 0, 1]) ** 2).coeffs
    den = (Poly([0, 4]) * Poly([-1, 1]) * Poly([-a, 1])).coeffs
    return num, den


def flexible_lattes(a, tol=1e-8, separation=1e-3) -> LattesMap:
    a = complex(a)
    if min(abs(a), abs(a - 1)) <= separation:
        raise PreconditionError(f"a = {a} must stay away from 0 and 1")
    num, den = lattes_coeffs(a)
    f = RatMap.from_coeffs(num, den, reduce=False)
    if f.degree != 4:
        raise ValidationFailure(f"expected degree 4, got {f.degree}")
    crit = critical_set(f)
    if crit.total() != 6 or crit.nu != 6:
        raise ValidationFailure(f"expected six simple critical points, got {crit.multiplicities}")
    post = (0j, 1 + 0j, a)

    def near_post(z):
        return not is_inf(z) and min(abs(z - p) for p in post) <= tol * max(1.0, abs(z))

    for c in crit.points:
        o = orbit(f, c, 3, snap=config.INF_SNAP)
        if not near_post(o[1]):
            raise ValidationFailure(f"critical value {o[1]} is not one of 0, 1, a")
        if not (is_inf(o[2]) and is_inf(o[3])):
            raise ValidationFailure(f"f^2({c}) = {o[2]} is not the fixed point at infinity")
    # multiplier at infinity in the chart w = 1/z
    inv = Moebius(0, 1, 1, 0)
    g = f.conjugate(inv)
    if abs(g(0j)) > tol:
        raise ValidationFailure("infinity is not fixed")
    lam = g.deriv(0j)
    if abs(lam) <= 1.0:
        raise ValidationFailure(f"fixed point at infinity is not repelling (multiplier {lam})")
    return LattesMap(a, f, crit, complex(lam))


@dataclass(frozen=True)
class DegeneracyReport:
    a: complex
    collection: RelationCollection
    certificate: Certificate
    kernel_residual: float
    qdiff: QuadDiff
    invariance_residual: float
    moments: tuple
    flex_residual: float

    @property
    def rank(self):
        return self.certificate.rank

    @property
    def N(self):
        return self.certificate.N

    def to_json(self):
        return {
            "a": [self.a.real, self.a.imag],
            "relations": [list(r) for r in self.collection],
            "zeta": self.collection.zeta,
            "certify": self.certificate.to_json(),
            "kernel_residual": self.kernel_residual,
            "qdiff": self.qdiff.to_json(),
            "invariance_residual": self.invariance_residual,
            "infinity_moments": [[m.real, m.imag] for m in self.moments],
            "flex_residual": self.flex_residual,
        }


def degeneracy_demo(a, n_samples=24, seed=0) -> DegeneracyReport:
    """Proper collection, rank defect, kernel vector and its invariant differential."""
    L = flexible_lattes(a)
    model = numeric_model(L.map, polynomial=False, crit=L.crit, H=40)
    F = build_proper(model)
    cert = certify(L.map, F.relations, "rat", crit=L.crit)
    rep = cert.report
    avec = cert.kernel if cert.kernel is not None else np.zeros(cert.N)
    q = kernel_qdiff(rep, avec)
    g = rep.tangent.map
    samples = sample_points(list(q.poles), n_samples, seed)
    res = invariance_residual(g, q, samples)
    # the flexible direction, carried through the same conjugation
    flex = _flex_in_chart(L, rep)
    G = rep.gradients
    flex_res = float(np.linalg.norm(G @ flex) / (np.linalg.norm(G, 2) * np.linalg.norm(flex)))
    return DegeneracyReport(L.a, F, cert, kernel_residual(rep, avec), q, res, infinity_moments(q), flex_res)


def _flex_in_chart(L: LattesMap, rep, h=1e-6):
    s = rep.tangent.conjugation

    def vec(b):
        num, den = lattes_coeffs(b)
        f = RatMap.from_coeffs(num, den, reduce=False)
        if s is not None:
            f = f.conjugate(s)
        return f.vector

    return (vec(L.a + h) - vec(L.a - h)) / (2 * h)
