"""Complex polynomial and rational-function arithmetic.

Points of the extended plane are plain Python complex numbers; the point at
infinity is ``INF`` (``complex('inf')``) and is recognised with :func:`is_inf`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import config
from .errors import (
    DegenerateMoebius,
    NonConvergence,
    ZeroDenominator,
    ZeroPolynomial,
)

INF = complex("inf")


def is_inf(z) -> bool:
    z = complex(z)
    return cmath.isinf(z) or cmath.isnan(z)


def near_inf(z, big=config.INF_SNAP) -> bool:
    """Infinite, or so large that rounding near a pole is the likelier explanation."""
    return is_inf(z) or abs(complex(z)) > big


def _as_point(z):
    z = complex(z)
    return INF if is_inf(z) else z


class Poly:
    """Polynomial with complex coefficients in ascending degree order.

    Exact trailing zeros are stripped, so the zero polynomial has no
    coefficients and degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        c = np.atleast_1d(np.asarray(coeffs, dtype=config.COMPLEX)).copy()
        nz = np.nonzero(c)[0]
        c = c[: nz[-1] + 1] if nz.size else c[:0]
        c.setflags(write=False)
        self.coeffs = c

    @classmethod
    def from_roots(cls, roots, leading=1.0):
        c = np.array([1.0 + 0j])
        for r in roots:
            c = np.concatenate([[0j], c]) - r * np.concatenate([c, [0j]])
        return cls(leading * c)

    @classmethod
    def monomial(cls, k, coeff=1.0):
        c = np.zeros(k + 1, dtype=config.COMPLEX)
        c[k] = coeff
        return cls(c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    @property
    def leading(self) -> complex:
        return complex(self.coeffs[-1]) if len(self.coeffs) else 0j

    def padded(self, n) -> np.ndarray:
        """Coefficients zero-padded to length ``n``."""
        out = np.zeros(n, dtype=config.COMPLEX)
        out[: len(self.coeffs)] = self.coeffs
        return out

    def trimmed(self, rtol):
        """Drop trailing coefficients below ``rtol`` times the coefficient norm."""
        c = self.coeffs
        if not len(c):
            return self
        scale = np.max(np.abs(c))
        k = len(c)
        while k > 0 and abs(c[k - 1]) <= rtol * scale:
            k -= 1
        return Poly(c[:k])

    def __call__(self, z):
        return poly_eval(self, z)

    def deriv(self, k=1):
        p = self
        for _ in range(k):
            p = poly_derivative(p)
        return p

    def taylor(self, z0, order=None):
        """Taylor coefficients ``p^(k)(z0)/k!`` for k = 0..order."""
        c = list(self.coeffs)
        n = len(c)
        order = n - 1 if order is None else order
        out = np.zeros(order + 1, dtype=config.COMPLEX)
        # repeated synthetic division by (z - z0)
        for k in range(min(order + 1, n)):
            acc = 0j
            for i in range(len(c) - 1, -1, -1):
                acc = acc * z0 + c[i]
                c[i] = acc
            out[k] = c[0]
            c = c[1:]
        return out

    def _binary(self, other, op):
        if not isinstance(other, Poly):
            other = Poly([other])
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(op(self.padded(n), other.padded(n)))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Poly(-self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Poly):
            if self.is_zero() or other.is_zero():
                return Poly()
            return Poly(np.convolve(self.coeffs, other.coeffs))
        return Poly(self.coeffs * complex(other))

    __rmul__ = __mul__

    def __pow__(self, k):
        out = Poly([1.0])
        for _ in range(k):
            out = out * self
        return out

    def divmod_linear(self, r):
        """Quotient and remainder of division by ``(z - r)``."""
        c = self.coeffs
        if len(c) <= 1:
            return Poly(), (complex(c[0]) if len(c) else 0j)
        q = np.zeros(len(c) - 1, dtype=config.COMPLEX)
        acc = 0j
        for i in range(len(c) - 1, 0, -1):
            acc = acc * r + c[i]
            q[i - 1] = acc
        return Poly(q), complex(acc * r + c[0])

    def allclose(self, other, atol=1e-12):
        n = max(len(self.coeffs), len(other.coeffs))
        return bool(np.allclose(self.padded(n), other.padded(n), atol=atol, rtol=0))

    def __eq__(self, other):
        return isinstance(other, Poly) and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __repr__(self):
        return f"Poly({np.array2string(self.coeffs, precision=6, separator=', ')})"


def poly_eval(p: Poly, z):
    """Horner evaluation on the extended plane."""
    c = p.coeffs
    if not len(c):
        return 0j
    if is_inf(z):
        return INF if p.degree >= 1 else complex(c[0])
    z = complex(z)
    if abs(z) > 1.0 and p.degree >= 1:
        # homogeneous form: z^deg * sum c_k w^(deg-k), w = 1/z
        w = 1.0 / z
        acc = 0j
        for a in c:
            acc = acc * w + a
        try:
            val = acc * z ** p.degree
        except OverflowError:
            return INF
        return _as_point(val)
    acc = 0j
    for a in c[::-1]:
        acc = acc * z + a
    return acc


def poly_derivative(p: Poly) -> Poly:
    c = p.coeffs
    if len(c) <= 1:
        return Poly()
    return Poly(c[1:] * np.arange(1, len(c)))


@dataclass(frozen=True)
class RootCluster:
    center: complex
    multiplicity: int
    radius: float = 0.0


_TINY = np.finfo(float).tiny  # residuals below this are numerically zero


def _horner_vec(c, z):
    """p(z) and p'(z) for a vector of points, ascending coefficients ``c``."""
    p = np.full_like(z, c[-1])
    dp = np.zeros_like(z)
    for a in c[-2::-1]:
        dp = dp * z + p
        p = p * z + a
    return p, dp


def aberth(p: Poly, maxiter=500, seed_angle=0.4):
    """Raw roots of ``p`` by Aberth-Ehrlich simultaneous iteration."""
    if p.is_zero():
        raise ZeroPolynomial("cannot find roots of the zero polynomial")
    n = p.degree
    if n < 1:
        raise ZeroPolynomial("constant polynomial has no roots")
    c = np.asarray(p.coeffs) / p.leading
    # zero roots are factored out exactly
    nz = np.nonzero(c)[0][0]
    zeros = np.zeros(nz, dtype=config.COMPLEX)
    c = c[nz:]
    n = len(c) - 1
    if n == 0:
        return zeros
    if n == 1:
        return np.concatenate([zeros, [-c[0]]])

    absc = np.abs(c)
    # Fujiwara bound on the root moduli
    ks = np.arange(1, n + 1)
    terms = absc[n - ks] ** (1.0 / ks)
    terms[-1] = (absc[0] / 2.0) ** (1.0 / n)
    upper = 2.0 * np.max(terms)
    lower = absc[0] ** (1.0 / n)
    radius = 0.5 * (upper + lower) if lower > 0 else upper / 2
    k = np.arange(n)
    z = radius * (1.0 + 0.01 * np.cos(3.1 * k)) * np.exp(1j * (2 * np.pi * k / n + seed_angle))

    done = np.zeros(n, dtype=bool)
    eps = config.EPS
    for _ in range(maxiter):
        pv, dpv = _horner_vec(c, z)
        bound = np.maximum(4.0 * n * eps * np.polyval(absc[::-1], np.abs(z)), _TINY)
        done |= np.abs(pv) <= bound
        if done.all():
            break
        act = ~done
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = pv / dpv
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            s = inv.sum(axis=1)
            w = newton / (1.0 - newton * s)
        bad = ~np.isfinite(w)
        w[bad] = 1e-8 * (1 + np.abs(z[bad]))
        step = np.where(act, w, 0)
        z = z - step
        small = np.abs(step) <= eps * np.abs(z)
        done |= small & act & (np.abs(pv) <= 1e3 * bound)
    else:
        pv, _ = _horner_vec(c, z)
        bound = np.maximum(4.0 * n * eps * np.polyval(absc[::-1], np.abs(z)), _TINY)
        if not np.all(np.abs(pv) <= 1e6 * bound):
            raise NonConvergence("Aberth iteration did not converge", residuals=np.abs(pv))
    return np.concatenate([zeros, z])


def _cluster(roots, p: Poly, tol):
    """Greedy clustering of raw roots into RootClusters.

    Points closer than ``tol`` (relative) always merge.  A group of k points is
    also merged when its spread is consistent with the perturbation radius of a
    k-fold root, ``(eta * |p|(c) / |p^(k)(c)/k!|)^(1/k)``.
    """
    roots = list(roots)
    n_deg = p.degree
    absc = np.abs(p.coeffs)
    eta = 16.0 * max(n_deg, 1) * config.EPS
    remaining = list(range(len(roots)))
    clusters = []
    while remaining:
        i0 = remaining[0]
        z0 = roots[i0]
        d = sorted(remaining, key=lambda j: abs(roots[j] - z0))
        best = 1
        for k in range(len(d), 1, -1):
            pts = np.array([roots[j] for j in d[:k]])
            c = pts.mean()
            spread = float(np.max(np.abs(pts - c)))
            allowed = tol * max(1.0, abs(c))
            if spread > allowed:
                tk = p.taylor(c, k)[k]
                scale = float(np.polyval(absc[::-1], abs(c)))
                if abs(tk) > 0:
                    rho = (eta * scale / abs(tk)) ** (1.0 / k)
                    allowed = max(allowed, 10.0 * rho)
            if spread <= allowed:
                best = k
                break
        members = d[:best]
        pts = np.array([roots[j] for j in members])
        c = complex(pts.mean())
        clusters.append(RootCluster(c, best, float(np.max(np.abs(pts - c)))))
        remaining = [j for j in remaining if j not in members]
    clusters.sort(key=lambda rc: (round(rc.center.real, 9), round(rc.center.imag, 9)))
    return clusters


def poly_roots(p: Poly, tol=config.ROOT_CLUSTER_TOL, maxiter=500):
    """Roots of ``p`` grouped into clusters with multiplicities."""
    if p.is_zero():
        raise ZeroPolynomial("cannot find roots of the zero polynomial")
    if p.degree < 1:
        raise ZeroPolynomial("polynomial of degree 0 has no roots")
    raw = aberth(p, maxiter=maxiter)
    return _cluster(raw, p, tol)


def rational_taylor(num: Poly, den: Poly, z0, order):
    """Taylor coefficients of num/den at a finite point z0 (den(z0) != 0)."""
    n = num.taylor(z0, order) if not num.is_zero() else np.zeros(order + 1, dtype=config.COMPLEX)
    d = den.taylor(z0, order)
    if d[0] == 0:
        raise ZeroDenominator("denominator vanishes at the expansion point")
    out = np.zeros(order + 1, dtype=config.COMPLEX)
    for k in range(order + 1):
        acc = n[k]
        for i in range(1, k + 1):
            acc -= d[i] * out[k - i]
        out[k] = acc / d[0]
    return out


@dataclass(frozen=True)
class Moebius:
    """z -> (a z + b) / (c z + d)."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        if scale == 0 or abs(self.det) <= 1e-12 * scale * scale:
            raise DegenerateMoebius(f"determinant {self.det} too small")

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1)

    @classmethod
    def inversion_near(cls, z0):
        """sigma(z) = z0 z / (z0 - z): close to the identity for |z| << |z0|, sends z0 to infinity."""
        return cls(z0, 0, -1, z0)

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    def __call__(self, z):
        a, b, c, d = self.a, self.b, self.c, self.d
        if is_inf(z):
            return INF if c == 0 else a / c
        den = c * z + d
        if den == 0:
            return INF
        return _as_point((a * z + b) / den)

    def inverse(self):
        return Moebius(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other):
        """Composition self o other."""
        return Moebius(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def derivative(self, z):
        return self.det / (self.c * z + self.d) ** 2


def _homogeneous_substitute(p: Poly, deg, s: Moebius):
    """Numerator of p(s(z)) after clearing (c z + d)^deg."""
    lin_num = Poly([s.b, s.a])
    lin_den = Poly([s.d, s.c])
    out = Poly()
    for k, a in enumerate(p.padded(deg + 1)):
        if a != 0:
            out = out + (lin_num ** k) * (lin_den ** (deg - k)) * a
    return out


def ratfn_reduce(num: Poly, den: Poly, tol=config.ROOT_CLUSTER_TOL):
    """Cancel near-common roots of num and den and normalise the coefficients.

    Returns ``(num, den)`` scaled so the largest coefficient modulus over both is 1.
    """
    if den.is_zero():
        raise ZeroDenominator("denominator is the zero polynomial")
    if num.is_zero():
        return Poly(), Poly([1.0])
    if num.degree >= 1 and den.degree >= 1:
        rn = [c for rc in poly_roots(num, tol) for c in [rc.center] * rc.multiplicity]
        rd = [c for rc in poly_roots(den, tol) for c in [rc.center] * rc.multiplicity]
        for r in list(rn):
            match = None
            for s in rd:
                if abs(r - s) <= tol * max(1.0, abs(r)):
                    match = s
                    break
            if match is not None:
                rd.remove(match)
                num, _ = num.divmod_linear(r)
                den, _ = den.divmod_linear(match)
    scale = max(np.max(np.abs(num.coeffs)), np.max(np.abs(den.coeffs)))
    idx = np.argmax(np.concatenate([np.abs(num.coeffs), np.abs(den.coeffs)]))
    pivot = np.concatenate([num.coeffs, den.coeffs])[idx]
    pivot = pivot / abs(pivot) * scale
    return Poly(num.coeffs / pivot), Poly(den.coeffs / pivot)


def moebius_conjugate(f, s: Moebius, reduce=True, tol=config.ROOT_CLUSTER_TOL):
    """Coefficient pair of s o f o s^{-1} for f = (num, den)."""
    num, den = f
    deg = max(num.degree, den.degree)
    si = s.inverse()
    pn = _homogeneous_substitute(num, deg, si)
    pd = _homogeneous_substitute(den, deg, si)
    new_num = pn * s.a + pd * s.b
    new_den = pn * s.c + pd * s.d
    if reduce:
        return ratfn_reduce(new_num, new_den, tol)
    return new_num, new_den


def chordal_distance(z, w):
    if is_inf(z) and is_inf(w):
        return 0.0
    if is_inf(z):
        return 2.0 / math.sqrt(1 + abs(w) ** 2)
    if is_inf(w):
        return 2.0 / math.sqrt(1 + abs(z) ** 2)
    return 2.0 * abs(z - w) / math.sqrt((1 + abs(z) ** 2) * (1 + abs(w) ** 2))
