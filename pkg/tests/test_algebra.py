import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transversal.algebra import (
    INF,
    Moebius,
    Poly,
    chordal_distance,
    is_inf,
    moebius_conjugate,
    poly_eval,
    poly_roots,
    ratfn_reduce,
)
from transversal.errors import DegenerateMoebius, ZeroPolynomial

cplx = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


def test_roots_of_z2_plus_1():
    roots = sorted((rc.center for rc in poly_roots(Poly([1, 0, 1]))), key=lambda z: z.imag)
    assert np.allclose(roots, [-1j, 1j])
    assert all(rc.multiplicity == 1 for rc in poly_roots(Poly([1, 0, 1])))


def test_triple_root_is_one_cluster():
    rc = poly_roots(Poly.from_roots([2, 2, 2]))
    assert len(rc) == 1
    assert rc[0].multiplicity == 3
    assert abs(rc[0].center - 2) < 1e-5


def test_roots_agree_with_companion_matrix(rng):
    for _ in range(20):
        c = rng.normal(size=7) + 1j * rng.normal(size=7)
        ours = np.sort_complex(np.array([rc.center for rc in poly_roots(Poly(c))]))
        theirs = np.sort_complex(np.roots(c[::-1]))
        assert np.allclose(ours, theirs, atol=1e-8)


def test_zero_polynomial_has_no_roots():
    with pytest.raises(ZeroPolynomial):
        poly_roots(Poly([0, 0]))


@settings(max_examples=60, deadline=None)
@given(st.lists(cplx, min_size=1, max_size=6))
def test_multiplicities_sum_to_degree(roots):
    p = Poly.from_roots(roots)
    assert sum(rc.multiplicity for rc in poly_roots(p)) == len(roots)


def test_roots_near_underflow():
    roots = [1, 1, 3.6e-42, 3.6e-42, 4.1e-236, 1.5 + 1j]
    assert sum(rc.multiplicity for rc in poly_roots(Poly.from_roots(roots))) == 6


def test_horner_and_infinity():
    p = Poly([1, 2, 3])
    assert poly_eval(p, 2) == 17
    assert is_inf(poly_eval(p, INF))
    assert poly_eval(Poly([5]), INF) == 5


def test_taylor_coefficients():
    p = Poly([0, 0, 0, 1])  # z^3 at 1: 1 + 3w + 3w^2 + w^3
    assert np.allclose(p.taylor(1.0, 3), [1, 3, 3, 1])


def test_reduce_cancels_common_factor():
    num, den = ratfn_reduce(Poly([-1, 0, 1]), Poly([-1, 1]))
    # (z^2 - 1)/(z - 1) = z + 1 up to a common scale
    assert den.degree == 0
    assert np.allclose(num.coeffs / den.coeffs[0], [1, 1])


def test_moebius_rejects_degenerate():
    with pytest.raises(DegenerateMoebius):
        Moebius(1, 2, 2, 4)


@settings(max_examples=40, deadline=None)
@given(cplx, cplx, cplx)
def test_moebius_inverse_and_composition(b, c, z):
    s = Moebius(1 + 0.5j, b, c, 2)
    if abs(s.det) < 1e-3:
        return
    w = s(z)
    if is_inf(w) or abs(w) > 1e8:
        return
    assert abs(s.inverse()(w) - z) <= 1e-8 * max(1, abs(z))
    t = Moebius(0, 1, 1, 3)
    lhs, rhs = (s @ t)(z), s(t(z))
    if not (is_inf(lhs) or is_inf(rhs)):
        assert abs(lhs - rhs) <= 1e-8 * max(1, abs(lhs))


def test_conjugation_is_pointwise_consistent():
    f = (Poly([-2, 0, 1]), Poly([1]))
    s = Moebius(1, 0, 1, 3)
    num, den = moebius_conjugate(f, s)
    for z in (0.3, -0.7 + 0.2j, 1.1j):
        direct = s(poly_eval(f[0], s.inverse()(z)) / poly_eval(f[1], s.inverse()(z)))
        assert abs(num(z) / den(z) - direct) < 1e-10


def test_chordal_distance():
    assert chordal_distance(INF, INF) == 0
    assert abs(chordal_distance(0, INF) - 2) < 1e-15
    assert chordal_distance(1, 1) == 0
    assert cmath.isclose(chordal_distance(0, 1), 2 / np.sqrt(2))


def test_rank_by_gap_picks_largest_gap():
    from transversal import rank_by_gap

    assert rank_by_gap(np.diag([1, 1e-3])).rank == 2
    r = rank_by_gap(np.diag([1, 1e-7, 1e-10]))
    assert r.rank == 1 and r.certified
    r = rank_by_gap(np.diag([1, 1e-2, 1e-4, 1e-6, 10 ** -8.5]))
    assert not r.certified
