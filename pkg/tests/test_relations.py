import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transversal import (
    CriticalRelation,
    RatMap,
    SymbolicModel,
    build_proper,
    closure,
    detect_relations,
    fig1_model,
    is_full,
    is_minimally_full,
    is_noncyclic,
    is_proper,
    numeric_model,
    zeta,
)
from transversal.errors import AmbiguousCollision, HorizonExhausted, PreconditionError
from transversal.relations import collection

FIG1_BUILT = [(2, 1, 1, 2), (3, 1, 4, 1), (4, 6, 3, 0), (5, 4, 4, 3), (8, 7, 4, 1), (9, 8, 1, 1)]
ALTERNATIVE = [(2, 1, 1, 2), (3, 1, 4, 1), (4, 6, 3, 0), (5, 6, 4, 0), (9, 7, 4, 1), (9, 8, 1, 1)]
SHIFTED = [(2, 1, 2, 3), (3, 1, 5, 2), (4, 6, 3, 0), (5, 6, 4, 0), (9, 7, 4, 1), (9, 8, 2, 2)]


@pytest.fixture(scope="module")
def fig1():
    return fig1_model()


def rels(xs):
    return [tuple(r) for r in xs]


# -- the relation type ------------------------------------------------------

def test_relation_str_and_shift():
    r = CriticalRelation(2, 1, 1, 2)
    assert str(r) == "(2,1;1,2)"
    assert tuple(r.shifted(3)) == (2, 1, 4, 5)


# -- closure ------------------------------------------------------------------

def test_closure_shift():
    cl = closure([(2, 1, 1, 2)], 2, 10)
    assert cl.same((2, 3), (1, 4))
    assert not cl.same((2, 0), (1, 0))


def test_closure_empty():
    assert not closure([], 2, 5).same((1, 0), (2, 0))


def test_closure_merges_through_landing():
    cl = closure([(4, 6, 3, 0), (5, 6, 4, 0)], 6, 12)
    assert cl.same((5, 4), (4, 3))


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.tuples(st.integers(1, 4), st.integers(1, 4), st.integers(0, 6), st.integers(1, 6)),
        min_size=1,
        max_size=4,
    )
)
def test_closure_is_shift_saturated(F):
    H = 15
    cl = closure(F, 4, H)
    for i, j, m, n in F:
        for k in range(H - max(m, n) + 1):
            assert cl.same((i, m + k), (j, n + k))


# -- detection ----------------------------------------------------------------

def test_detect_chebyshev(cheb2):
    assert rels(detect_relations(numeric_model(cheb2))) == [(1, 1, 3, 2)]


def test_detect_misiurewicz(misiurewicz):
    assert rels(detect_relations(numeric_model(misiurewicz))) == [(1, 1, 4, 2)]


def test_detect_fig1_keeps_generators_and_shift_consequences(fig1):
    found = rels(detect_relations(fig1))
    for g in fig1.generators:
        assert fig1.realizes(g)
    assert (5, 4, 4, 3) in found
    assert (4, 6, 3, 0) in found


def test_ambiguous_collision_reports_both_candidates():
    # two critical rays drift into the same attracting basin; at a loose
    # tolerance two earlier orbit points qualify as partners
    f = RatMap.polynomial([0.172792096032393 + 0.4108090717505792j,
                           0.16521853809169357 - 0.6515786158021805j, 0, 1])
    with pytest.raises(AmbiguousCollision) as exc:
        numeric_model(f, tol=0.1, H=30)
    assert len(exc.value.candidates) == 2


def test_numeric_tol_must_be_positive(cheb2):
    with pytest.raises(PreconditionError):
        numeric_model(cheb2, tol=0)


# -- symbolic models ----------------------------------------------------------

def test_symbolic_contradiction():
    with pytest.raises(PreconditionError):
        # c1 = f(c3) and f(c3) = c2 would identify two critical points
        SymbolicModel(3, generators=[(1, 3, 0, 1)], landings=[(3, 1, 2)])


def test_symbolic_json_round_trip(fig1):
    data = json.loads(json.dumps(fig1.to_json()))
    back = SymbolicModel.from_json(data)
    assert back.ids == fig1.ids
    assert rels(build_proper(back)) == FIG1_BUILT


# -- full / minimally full / proper --------------------------------------------

def test_fig1_build_proper(fig1):
    F = build_proper(fig1)
    assert rels(F) == FIG1_BUILT
    assert F.zeta == 3 and zeta(fig1) == 3
    assert F.full is True and F.minimally_full is True and F.proper is True
    assert F.noncyclic is True


@pytest.mark.parametrize("F", [FIG1_BUILT, ALTERNATIVE, SHIFTED])
def test_alternative_collections_minimally_full(fig1, F):
    assert is_full(F, fig1) is True
    assert is_minimally_full(F, fig1) is True
    assert is_noncyclic(F)


def test_unrealized_variant_is_not_full(fig1):
    variant = [(2, 1, 1, 2), (3, 1, 4, 1), (4, 6, 3, 0), (5, 4, 4, 3), (8, 4, 4, 1), (9, 8, 1, 1)]
    assert fig1.realizes((8, 4, 4, 1)) is False
    assert is_full(variant, fig1) is False


def test_shifted_collection_is_not_proper(fig1):
    # full, but (2,1;2,3) passes through f(c2) = f^2(c1), an earlier orbit point
    assert is_proper(SHIFTED, fig1) is False


def test_oversized_collection_not_minimal(fig1):
    F = FIG1_BUILT + [(9, 8, 2, 2)]
    assert is_full(F, fig1) is True
    assert is_minimally_full(F, fig1) is False


def test_empty_collection(cheb2):
    assert is_full([], numeric_model(cheb2)) is False
    free = numeric_model(RatMap.polynomial([0.3, 0, 1]))
    assert is_minimally_full([], free) is True
    F = build_proper(free)
    assert len(F) == 0 and F.zeta == 1


def test_chebyshev_proper(cheb2):
    model = numeric_model(cheb2)
    F = build_proper(model)
    assert rels(F) == [(1, 1, 3, 2)] and F.zeta == 0
    assert is_proper([(1, 1, 3, 2)], model) is True


def test_condition_one_rejects_wrong_order(fig1):
    assert is_proper([(1, 2, 1, 2)], fig1) is False


def test_noncyclic():
    assert is_noncyclic([(9, 8, 1, 1)])
    assert not is_noncyclic([(1, 2, 1, 1), (2, 1, 1, 1)])


def test_flags_consistent(fig1):
    for F in (FIG1_BUILT, ALTERNATIVE, SHIFTED, ALTERNATIVE[:-1]):
        c = collection(F, fig1)
        if c.proper:
            assert c.minimally_full
        if c.minimally_full:
            assert c.full and len(c) == fig1.nu - c.zeta


def test_minimal_collections_share_size(fig1):
    sizes = {len(F) for F in (FIG1_BUILT, ALTERNATIVE, SHIFTED) if is_minimally_full(F, fig1)}
    assert sizes == {6}


def test_relabelling_keeps_zeta_and_flags(fig1):
    rng = np.random.default_rng(7)
    gens = [(2, 1, 1, 2), (3, 1, 4, 1), (8, 7, 4, 1), (9, 8, 1, 1)]
    lands = [(4, 3, 6), (5, 4, 6)]
    for _ in range(5):
        perm = rng.permutation(9) + 1
        p = lambda k: int(perm[k - 1])  # noqa: E731
        model = SymbolicModel(
            9,
            generators=[(p(i), p(j), m, n) for i, j, m, n in gens],
            landings=[(p(i), m, p(j)) for i, m, j in lands],
        )
        F = build_proper(model)
        assert F.zeta == 3
        assert F.full is True and F.proper is True and F.noncyclic is True


# -- horizon -------------------------------------------------------------------

def test_horizon_exhausted_warns():
    # a bounded, non-periodic critical orbit never settles
    f = RatMap.polynomial([-0.75 + 0.1j, 0, 1])
    model = numeric_model(f, H=20)
    with pytest.warns(HorizonExhausted):
        F = build_proper(model)
    assert F.horizon_exhausted == (1,)
    assert F.zeta == 1


def test_collection_json(fig1):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        data = build_proper(fig1).to_json()
    json.dumps(data)
    assert data["zeta"] == 3


@pytest.mark.parametrize("c, F", [(-2, [(1, 1, 4, 3)]), (1j, [(1, 1, 5, 3)])])
def test_shifted_collection_is_full(c, F):
    # realized pairs near the horizon are settled by continuing the periodic tail
    model = numeric_model(RatMap.polynomial([c, 0, 1]))
    assert is_full(F, model) is True
    assert is_full([(1, 1, 5, 2)], numeric_model(RatMap.polynomial([1j, 0, 1]))) is False
