"""Acceptance criteria, one test each.

Every test prints a single PASS/FAIL line with the measured quantity before
asserting, so ``pytest -s`` or the captured log shows the numbers.
"""

import time

import numpy as np
import pytest

from transversal import (
    Moebius,
    RatMap,
    build_proper,
    certify,
    critical_set,
    deficit_identity_check,
    detect_relations,
    family_chart,
    fd_relation_derivative,
    fig1_model,
    flexible_lattes,
    g_map_jacobian,
    infinity_moments,
    invariance_residual,
    is_full,
    is_minimally_full,
    kernel_qdiff,
    numeric_model,
    q_relation,
    q_relation_reduced,
    qd_eval,
    rank_by_gap,
    rank_full_collection_independence,
    rank_sigma_independence,
    relation_component_derivative,
    repelling_variant,
    sample_points,
    zeta,
)
from transversal.errors import PreconditionError
from transversal.transversality import tangent

LATTES_A = [2, 2 + 0.5j, -1 + 1j]


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail

    return emit


def t_chart(f):
    return family_chart(f, dnum=[1], name="z^2+t")


def quadratic(c):
    return RatMap.polynomial([c, 0, 1])


# 1 ---------------------------------------------------------------------------

def _gmap_fixtures():
    return {
        "z+1/z": RatMap.from_coeffs([1, 0, 1], [0, 1]),
        "z^2-2": quadratic(-2),
        "z^3-3z": RatMap.polynomial([0, -3, 0, 1]),
        "lattes a=2": flexible_lattes(2).map,
    }


def test_criterion_1_critical_value_map_rank(report):
    lines, ok = [], True
    for name, f in _gmap_fixtures().items():
        t0 = time.perf_counter()
        J = g_map_jacobian(f)
        rr = rank_by_gap(J)
        dt = time.perf_counter() - t0
        want = 2 * f.degree - 2
        good = rr.certified and rr.rank == want and rr.gap >= 1e4 and dt < 1.0
        ok &= good
        lines.append(f"{name} rank {rr.rank}/{want} gap {rr.gap:.1e} {dt:.3f}s")
    report(1, ok, "; ".join(lines))


# 2 ---------------------------------------------------------------------------

FIG1_EXPECTED = [(2, 1, 1, 2), (3, 1, 4, 1), (4, 6, 3, 0), (5, 4, 4, 3), (8, 7, 4, 1), (9, 8, 1, 1)]
ALTERNATIVE = [(2, 1, 1, 2), (3, 1, 4, 1), (4, 6, 3, 0), (5, 6, 4, 0), (9, 7, 4, 1), (9, 8, 1, 1)]
SHIFTED = [(2, 1, 2, 3), (3, 1, 5, 2), (4, 6, 3, 0), (5, 6, 4, 0), (9, 7, 4, 1), (9, 8, 2, 2)]


def test_criterion_2_fig1(report):
    model = fig1_model()
    F = build_proper(model)
    got = [tuple(r) for r in F]
    z = zeta(model)
    c2 = is_minimally_full(ALTERNATIVE, model)
    c3 = is_minimally_full(SHIFTED, model)
    ok = z == 3 and got == FIG1_EXPECTED and F.proper is True and c2 is True and c3 is True
    report(2, ok, f"zeta {z}, build_proper {got}, alternative {c2}, shifted {c3}")


# 3 ---------------------------------------------------------------------------

def test_criterion_3_entries(report):
    t0 = time.perf_counter()
    f1, f2 = quadratic(-2), quadratic(1j)
    c1 = certify(f1, [(1, 1, 3, 2)], t_chart(f1))
    c2 = certify(f2, [(1, 1, 4, 2)], t_chart(f2))
    rv = repelling_variant(f1, [(1, 2, 2, 1)], t_chart(f1))
    dt = time.perf_counter() - t0
    e1, e2, e3 = c1.report.matrix[0, 0], c2.report.matrix[0, 0], rv.matrix[0, 0]
    err = max(abs(e1 + 8), abs(e2 - (-4 + 8j)), abs(e3 + 8 / 3))
    ok = c1.certified and c2.certified and c1.rank == c2.rank == 1 and rv.certified_rank == 1
    ok = ok and err <= 1e-6 and dt < 1.0
    report(3, ok, f"entries {e1:.10g}, {e2:.10g}, repelling {e3:.10g}; max error {err:.1e}; {dt:.3f}s")


# 4 ---------------------------------------------------------------------------

def test_criterion_4_degenerate_example(report):
    f = RatMap.polynomial([0, 0, 1])
    v = t_chart(f).directions[0]
    d_bad = relation_component_derivative(f, (1, 1, 2, 1), v)
    d_fix = relation_component_derivative(f, (1, 1, 1, 0), v)
    ok = abs(d_bad) <= 1e-10 and abs(d_fix - 1) <= 1e-10
    report(4, ok, f"d/dt[f_t^2(0) - f_t(0)] = {d_bad:.3g}, d/dt[f_t(0) - 0] = {d_fix:.12g}")


# 5 ---------------------------------------------------------------------------

def test_criterion_5_full_collections(report):
    cases = [(-2, [(1, 1, 3, 2)], [(1, 1, 4, 3)]), (1j, [(1, 1, 4, 2)], [(1, 1, 5, 3)])]
    lines, ok = [], True
    for c, F1, F2 in cases:
        f = quadratic(c)
        model = numeric_model(f)
        full = is_full(F1, model) is True and is_full(F2, model) is True
        cmp = rank_full_collection_independence(f, F1, F2, "rat")
        ok &= full and cmp.agree
        lines.append(f"z^2+({c}) full {full} ranks {cmp.ranks}")
    report(5, ok, "; ".join(lines))


# 6 ---------------------------------------------------------------------------

def _random_sigmas(rng, k, values):
    out = []
    while len(out) < k:
        a, b, c, d = rng.normal(size=4) + 1j * rng.normal(size=4)
        if abs(a * d - b * c) < 0.1:
            continue
        if all(abs(c * v + d) > 0.1 * (1 + abs(v)) for v in values):
            out.append(Moebius(a, b, c, d))
    return out


def test_criterion_6_sigma_independence(report):
    rng = np.random.default_rng(2017)
    cases = [(quadratic(-2), [(1, 1, 3, 2)], [2.0]), (quadratic(1j), [(1, 1, 4, 2)], [-1j])]
    lines, ok = [], True
    for f, F, values in cases:
        sig = _random_sigmas(rng, 5, values)
        cmp = rank_sigma_independence(f, F, sig, t_chart(f))
        base = certify(f, F, t_chart(f)).rank
        ok &= cmp.agree and len(cmp.ranks) == 5 and cmp.ranks[0] == base
        lines.append(f"ranks {cmp.ranks} vs {base}")
    report(6, ok, "; ".join(lines))


def test_criterion_6_rejects_inadmissible_sigma():
    f = quadratic(-2)
    with pytest.raises(PreconditionError):
        rank_sigma_independence(f, [(1, 1, 3, 2)], [Moebius(2, 0, 1, -2)], t_chart(f))


# 7 ---------------------------------------------------------------------------

@pytest.mark.parametrize("a", LATTES_A, ids=str)
def test_criterion_7_lattes(report, a):
    t0 = time.perf_counter()
    L = flexible_lattes(a, tol=1e-8)
    model = numeric_model(L.map, polynomial=False, crit=L.crit, H=40)
    F = build_proper(model)
    cert = certify(L.map, F.relations, "rat", crit=L.crit)
    q = kernel_qdiff(cert.report, cert.kernel)
    g = cert.report.tangent.map
    samples = sample_points(list(q.poles), 24, 0)
    res = invariance_residual(g, q, samples)
    mom = max(abs(m) for m in infinity_moments(q))
    dt = time.perf_counter() - t0
    ok = cert.rank < cert.N and not q.is_zero() and res <= 1e-5 and mom <= 1e-6 and dt < 10
    report(7, ok, f"a={a}: rank {cert.rank} < N {cert.N}, residual {res:.1e} over {len(samples)} samples, "
                  f"moments {mom:.1e}, {dt:.2f}s")


# 8 ---------------------------------------------------------------------------

def _realized_fixture_relations():
    for name, f in (("z^2-2", quadratic(-2)), ("z^2+i", quadratic(1j)), ("z^3-3z", RatMap.polynomial([0, -3, 0, 1]))):
        crit = critical_set(f).finite()
        for r in detect_relations(numeric_model(f)):
            yield name, f, crit, r
    L = flexible_lattes(2)
    rels = [r for r in detect_relations(numeric_model(L.map, polynomial=False, crit=L.crit, H=40))]
    tg = tangent(L.map, rels, "rat", L.crit)
    for r in rels:
        yield "lattes a=2", tg.map, tg.crit, r


def test_criterion_8_reduced_form(report):
    worst, count = 0.0, 0
    for name, f, crit, r in _realized_fixture_relations():
        if r.m < 1 or r.n < 1:
            continue
        a, b = q_relation(f, r, crit), q_relation_reduced(f, r, crit)
        zs = sample_points(list(a.poles) + list(b.poles), 10, seed=count)
        va = np.array([qd_eval(a, z) for z in zs])
        vb = np.array([qd_eval(b, z) for z in zs])
        scale = np.max(np.abs(va))
        err = float(np.max(np.abs(va - vb)) / scale) if scale > 0 else float(np.max(np.abs(vb)))
        worst = max(worst, err)
        count += 1
    report(8, worst <= 1e-8 and count > 0, f"{count} realized relations, worst relative difference {worst:.1e}")


# 9 ---------------------------------------------------------------------------

def test_criterion_9_deficit_identity(report):
    lines, ok = [], True
    for c, rel in ((-2, (1, 1, 3, 2)), (1j, (1, 1, 4, 2))):
        chk = deficit_identity_check(quadratic(c), rel, n_samples=10)
        ok &= chk.mismatch <= 1e-5 and len(chk.samples) == 10
        lines.append(f"z^2+({c}) {rel}: mismatch {chk.mismatch:.1e}")
    report(9, ok, "; ".join(lines))


# 10 --------------------------------------------------------------------------

def _derivative_fixtures():
    out = [
        (quadratic(-2), None, (1, 1, 3, 2)),
        (quadratic(1j), None, (1, 1, 4, 2)),
        (RatMap.polynomial([0, -3, 0, 1]), None, (1, 1, 2, 1)),
        (RatMap.polynomial([0, -3, 0, 1]), None, (2, 2, 2, 1)),
    ]
    L = flexible_lattes(2 + 0.5j)
    F = build_proper(numeric_model(L.map, polynomial=False, crit=L.crit, H=40)).relations
    tg = tangent(L.map, F, "rat", L.crit)
    out += [(tg.map, tg.crit, r) for r in F if r.m > 1 or r.n > 1]
    return out


def test_criterion_10_closed_form_vs_differences(report):
    rng = np.random.default_rng(50)
    fx = _derivative_fixtures()
    worst, n = 0.0, 50
    for k in range(n):
        f, crit, rel = fx[k % len(fx)]
        crit = critical_set(f).finite() if crit is None else crit
        v = rng.normal(size=2 * f.degree + 2) + 1j * rng.normal(size=2 * f.degree + 2)
        v /= np.linalg.norm(v)
        a = relation_component_derivative(f, rel, v, crit)
        b = fd_relation_derivative(f, rel, v, crit)
        worst = max(worst, abs(a - b) / abs(a))
    report(10, worst <= 1e-7, f"{n} random (fixture, direction) pairs over {len(fx)} fixtures, "
                              f"worst relative difference {worst:.1e}")
