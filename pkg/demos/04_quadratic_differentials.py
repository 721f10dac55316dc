"""
Quadratic differentials and the push-forward
=============================================

Each relation carries a rational quadratic differential with simple poles
along the two critical orbits.  The push-forward sums over preimages, and a
differential fixed by it would obstruct transversality.
"""

from transversal import (
    QuadDiff,
    RatMap,
    infinity_moments,
    invariance_residual,
    pushforward_eval,
    q_relation,
    q_relation_reduced,
    qd_eval,
    sample_points,
)

f = RatMap.polynomial([-2, 0, 1])
q = q_relation(f, (1, 1, 3, 2))
print("poles and residues:", q.terms)

# The last terms of the two sums cancel once the relation holds.
r = q_relation_reduced(f, (1, 1, 3, 2))
z = 0.7 + 1.3j
print("full", qd_eval(q, z), "reduced", qd_eval(r, z))

# f_* applied pointwise; any callable is accepted, e.g. 1/z^2 under z^2
sq = RatMap.polynomial([0, 0, 1])
print("f_*(1/z^2) at 2:", pushforward_eval(sq, lambda w: 1 / w**2, 2.0), "expected", 1 / 8)

# For a transversal map the relation differential is far from invariant.
pts = sample_points(q.poles)
print("invariance residual", invariance_residual(f, q, pts))
print("moments at infinity", infinity_moments(q))
print("1/(z-1) - 1/(z+1) moments", infinity_moments(QuadDiff.from_terms([(1, 1), (-1, -1)])))
