"""
Transversality of critical relations
====================================

For z^2 + t the relation f^3(0) = f^2(0) holds at t = -2.  Its derivative in
t is the single entry of the relation Jacobian.  A non-zero entry means the
relation locus is a smooth point crossed transversally.
"""

import numpy as np

from transversal import (
    Moebius,
    RatMap,
    certify,
    family_chart,
    fd_relation_derivative,
    polynomial_chart_certify,
    rank_sigma_independence,
    relation_component_derivative,
    repelling_variant,
)

f = RatMap.polynomial([-2, 0, 1])
chart = family_chart(f, dnum=[1], name="z^2+t")
cert = certify(f, [(1, 1, 3, 2)], chart)
print("z^2-2   entry", cert.report.matrix[0, 0], "certified", cert.certified)

g = RatMap.polynomial([1j, 0, 1])
print("z^2+i   entry", certify(g, [(1, 1, 4, 2)], family_chart(g, dnum=[1])).report.matrix[0, 0])

# the closed form agrees with a finite difference of the iterated orbit
v = chart.directions[0]
print("closed form", relation_component_derivative(f, (1, 1, 3, 2), v),
      "finite difference", fd_relation_derivative(f, (1, 1, 3, 2), v))

# Writing the relation as "f^2(0) equals the repelling fixed point p(t)"
# gives a different, equally non-zero derivative.
print("repelling variant", repelling_variant(f, [(1, 2, 2, 1)], chart).matrix[0, 0])

# At t = 0 the relation f^2(0) = f(0) has zero derivative.  The fix is to
# record the relation as f(0) = c, a landing on the critical point itself.
h = RatMap.polynomial([0, 0, 1])
w = family_chart(h, dnum=[1]).directions[0]
print("t = 0: ", relation_component_derivative(h, (1, 1, 2, 1), w), relation_component_derivative(h, (1, 1, 1, 0), w))

# The rank does not depend on the coordinate used to compare orbit points.
sig = [Moebius.identity(), Moebius(1, 1, 0, 1), Moebius(2, 0, 1, 3)]
print("ranks under sigma", rank_sigma_independence(f, [(1, 1, 3, 2)], sig, chart).ranks)

# The full rational chart for z^2 - 2 conjugates infinity away first.  Along
# the three conjugation flows the relation map is constant.
full = certify(f, [(1, 1, 3, 2)], "rat")
print("rat chart: rank", full.rank, "of", full.tangent_dim, "directions, conjugation residual",
      f"{full.mobius_residual:.1e}")

# Chebyshev z^3 - 3z: two critical points, two relations, rank two.
rep = polynomial_chart_certify(RatMap.polynomial([0, -3, 0, 1]), [(1, 1, 2, 1), (2, 2, 2, 1)])
print("z^3-3z rank", rep.certified_rank, "singular values", np.round(rep.singular_values, 4))
