"""
Critical points, orbits and the critical value map
==================================================

A rational map is a pair of coefficient vectors.  Its critical points are
found from the Wronskian num'*den - num*den', and infinity is handled as an
ordinary point of the sphere.
"""

import numpy as np

from transversal import RatMap, critical_set, g_map_jacobian, orbit, rank_by_gap

# z^2 - 2: the critical point 0 lands on the fixed point 2 after two steps
f = RatMap.polynomial([-2, 0, 1])
crit = critical_set(f)
print("critical points", crit.points, "multiplicities", crit.multiplicities)
print("orbit of 0     ", np.round(np.array(orbit(f, 0, 5)), 12))

# z + 1/z has two finite critical points, +1 and -1
g = RatMap.from_coeffs([1, 0, 1], [0, 1])
print("z + 1/z critical points", np.round(critical_set(g).points, 12))

# Near a map with simple critical points, the critical values are local
# coordinates on the space of maps modulo conjugation: the Jacobian of
# g -> (critical values) has rank 2d - 2 in the coefficient chart.
for name, h in [("z^2-2", f), ("z+1/z", g), ("z^3-3z", RatMap.polynomial([0, -3, 0, 1]))]:
    J = g_map_jacobian(h)
    rr = rank_by_gap(J)
    print(f"{name:8s} rank {rr.rank} of {2 * h.degree - 2}, singular values {np.round(rr.singular_values, 3)}")
