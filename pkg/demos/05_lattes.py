"""
The flexible Lattes exception
=============================

Doubling on the Legendre curve y^2 = x(x-1)(x-a) gives a degree four map of
the x-sphere.  All critical points reach infinity in two steps.  The family
moves with a and keeps every relation, so the relation Jacobian must drop
rank.  Its kernel produces a quadratic differential fixed by push-forward.
"""

import numpy as np

from transversal import degeneracy_demo, flexible_lattes

L = flexible_lattes(2 + 0.5j)
print("degree", L.map.degree, "critical points", np.round(L.crit.points, 4))
print("multiplier at infinity", L.multiplier_at_infinity)

for a in (2, 2 + 0.5j, -1 + 1j):
    rep = degeneracy_demo(a)
    print(f"a = {a}: rank {rep.rank} of N = {rep.N}")
    print("   relations", [str(r) for r in rep.collection])
    print(f"   kernel q has {len(rep.qdiff.poles)} poles, invariance residual {rep.invariance_residual:.1e}")
    print(f"   moments {max(abs(m) for m in rep.moments):.1e}, d/da direction residual {rep.flex_residual:.1e}")
