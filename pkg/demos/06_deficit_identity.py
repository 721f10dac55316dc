"""
Q minus its push-forward
========================

Normalize so that infinity is a non-critical fixed point.  Then the defect
Q - f_*Q of a relation differential is a sum of simple poles at the critical
values.  Its residues are the partial derivatives of the relation in
critical value coordinates.  Both sides are computed independently here.
"""

import numpy as np

from transversal import RatMap, deficit_identity_check

for c, rel in ((-2, (1, 1, 3, 2)), (1j, (1, 1, 4, 2))):
    chk = deficit_identity_check(RatMap.polynomial([c, 0, 1]), rel, n_samples=10)
    print(f"z^2 + {c}, relation {rel}: normalized at the fixed point {chk.normalized.fixed_point}")
    for x, l, r in list(zip(chk.samples, chk.lhs, chk.rhs))[:3]:
        print(f"   x = {np.round(x, 3)}: Q - f_*Q = {np.round(l, 8)}, sum = {np.round(r, 8)}")
    print(f"   max mismatch over {len(chk.samples)} samples {chk.mismatch:.1e}")
