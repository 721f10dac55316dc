"""Global numeric configuration.

Everything runs in binary64.  ``TRANSVERSAL_PRECISION`` is read so that an
extended-precision backend can be plugged in later; only ``double`` is
accepted for now.
"""

import os

import numpy as np

SUPPORTED_PRECISIONS = ("double",)

EPS = float(np.finfo(np.float64).eps)
COMPLEX = np.complex128


def precision():
    value = os.environ.get("TRANSVERSAL_PRECISION", "double").strip().lower() or "double"
    if value not in SUPPORTED_PRECISIONS:
        raise ValueError(
            f"TRANSVERSAL_PRECISION={value!r} is reserved; supported: {SUPPORTED_PRECISIONS}"
        )
    return value


# Default tolerances, all overridable per call.
ROOT_CLUSTER_TOL = 1e-6
COLLISION_TOL = 1e-9
SYMBOLIC_HORIZON = 64
NUMERIC_HORIZON = 200
RANK_GAP = 1e4
RANK_RTOL = 1e-8
# moduli beyond this count as the point at infinity when following orbits
INF_SNAP = 1e12
