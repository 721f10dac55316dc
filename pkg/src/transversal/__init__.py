"""Transversality of critical relations for rational maps of the sphere.

The usual path: build a map, find its critical relations, pick a proper
collection and certify the rank of the relation Jacobian::

    from transversal import RatMap, numeric_model, build_proper, certify
    f = RatMap.polynomial([1j, 0, 1])          # z^2 + i
    F = build_proper(numeric_model(f))
    certify(f, F.relations).certified          # True
"""

__version__ = "0.1.0"

from .algebra import INF, Moebius, Poly, is_inf, poly_roots
from .errors import *  # noqa: F401,F403
from .lattes import LattesMap, degeneracy_demo, flexible_lattes
from .linalg import RankResult, rank_by_gap
from .qdiff import (
    QuadDiff,
    infinity_moments,
    invariance_residual,
    pushforward_eval,
    q_relation,
    q_relation_reduced,
    qd_eval,
    sample_points,
)
from .ratmap import (
    Chart,
    CriticalSet,
    RatMap,
    critical_set,
    family_chart,
    g_map_jacobian,
    iterate_derivative,
    mobius_directions,
    orbit,
    poly_chart,
    rat_chart,
    tangent_basis_polmu,
    tangent_basis_ratmu,
)
from .relations import (
    CriticalRelation,
    NumericModel,
    RelationCollection,
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
from .transversality import (
    JacobianReport,
    certify,
    deficit_identity_check,
    fd_relation_derivative,
    jacobian,
    kernel_qdiff,
    kernel_vector,
    polynomial_chart_certify,
    rank_full_collection_independence,
    rank_sigma_independence,
    relation_component_derivative,
    relation_gradient,
    repelling_variant,
)
