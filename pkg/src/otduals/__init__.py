"""Exact discrete optimal transport with full dual-optimizer characterization.

Solves finite transport problems in rational arithmetic, describes the whole
set of optimal dual potentials through the component structure of optimal
supports, computes the vanishing-regularization limit of the entropic duals
by a spanning-tree construction, and uses these pieces to find equilibria of
continuum-agent congestion games with and without a principal.
"""

from .entropic import (
    CentroidTree,
    ConvergenceError,
    EntropicSolution,
    NumericalRangeError,
    build_centroid_tree,
    centroid,
    centroid_parts,
    entropy,
    sinkhorn,
)
from .games import (
    AdmissibleSet,
    Equilibrium,
    GameSpec,
    PowerCongestion,
    PrincipalObjective,
    TableCongestion,
    agent_cost,
    best_response,
    check_cne,
    energy,
    energy_gradient,
    minimize_over_simplex,
    ot_subdifferential_element,
    solve_cne,
    solve_scne_k_independent,
    toeplitz_interaction,
)
from .graphs import (
    ComponentPartition,
    NotOptimalError,
    SupportGraph,
    component_dual,
    connected_components,
    connected_ordering,
    support_graph,
    union_graph,
)
from .measures import (
    CostMatrix,
    DimensionMismatchError,
    DiscreteMeasure,
    DualPair,
    InfeasibleInstanceError,
    TransportPlan,
    as_scalar,
    c_transform,
    is_complementary,
    scalar_str,
    transport_cost,
)
from .polytope import (
    AlphaConstraint,
    ConstraintViolationError,
    DualPolytope,
    assemble_dual,
    characterize_duals,
    is_dual_optimizer,
    is_dual_unique,
    recover_alpha,
    strict_interior_test,
)
from .simplex import TransportSolution, solve_dual, solve_primal, solve_transport

__version__ = "0.1.0"

__all__ = [
    "AdmissibleSet",
    "AlphaConstraint",
    "CentroidTree",
    "ComponentPartition",
    "ConstraintViolationError",
    "ConvergenceError",
    "CostMatrix",
    "DimensionMismatchError",
    "DiscreteMeasure",
    "DualPair",
    "DualPolytope",
    "Equilibrium",
    "EntropicSolution",
    "GameSpec",
    "InfeasibleInstanceError",
    "NotOptimalError",
    "NumericalRangeError",
    "PowerCongestion",
    "PrincipalObjective",
    "SupportGraph",
    "TableCongestion",
    "TransportPlan",
    "TransportSolution",
    "agent_cost",
    "as_scalar",
    "assemble_dual",
    "best_response",
    "build_centroid_tree",
    "c_transform",
    "centroid",
    "centroid_parts",
    "characterize_duals",
    "check_cne",
    "component_dual",
    "connected_components",
    "connected_ordering",
    "energy",
    "energy_gradient",
    "entropy",
    "is_complementary",
    "is_dual_optimizer",
    "is_dual_unique",
    "minimize_over_simplex",
    "ot_subdifferential_element",
    "recover_alpha",
    "scalar_str",
    "sinkhorn",
    "solve_cne",
    "solve_dual",
    "solve_primal",
    "solve_scne_k_independent",
    "solve_transport",
    "strict_interior_test",
    "support_graph",
    "toeplitz_interaction",
    "transport_cost",
    "union_graph",
]
