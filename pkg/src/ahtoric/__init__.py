"""Verifier and generator for toric-degeneration certificates showing that
secant varieties of Veronese threefolds have the expected dimension."""

from .certificates import (
    Certificate,
    Unit,
    UnitKind,
    VerificationReport,
    block_contribution,
    check_identities,
    classify_all_k,
    expected_dimension,
    verify_certificate,
)
from .configs import (
    block_certificate,
    build_certificate,
    even_base_config,
    load_certificate,
    odd_config,
    odd_layer_config,
    recursive_config,
)
from .degeneration import (
    Cell,
    CellKind,
    Subdivision,
    build_block,
    build_layer,
    build_standard_subdivision,
    check_regularity,
)
from .geometry import ConvexLatticePolytope, HalfSpace, disjoint, hull, lattice_points
from .oracle import RankProblem, ah_sweep, interpolation_rank, limit_projection_check
from .packing import BudgetExhausted, PackingProblem, Unsat, enumerate_candidate_units, max_contribution, solve

__version__ = "0.1.0"

__all__ = [
    "BudgetExhausted",
    "Cell",
    "CellKind",
    "Certificate",
    "ConvexLatticePolytope",
    "HalfSpace",
    "PackingProblem",
    "RankProblem",
    "Subdivision",
    "Unit",
    "UnitKind",
    "Unsat",
    "VerificationReport",
    "ah_sweep",
    "block_certificate",
    "block_contribution",
    "build_block",
    "build_certificate",
    "build_layer",
    "build_standard_subdivision",
    "check_identities",
    "check_regularity",
    "classify_all_k",
    "disjoint",
    "enumerate_candidate_units",
    "even_base_config",
    "expected_dimension",
    "hull",
    "interpolation_rank",
    "lattice_points",
    "limit_projection_check",
    "load_certificate",
    "max_contribution",
    "odd_config",
    "odd_layer_config",
    "recursive_config",
    "solve",
    "verify_certificate",
]
