"""Sparse tensor factorization for distributed computing of polynomial demands.

The demand tensor ``F`` (users x exponent grids) is split into tiles, each
tile is factorized through the SVD of its mode-1 unfolding, and the pieces are
placed into a decoding matrix ``D`` and an encoding tensor ``E`` with
``F = E x_1 D``.  Every server (column of ``D``) then respects the
computation, communication and multiplication limits of the system.
"""

from .costs import power_cost
from .demand import (
    BasisFunction,
    BasisSuite,
    ProblemSpec,
    build_demand_tensor,
    build_monomial_tensor,
    evaluate_demands_direct,
    normalized_constraints,
    validate_admissibility,
)
from .factorizer import (
    Factorization,
    baseline_server_count,
    build_factorization,
    extract_assignments,
    factorize,
    linearize,
    verify_constraints,
    verify_reconstruction,
)
from .mlsvd import mlsvd, mode1_factorize, mode_n_rank, numerical_rank
from .protocol import decode, encode, simulate
from .tiling import (
    apply_ownership,
    bound_constructive,
    bound_general,
    bound_simplified,
    class_cardinalities,
    design_tiles,
    worst_case_plan,
)

__version__ = "0.1.0"
