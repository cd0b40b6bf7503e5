"""Binary market trees under proportional transaction costs.

Computes the critical transaction cost, decides which measures induce
consistent price systems, constructs explicit shadow-price processes, and
cross-checks everything against closed forms, bounds and an independent
linear-programming arbitrage detector.
"""

from .arbitrage import (
    CrossCheck,
    Strategy,
    find_arbitrage,
    ftap_cross_check,
    replay_strategy,
)
from .bounds import (
    GammaLadder,
    SemiHomogeneousSpec,
    closed_form_lambda_c,
    gamma_ladder,
    lower_bound_lambda_star,
    one_step_greedy_measure,
    one_step_lambda_c,
    q_star,
    upper_bound_semi_homogeneous,
)
from .cps import CpsProcess, CpsViolation, construct_cps, verify_cps
from .errors import (
    CpsConstructionError,
    DomainError,
    GridCapError,
    LpSizeError,
    ShapeError,
)
from .measures import Measure, d_infinity, equivalent_to_P, grid_measures
from .rho import Diagnostics, RhoTables, compute_rho, delta, diagnostics, rho_score
from .solver import (
    LambdaCReport,
    MembershipResult,
    SolverConfig,
    brute_force_sup_rho,
    characterize_m_lambda_c,
    m_lambda_membership,
    solve_lambda_c,
)
from .tree import (
    DriftParametrization,
    MarketTree,
    NodePath,
    Violation,
    emm_q0,
    frictionless_no_arbitrage,
    from_drift,
    market_from_config,
    spot_price,
    validate_market,
)

__version__ = "0.1.0"

__all__ = [
    "CpsConstructionError",
    "CpsProcess",
    "CpsViolation",
    "CrossCheck",
    "Diagnostics",
    "DomainError",
    "DriftParametrization",
    "GammaLadder",
    "GridCapError",
    "LambdaCReport",
    "LpSizeError",
    "MarketTree",
    "Measure",
    "MembershipResult",
    "NodePath",
    "RhoTables",
    "SemiHomogeneousSpec",
    "ShapeError",
    "SolverConfig",
    "Strategy",
    "Violation",
    "brute_force_sup_rho",
    "characterize_m_lambda_c",
    "closed_form_lambda_c",
    "compute_rho",
    "construct_cps",
    "d_infinity",
    "delta",
    "diagnostics",
    "emm_q0",
    "equivalent_to_P",
    "find_arbitrage",
    "frictionless_no_arbitrage",
    "from_drift",
    "ftap_cross_check",
    "gamma_ladder",
    "grid_measures",
    "lower_bound_lambda_star",
    "m_lambda_membership",
    "market_from_config",
    "one_step_greedy_measure",
    "one_step_lambda_c",
    "q_star",
    "replay_strategy",
    "rho_score",
    "solve_lambda_c",
    "spot_price",
    "upper_bound_semi_homogeneous",
    "validate_market",
    "verify_cps",
]
