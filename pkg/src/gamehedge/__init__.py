"""Exact upper and lower hedging prices of contingent claims in
discrete-time multinomial games, with independent LP and enumeration
cross-checks, closed-form binomial bounds, and an explicit solver for the
volatility-band PDE that the scaled games converge to."""

from .model import (
    BudgetError,
    Butterfly,
    Call,
    GameSpec,
    MoveSpace,
    PathDependent,
    Payoff,
    PiecewiseLinear,
    PriceResult,
    Put,
    Rational,
    RiskNeutralNode,
    Side,
    Sine,
    evaluate_payoff,
    negate_payoff,
    parse_rational,
    payoff_from_json,
    payoff_to_json,
    result_to_json,
    variances,
)
from .singlestep import lower_price_step, step_price, step_strategy, upper_price_step
from .induction import (
    LatticeLevel,
    PruneSchedule,
    extract_measure,
    levels_from_result,
    price_european,
    price_path_dependent,
    price_pruned,
)
from .lp import (
    InfeasibleError,
    LpProblem,
    UnboundedError,
    build_matrix,
    build_problem,
    dual_vertex_enumerate,
    lp_price,
    solve_min,
)
from .bounds import (
    binomial_lower_bound,
    binomial_price,
    binomial_upper_bound,
    convex_concave_bound,
    nested_compare,
    split_convex_concave,
)
from .pde import GridSolution, GridSpec, StabilityError, converge_vs_lattice, solve, value_at
from .verify import (
    FuzzLimits,
    FuzzSummary,
    MeasureAudit,
    VerificationReport,
    audit_measure,
    check_superreplication,
    fuzz_cross_routes,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "Butterfly",
    "Call",
    "FuzzLimits",
    "FuzzSummary",
    "GameSpec",
    "GridSolution",
    "GridSpec",
    "InfeasibleError",
    "LatticeLevel",
    "LpProblem",
    "MeasureAudit",
    "MoveSpace",
    "PathDependent",
    "Payoff",
    "PiecewiseLinear",
    "PriceResult",
    "PruneSchedule",
    "Put",
    "Rational",
    "RiskNeutralNode",
    "Side",
    "Sine",
    "StabilityError",
    "UnboundedError",
    "VerificationReport",
    "audit_measure",
    "binomial_lower_bound",
    "binomial_price",
    "binomial_upper_bound",
    "build_matrix",
    "build_problem",
    "check_superreplication",
    "converge_vs_lattice",
    "convex_concave_bound",
    "dual_vertex_enumerate",
    "evaluate_payoff",
    "extract_measure",
    "fuzz_cross_routes",
    "levels_from_result",
    "lower_price_step",
    "lp_price",
    "negate_payoff",
    "nested_compare",
    "parse_rational",
    "payoff_from_json",
    "payoff_to_json",
    "price_european",
    "price_path_dependent",
    "price_pruned",
    "result_to_json",
    "solve",
    "solve_min",
    "split_convex_concave",
    "step_price",
    "step_strategy",
    "upper_price_step",
    "value_at",
    "variances",
]
