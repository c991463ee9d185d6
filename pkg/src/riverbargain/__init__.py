"""Two-agent river sharing with a pollution penalty: bounds, clearing price, sweeps."""

from .model import (
    AgentParams,
    Allocation,
    DisagreementPoint,
    InvalidProblem,
    Problem,
    benefit,
    disagreement,
    penalty_water,
    utility_downstream,
    utility_upstream,
    validate,
)
from .solver import Agreement, Regime, TuBounds, alpha_lower, alpha_star, alpha_upper, solve, tu_bounds

__all__ = [
    "AgentParams", "Agreement", "Allocation", "DisagreementPoint", "InvalidProblem", "Problem",
    "Regime", "TuBounds", "alpha_lower", "alpha_star", "alpha_upper", "benefit", "disagreement",
    "penalty_water", "solve", "tu_bounds", "utility_downstream", "utility_upstream", "validate",
]
