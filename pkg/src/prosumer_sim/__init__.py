"""Feedback-driven regulation of solar/wind prosumers and consumers in an energy community."""

from .model import (
    AgentState,
    CommunityConfig,
    ConfigError,
    CostFunction,
    CostKind,
    CostPopulation,
    FeedbackSignals,
    cost_deriv,
    cost_eval,
    sample_cost_population,
    update_running_average,
)
from .engine import SimulationResult, StepRecord, run
from .oracle import OracleSolution, optimal_cost, solve_full, solve_subproblem

__all__ = [
    "AgentState",
    "CommunityConfig",
    "ConfigError",
    "CostFunction",
    "CostKind",
    "CostPopulation",
    "FeedbackSignals",
    "OracleSolution",
    "SimulationResult",
    "StepRecord",
    "cost_deriv",
    "cost_eval",
    "optimal_cost",
    "run",
    "sample_cost_population",
    "solve_full",
    "solve_subproblem",
    "update_running_average",
]
