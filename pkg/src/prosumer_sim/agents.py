"""Per-agent decision rule: response probability, Bernoulli draw, average update."""

from __future__ import annotations

import enum

import numpy as np

from .model import AgentState, CostFunction, CostKind, FeedbackSignals, cost_deriv, update_running_average
from .streams import AgentStream


class NumericError(ArithmeticError):
    pass


class AgentKind(enum.Enum):
    SOLAR_PROSUMER = CostKind.SOLAR
    WIND_PROSUMER = CostKind.WIND
    CONSUMER = CostKind.CONSUMER

    @property
    def cost_kind(self) -> CostKind:
        return self.value


def response_probability(avg: float, theta: float, cost: CostFunction) -> float:
    """Activation probability ``theta * avg / cost'(avg)``, clipped to [0, 1]."""
    d = cost_deriv(cost, avg)
    if not d > 0:
        raise NumericError(f"cost derivative {d!r} at avg={avg!r} is not positive")
    return min(max(theta * avg / d, 0.0), 1.0)


def response_probabilities(avg: np.ndarray, theta: np.ndarray, deriv: np.ndarray) -> np.ndarray:
    bad = ~(deriv > 0)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise NumericError(f"cost derivative {deriv[i]!r} at avg={avg[i]!r} (agent {i}) is not positive")
    return np.clip(theta * avg / deriv, 0.0, 1.0)


def agent_step(state: AgentState, kind: AgentKind, signals: FeedbackSignals, cost: CostFunction,
               stream: AgentStream, step: int) -> AgentState:
    """Advance one agent by one step using the broadcast ``signals`` snapshot.

    ``step`` is the counter of the draw in the agent's private stream.
    """
    p = response_probability(state.avg, signals[kind.cost_kind], cost)
    bit = int(stream.uniform(step) < p)
    return AgentState(
        activity=bit,
        avg=update_running_average(state.avg, state.steps_seen, bit),
        steps_seen=state.steps_seen + 1,
    )
