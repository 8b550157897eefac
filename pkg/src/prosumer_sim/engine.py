"""Simulation loop: initialization, per-step draws, aggregation and trace recording.

Step 0 is the forced-active initialization (every bit and average is 1).
At each step ``k >= 1`` every agent draws against the step-``k`` signal
snapshot; the manager then folds the step-``k`` counts into the signals
used at step ``k + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .agents import AgentKind, NumericError, agent_step, response_probabilities, response_probability
from .manager import CommunityManager
from .model import (
    POPULATIONS,
    AgentState,
    CommunityConfig,
    CostKind,
    CostPopulation,
    CostTable,
    FeedbackSignals,
    sample_cost_population,
)
from .streams import AgentStream, agent_keys, uniforms


class SimulationError(NumericError):
    def __init__(self, step: int, cause: Exception):
        super().__init__(f"step {step}: {cause}")
        self.step = step


@dataclass(frozen=True)
class RecordPolicy:
    every: int = 1

    def keeps(self, step: int, horizon: int) -> bool:
        return step % self.every == 0 or step == horizon


def record_policy(every: int) -> RecordPolicy:
    if every < 1:
        raise ValueError("record interval must be >= 1")
    return RecordPolicy(every)


@dataclass(frozen=True)
class StepRecord:
    step: int
    thetas: FeedbackSignals
    active_solar: int
    active_wind: int
    active_consumers: int
    total_cost: float


@dataclass
class SimulationResult:
    config: CommunityConfig
    costs: CostPopulation
    final: dict  # CostKind -> averages after the last step
    trace: list
    active_counts: np.ndarray  # (horizon + 1, 3), every step regardless of thinning
    prob_min: float
    prob_max: float
    n_broadcasts: int
    bits: dict | None = None  # CostKind -> (horizon + 1, n) uint8
    averages: dict | None = None  # CostKind -> (n_records, n), rows aligned with trace

    @property
    def x(self):
        return self.final[CostKind.SOLAR]

    @property
    def y(self):
        return self.final[CostKind.WIND]

    @property
    def z(self):
        return self.final[CostKind.CONSUMER]


def total_cost(tables: dict, averages: dict) -> float:
    return float(sum(np.sum(tables[k].value(averages[k])) for k in POPULATIONS))


def _concat_tables(tables: dict) -> CostTable:
    return CostTable(*(np.concatenate([getattr(tables[k], f) for k in POPULATIONS])
                       for f in ("lin", "quad", "quart", "const")))


def run(cfg: CommunityConfig, costs: CostPopulation | None = None, *,
        keep_bits: bool = False, keep_averages: bool = False) -> SimulationResult:
    """Simulate ``cfg.horizon`` steps after initialization.

    ``costs`` defaults to the population sampled from ``cfg``. Zero gains are
    accepted here (frozen-signal experiments) though the CLI rejects them.
    """
    cfg.validate(allow_zero_gains=True)
    if costs is None:
        costs = sample_cost_population(cfg)
    sizes = [cfg.size(k) for k in POPULATIONS]
    for kind, n in zip(POPULATIONS, sizes):
        if len(costs[kind]) != n:
            raise ValueError(f"{kind.value} population has {len(costs[kind])} costs, config says {n}")
    bounds = np.cumsum([0] + sizes)
    slices = {k: slice(bounds[i], bounds[i + 1]) for i, k in enumerate(POPULATIONS)}
    tables = costs.tables()
    table = _concat_tables(tables)
    kind_idx = np.repeat(np.arange(3), sizes)
    keys = np.concatenate([agent_keys(cfg.seed, k, cfg.size(k)) for k in POPULATIONS])
    policy = record_policy(cfg.record_every)
    K = cfg.horizon

    counts = np.ones(bounds[-1], dtype=np.int64)
    manager = CommunityManager(cfg)
    trace = []
    active = np.zeros((K + 1, 3), dtype=np.int64)
    bits_hist = np.zeros((K + 1, bounds[-1]), dtype=np.uint8) if keep_bits else None
    avg_rows = [] if keep_averages else None
    pmin, pmax = np.inf, -np.inf

    def record(k, signals, avg, totals):
        per_kind = {kind: avg[slices[kind]] for kind in POPULATIONS}
        trace.append(StepRecord(k, signals, int(totals[0]), int(totals[1]), int(totals[2]),
                                total_cost(tables, per_kind)))
        if avg_rows is not None:
            avg_rows.append(avg.copy())

    avg = counts / 1.0
    active[0] = sizes
    if bits_hist is not None:
        bits_hist[0] = 1
    record(0, manager.signals, avg, active[0])
    if K >= 1:
        manager.observe(0, *active[0])

    for k in range(1, K + 1):
        signals = manager.signals
        theta = signals.as_array()[kind_idx]
        try:
            p = response_probabilities(avg, theta, table.deriv(avg))
        except NumericError as exc:
            raise SimulationError(k, exc) from exc
        pmin = min(pmin, float(p.min()))
        pmax = max(pmax, float(p.max()))
        bit = uniforms(keys, k) < p
        counts += bit
        avg = counts / (k + 1)
        totals = np.add.reduceat(bit.astype(np.int64), bounds[:-1])
        active[k] = totals
        if bits_hist is not None:
            bits_hist[k] = bit
        if policy.keeps(k, K):
            record(k, signals, avg, totals)
        if k < K:
            manager.observe(k, *totals)

    return SimulationResult(
        config=cfg,
        costs=costs,
        final={kind: avg[slices[kind]].copy() for kind in POPULATIONS},
        trace=trace,
        active_counts=active,
        prob_min=pmin if K else 1.0,
        prob_max=pmax if K else 1.0,
        n_broadcasts=manager.n_broadcasts,
        bits={kind: bits_hist[:, slices[kind]] for kind in POPULATIONS} if keep_bits else None,
        averages={kind: np.array(avg_rows)[:, slices[kind]] for kind in POPULATIONS} if keep_averages else None,
    )


def run_agents(cfg: CommunityConfig, costs: CostPopulation | None = None, *,
               order_seed: int | None = None) -> SimulationResult:
    """Per-agent reference loop built on ``agent_step``.

    Slow; meant for small populations. With ``order_seed`` the agents are
    visited in a fresh random order at every step. Bits are always kept.
    """
    cfg.validate(allow_zero_gains=True)
    if costs is None:
        costs = sample_cost_population(cfg)
    tables = costs.tables()
    agents = [(AgentKind(kind), i, costs[kind][i], AgentStream(cfg.seed, kind, i))
              for kind in POPULATIONS for i in range(cfg.size(kind))]
    states = [AgentState() for _ in agents]
    order_rng = np.random.default_rng(order_seed) if order_seed is not None else None
    K = cfg.horizon
    policy = record_policy(cfg.record_every)
    manager = CommunityManager(cfg)
    bits = np.zeros((K + 1, len(agents)), dtype=np.uint8)
    bits[0] = 1
    active = np.zeros((K + 1, 3), dtype=np.int64)
    trace = []
    pmin, pmax = np.inf, -np.inf

    def averages():
        out = {kind: [] for kind in POPULATIONS}
        for (kind, _, _, _), st in zip(agents, states):
            out[kind.cost_kind].append(st.avg)
        return {k: np.array(v) for k, v in out.items()}

    def tally():
        t = [0, 0, 0]
        for (kind, _, _, _), st in zip(agents, states):
            t[POPULATIONS.index(kind.cost_kind)] += st.activity
        return t

    for k in range(K + 1):
        signals = manager.signals
        if k > 0:
            order = order_rng.permutation(len(agents)) if order_rng is not None else range(len(agents))
            nxt = list(states)
            for j in order:
                kind, _, cost, stream = agents[j]
                try:
                    p = response_probability(states[j].avg, signals[kind.cost_kind], cost)
                    nxt[j] = agent_step(states[j], kind, signals, cost, stream, k)
                except NumericError as exc:
                    raise SimulationError(k, exc) from exc
                pmin, pmax = min(pmin, p), max(pmax, p)
            states = nxt
            bits[k] = [st.activity for st in states]
        totals = tally()
        active[k] = totals
        if policy.keeps(k, K):
            trace.append(StepRecord(k, signals, *totals, total_cost(tables, averages())))
        if k < K:
            manager.observe(k, *totals)

    offs = np.cumsum([0] + [cfg.size(k) for k in POPULATIONS])
    return SimulationResult(
        config=cfg,
        costs=costs,
        final=averages(),
        trace=trace,
        active_counts=active,
        prob_min=pmin if K else 1.0,
        prob_max=pmax if K else 1.0,
        n_broadcasts=manager.n_broadcasts,
        bits={kind: bits[:, offs[i]:offs[i + 1]] for i, kind in enumerate(POPULATIONS)},
    )
