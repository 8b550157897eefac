import numpy as np
import pytest

from prosumer_sim import presets
from prosumer_sim.engine import RecordPolicy, SimulationError, record_policy, run, run_agents
from prosumer_sim.model import (
    POPULATIONS,
    CoefRange,
    CommunityConfig,
    CostFunction,
    CostKind,
    CostPopulation,
    sample_cost_population,
)


def small_cfg(**kw):
    base = CommunityConfig(n_solar=6, n_wind=5, n_consumers=12, cap_solar=3.0, cap_wind=2.5,
                           horizon=300, seed=42)
    return base.replace(**kw)


def test_always_active_agent():
    ranges = {CostKind.SOLAR: CoefRange((1, 1), (1, 1), (0, 0)),
              CostKind.WIND: CoefRange((1, 1), (0, 0), (1, 1)),
              CostKind.CONSUMER: CoefRange((1, 1), (1, 1), (0, 0))}
    cfg = CommunityConfig(n_solar=1, n_wind=1, n_consumers=1, cap_solar=0.5, cap_wind=0.5,
                          gain_solar=0.0, gain_wind=0.0, gain_consumer=0.0,
                          theta_init=8.0, horizon=200, coef_ranges=ranges)
    res = run(cfg, keep_averages=True)
    assert np.all(res.averages[CostKind.SOLAR] == 1.0)
    assert all(r.thetas.solar == 8.0 for r in res.trace)


def test_executes_horizon_and_broadcasts():
    res = run(small_cfg())
    assert res.active_counts.shape == (301, 3)
    assert [r.step for r in res.trace] == list(range(301))
    assert res.n_broadcasts == 300
    assert res.trace[0].active_solar == 6 and res.trace[0].active_consumers == 12


def test_determinism():
    a, b = run(small_cfg(), keep_bits=True), run(small_cfg(), keep_bits=True)
    assert a.trace == b.trace
    for k in POPULATIONS:
        assert np.array_equal(a.bits[k], b.bits[k])
        assert np.array_equal(a.final[k], b.final[k])
    c = run(small_cfg(seed=43))
    assert c.trace != a.trace


def test_reference_loop_matches_vectorized():
    cfg = small_cfg(horizon=150)
    fast = run(cfg, keep_bits=True)
    slow = run_agents(cfg, order_seed=5)
    assert fast.trace == slow.trace
    for k in POPULATIONS:
        assert np.array_equal(fast.bits[k], slow.bits[k])
        assert np.array_equal(fast.final[k], slow.final[k])


def test_aggregate_consistency_and_settling():
    res = run(small_cfg(), keep_bits=True, keep_averages=True)
    for i, kind in enumerate(POPULATIONS):
        assert np.array_equal(res.bits[kind].sum(axis=1), res.active_counts[:, i])
        avg = res.averages[kind]
        assert np.all((avg > 0) & (avg <= 1))
        steps = np.arange(avg.shape[0])
        jumps = np.abs(np.diff(avg, axis=0)).max(axis=1)
        assert np.all(jumps <= 1 / (steps[1:] + 1) + 1e-15)
        # averages equal the direct mean of the bit history
        direct = np.cumsum(res.bits[kind], axis=0) / (steps[:, None] + 1)
        assert np.array_equal(avg, direct)


def test_record_policy():
    assert record_policy(1) == RecordPolicy(1)
    with pytest.raises(ValueError):
        record_policy(0)
    cfg = small_cfg(horizon=100)
    assert len(run(cfg.replace(record_every=1)).trace) == 101
    assert [r.step for r in run(cfg.replace(record_every=101)).trace] == [0, 100]
    assert len(run(cfg.replace(record_every=10)).trace) == 11
    assert [r.step for r in run(cfg.replace(record_every=30)).trace] == [0, 30, 60, 90, 100]


def test_thinning_keeps_recorded_steps_identical():
    full = run(small_cfg())
    thin = run(small_cfg(record_every=7))
    by_step = {r.step: r for r in full.trace}
    assert all(by_step[r.step] == r for r in thin.trace)


def test_horizon_prefix_property():
    # Nothing in a step depends on the horizon, so a shorter run is a prefix.
    long, short = run(small_cfg(), keep_bits=True), run(small_cfg(horizon=120), keep_bits=True)
    assert long.trace[:121] == short.trace
    for k in POPULATIONS:
        assert np.array_equal(long.bits[k][:121], short.bits[k])


def test_numeric_error_reports_step():
    cfg = small_cfg(horizon=5)
    costs = sample_cost_population(cfg)
    # Bypass validation to plant a consumer whose marginal cost vanishes.
    bad = object.__new__(CostFunction)
    for name, val in (("kind", CostKind.CONSUMER), ("lin", 0.0), ("quad", 0.0), ("quart", 0.0), ("const", 0.0)):
        object.__setattr__(bad, name, val)
    broken = CostPopulation(costs.solar, costs.wind, (bad,) + costs.consumer[1:])
    with pytest.raises(SimulationError) as info:
        run(cfg, broken)
    assert info.value.step == 1


def test_population_size_mismatch():
    cfg = small_cfg()
    costs = sample_cost_population(cfg.replace(n_solar=5, cap_solar=2.0))
    with pytest.raises(ValueError):
        run(cfg, costs)


@pytest.mark.slow
def test_paper_preset_averages_stay_in_unit_interval(paper_run):
    for kind in POPULATIONS:
        assert np.all((paper_run.final[kind] > 0) & (paper_run.final[kind] <= 1))
    assert len(paper_run.trace) == paper_run.config.horizon + 1
    assert 0.0 <= paper_run.prob_min and paper_run.prob_max <= 1.0


@pytest.mark.slow
def test_paper_preset_mean_field_tracking(paper_run, paper_cfg):
    tail = paper_run.active_counts[-(paper_cfg.horizon // 4):].mean(axis=0)
    assert abs(tail[0] - 50) <= 2
    assert abs(tail[1] - 60) <= 2
    assert abs(tail[2] - 110) <= 3
