"""Exit criteria. Each test records one PASS/FAIL line in the terminal summary."""

import numpy as np
import pytest

from prosumer_sim import presets
from prosumer_sim.analysis import fraction_within, mean_abs_gap, tail_mean_counts
from prosumer_sim.cli import main
from prosumer_sim.engine import run, run_agents
from prosumer_sim.model import (
    POPULATIONS,
    CommunityConfig,
    CostFunction,
    CostTable,
    cost_eval,
    sample_cost_population,
    update_running_average,
)
from prosumer_sim.oracle import optimal_cost, solve_full, solve_subproblem
from prosumer_sim.streams import AgentStream

from .oracles import grid_min_three

pytestmark = pytest.mark.acceptance


def test_1_oracle_kkt(paper_cfg, paper_costs, paper_solution, acceptance_report):
    eq = max(abs(paper_solution[k].sum() - paper_cfg.capacity(k)) for k in POPULATIONS)
    stat = 0.0
    for k in POPULATIONS:
        v = paper_solution[k]
        interior = (v > 0) & (v < 1)
        d = CostTable.from_costs(paper_costs[k]).deriv(v)[interior]
        stat = max(stat, float(np.max(np.abs(d - paper_solution.multiplier(k)))))
    v, _ = solve_subproblem([CostFunction.solar(1.2, 0.8)] * 100, 50.0)
    split = float(np.max(np.abs(v - 0.5)))
    ok = eq <= 1e-8 and stat <= 1e-6 and split <= 1e-9
    acceptance_report(1, "oracle KKT", ok, f"(eq {eq:.1e}, stationarity {stat:.1e}, split {split:.1e})")
    assert ok


def test_2_oracle_vs_grid_search(acceptance_report):
    cfg = presets.tiny()
    costs = sample_cost_population(cfg)
    sol = solve_full(costs, cfg)
    brute = sum(grid_min_three(costs[k], cfg.capacity(k), 1e-3)[0] for k in POPULATIONS)
    ours = optimal_cost(sol, costs)
    gap = abs(ours - brute)
    acceptance_report(2, "oracle vs grid search", gap <= 1e-4, f"(|diff| {gap:.1e})")
    assert gap <= 1e-4


def test_3_convergence(paper_run, paper_solution, acceptance_report):
    gaps = {k: mean_abs_gap(paper_run.final[k], paper_solution[k]) for k in POPULATIONS}
    fracs = {k: fraction_within(paper_run.final[k], paper_solution[k], 0.1) for k in POPULATIONS}
    ok = all(g <= 0.05 for g in gaps.values()) and all(f >= 0.8 for f in fracs.values())
    detail = ", ".join(f"{k.value} gap {gaps[k]:.4f} within {fracs[k]:.2f}" for k in POPULATIONS)
    acceptance_report(3, "convergence to optimum", ok, f"({detail})")
    assert ok


def test_4_cost_ratio(paper_run, paper_solution, paper_costs, acceptance_report):
    ratio = paper_run.trace[-1].total_cost / optimal_cost(paper_solution, paper_costs)
    ok = 0.97 <= ratio <= 1.05
    acceptance_report(4, "final cost ratio", ok, f"({ratio:.5f})")
    assert ok


def test_5_aggregate_tracking(paper_run, paper_cfg, acceptance_report):
    s, w, c = tail_mean_counts(paper_run.active_counts, 0.25)
    cs, cw = paper_cfg.cap_solar, paper_cfg.cap_wind
    ok = abs(s - cs) <= 2 and abs(w - cw) <= 2 and abs(c - (cs + cw)) <= 3
    acceptance_report(5, "aggregate tracking", ok, f"(solar {s:.2f}, wind {w:.2f}, consumers {c:.2f})")
    assert ok


def test_6_running_average(acceptance_report):
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(1000):
        bits = rng.integers(0, 2, 1000)
        avg, n = float(bits[0]), 1
        for b in bits[1:]:
            avg = update_running_average(avg, n, int(b))
            n += 1
        worst = max(worst, abs(avg - bits.sum() / bits.size))
    ok = worst <= 2**-40
    acceptance_report(6, "running average recurrence", ok, f"(max err {worst:.1e})")
    assert ok


def test_7_determinism(tmp_path, acceptance_report):
    cfg_path = tmp_path / "paper.json"
    main(["gen-config", "--preset", "paper", "--out", str(cfg_path)])
    for name in ("a", "b"):
        assert main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / name)]) == 0
    same_trace = (tmp_path / "a" / "trace.csv").read_bytes() == (tmp_path / "b" / "trace.csv").read_bytes()

    cfg = CommunityConfig(n_solar=10, n_wind=8, n_consumers=16, cap_solar=5.0, cap_wind=6.0,
                          horizon=400, seed=11)
    base = run(cfg, keep_bits=True)
    same_bits = True
    for order_seed in (1, 2):
        shuffled = run_agents(cfg, order_seed=order_seed)
        same_bits &= all(np.array_equal(base.bits[k], shuffled.bits[k]) for k in POPULATIONS)
    ok = same_trace and same_bits
    acceptance_report(7, "determinism", ok, f"(trace identical: {same_trace}, order-free bits: {same_bits})")
    assert ok


def test_8_bernoulli_frequency(acceptance_report):
    stream = AgentStream(2023, POPULATIONS[0], 0)
    freq = float(np.mean(stream.uniforms(np.arange(1, 100_001)) < 0.3))
    ok = abs(freq - 0.3) <= 0.01
    acceptance_report(8, "Bernoulli sanity", ok, f"(freq {freq:.4f})")
    assert ok


def test_9_signal_and_probability_bounds(paper_run, paper_cfg, acceptance_report):
    runs = [paper_run, run(presets.tiny()),
            run_agents(CommunityConfig(n_solar=4, n_wind=4, n_consumers=8, cap_solar=2.0,
                                       cap_wind=2.0, horizon=300, seed=5), order_seed=3)]
    ok = True
    for res in runs:
        th = np.array([r.thetas.as_array() for r in res.trace])
        cfg = res.config
        ok &= bool(th.min() >= cfg.theta_min and th.max() <= cfg.theta_max)
        ok &= 0.0 <= res.prob_min and res.prob_max <= 1.0
    acceptance_report(9, "signal and probability bounds", ok, f"({len(runs)} runs checked)")
    assert ok
