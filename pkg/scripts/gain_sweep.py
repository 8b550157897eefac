"""Sweep feedback gains and seeds on the paper preset; print convergence metrics.

    python scripts/gain_sweep.py --gains 0.01 0.05 0.1 0.2 --seeds 1 2 3
"""

import argparse

from prosumer_sim import presets, sample_cost_population, solve_full
from prosumer_sim.analysis import fraction_within, mean_abs_gap, tail_mean_counts
from prosumer_sim.engine import run
from prosumer_sim.model import POPULATIONS
from prosumer_sim.oracle import optimal_cost


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--gains", type=float, nargs="+", default=[0.01, 0.05, 0.1, 0.2])
    ap.add_argument("--seeds", type=int, nargs="+", default=[2023, 1, 2])
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--theta-max", type=float, default=10.0)
    args = ap.parse_args()

    print("gain   seed   gap_s   gap_w   gap_c   min_frac  ratio    tail_s  tail_w  tail_c")
    for gain in args.gains:
        for seed in args.seeds:
            cfg = presets.paper().replace(gain_solar=gain, gain_wind=gain, gain_consumer=gain,
                                          seed=seed, horizon=args.steps, theta_max=args.theta_max)
            costs = sample_cost_population(cfg)
            sol = solve_full(costs, cfg)
            res = run(cfg, costs)
            gaps = [mean_abs_gap(res.final[k], sol[k]) for k in POPULATIONS]
            frac = min(fraction_within(res.final[k], sol[k], 0.1) for k in POPULATIONS)
            ratio = res.trace[-1].total_cost / optimal_cost(sol, costs)
            tail = tail_mean_counts(res.active_counts)
            print(f"{gain:<6} {seed:<6} " + " ".join(f"{g:.4f}" for g in gaps)
                  + f"  {frac:.2f}      {ratio:.5f}  " + " ".join(f"{t:6.2f}" for t in tail))


if __name__ == "__main__":
    main()
