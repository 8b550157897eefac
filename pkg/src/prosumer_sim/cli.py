"""Command line: ``simulate``, ``solve``, ``compare`` and ``gen-config``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import analysis, files
from .agents import NumericError
from .engine import run
from .model import POPULATIONS, CommunityConfig, ConfigError, sample_cost_population
from .oracle import ConvergenceError, InfeasibleError, optimal_cost, solve_full
from .presets import PRESETS

log = logging.getLogger("prosumer_sim")

EXIT_USAGE = 2
EXIT_NUMERIC = 3


class CommandError(Exception):
    def __init__(self, kind: str, message: str, code: int = EXIT_USAGE, **extra):
        super().__init__(message)
        self.kind, self.code, self.extra = kind, code, extra


def _load(path) -> CommunityConfig:
    try:
        return files.load_config(path)
    except FileNotFoundError as exc:
        raise CommandError("FileNotFound", f"config file not found: {path}", path=str(path)) from exc


def _apply_overrides(cfg: CommunityConfig, args) -> CommunityConfig:
    changes = {}
    for flag, name in (("seed", "seed"), ("steps", "horizon"), ("record_every", "record_every"),
                       ("gain_solar", "gain_solar"), ("gain_wind", "gain_wind"),
                       ("gain_consumer", "gain_consumer")):
        v = getattr(args, flag, None)
        if v is not None:
            changes[name] = v
    return cfg.replace(**changes) if changes else cfg


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    cfg = _apply_overrides(_load(args.config), args).validate()
    costs = sample_cost_population(cfg)
    log.info("simulating %d steps (seed %d)", cfg.horizon, cfg.seed)
    res = run(cfg, costs)
    out = _outdir(args.out)
    files.write_trace(out / "trace.csv", res.trace)
    files.write_vectors(out / "final_averages.csv", "average", res.final)
    files.write_costs(out / "costs.csv", costs)
    thetas = np.array([r.thetas.as_array() for r in res.trace])
    files.write_json(out / "run_meta.json", {
        "config": cfg.to_dict(),
        "steps": cfg.horizon,
        "records": len(res.trace),
        "broadcasts": res.n_broadcasts,
        "probabilityRange": [res.prob_min, res.prob_max],
        "thetaRange": [float(thetas.min()), float(thetas.max())],
        "finalTotalCost": res.trace[-1].total_cost,
    })
    return 0


def cmd_solve(args) -> int:
    cfg = _load(args.config).validate()
    costs = sample_cost_population(cfg)
    sol = solve_full(costs, cfg)
    out = _outdir(args.out)
    marginals = {k: costs.tables()[k].deriv(sol[k]) for k in POPULATIONS}
    files.write_vectors(out / "solution.csv", "value", {k: sol[k] for k in POPULATIONS},
                        extra={"marginal": marginals})
    files.write_costs(out / "costs.csv", costs)
    files.write_json(out / "solution_meta.json", {
        "config": cfg.to_dict(),
        "lambdaSolar": sol.lambda_solar,
        "lambdaWind": sol.lambda_wind,
        "lambdaConsumer": sol.lambda_consumer,
        "kktResidual": sol.kkt_residual,
        "optimalCost": optimal_cost(sol, costs),
    })
    return 0


def _read_allocation(d: Path) -> dict:
    if (d / "final_averages.csv").exists():
        return files.read_vectors(d / "final_averages.csv", "average")
    if (d / "solution.csv").exists():
        return files.read_vectors(d / "solution.csv", "value")
    raise CommandError("FileNotFound", f"{d} holds neither final_averages.csv nor solution.csv", path=str(d))


def _read_costs(d: Path):
    try:
        return files.read_costs(d / "costs.csv")
    except FileNotFoundError as exc:
        raise CommandError("FileNotFound", f"missing {d / 'costs.csv'}", path=str(d / "costs.csv")) from exc


def cmd_compare(args) -> int:
    run_dir, solve_dir = Path(args.run), Path(args.solve)
    final = _read_allocation(run_dir)
    if not (solve_dir / "solution.csv").exists():
        raise CommandError("FileNotFound", f"missing {solve_dir / 'solution.csv'}", path=str(solve_dir))
    star = files.read_vectors(solve_dir / "solution.csv", "value")
    run_costs, costs = _read_costs(run_dir), _read_costs(solve_dir)
    for kind in POPULATIONS:
        if len(final[kind]) != len(star[kind]) or len(costs[kind]) != len(star[kind]):
            raise CommandError("PopulationMismatch",
                               f"{kind.value}: run has {len(final[kind])} agents, solution has {len(star[kind])}")
        if run_costs[kind] != costs[kind]:
            raise CommandError("PopulationMismatch", f"{kind.value}: cost coefficients differ between run and solve")
    tables = costs.tables()
    opt = sum(float(np.sum(tables[k].value(star[k]))) for k in POPULATIONS)
    achieved = sum(float(np.sum(tables[k].value(final[k]))) for k in POPULATIONS)
    out = _outdir(args.out)
    gaps = {k: np.abs(final[k] - star[k]) for k in POPULATIONS}
    files.write_vectors(out / "compare.csv", "final", final,
                        extra={"optimal": star, "absGap": gaps})
    width = args.bin_width
    with open(out / "histogram.csv", "w") as fh:
        fh.write("population,binLo,binHi,count\n")
        for kind in POPULATIONS:
            for lo, hi, c in analysis.abs_gap_histogram(final[kind], star[kind], width).rows():
                fh.write(f"{kind.value},{files.fmt(lo)},{files.fmt(hi)},{c}\n")
    trace_path = run_dir / "trace.csv"
    if trace_path.exists():
        trace = files.read_trace(trace_path)
        with open(out / "cost_ratio.csv", "w") as fh:
            fh.write("step,ratio\n")
            for row in trace:
                fh.write(f"{row['step']},{files.fmt(row['totalCost'] / opt)}\n")
    files.write_json(out / "metrics.json", {
        "meanAbsGap": {k.value: analysis.mean_abs_gap(final[k], star[k]) for k in POPULATIONS},
        "fractionWithin0.1": {k.value: analysis.fraction_within(final[k], star[k], 0.1) for k in POPULATIONS},
        "derivativeDispersion": {k.value: analysis.derivative_dispersion(final[k], tables[k]) for k in POPULATIONS},
        "optimalCost": opt,
        "finalTotalCost": achieved,
        "finalCostRatio": achieved / opt,
        "histogramBinWidth": width,
    })
    return 0


def cmd_gen_config(args) -> int:
    cfg = PRESETS[args.preset]().validate()
    text = cfg.dumps()
    CommunityConfig.loads(text).validate()
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prosumer-sim", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run the feedback simulation")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--steps", type=int)
    s.add_argument("--record-every", type=int)
    s.add_argument("--gain-solar", type=float)
    s.add_argument("--gain-wind", type=float)
    s.add_argument("--gain-consumer", type=float)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("solve", help="solve the centralized problem")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("compare", help="compare a run against a solution")
    s.add_argument("--run", required=True)
    s.add_argument("--solve", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--bin-width", type=float, default=0.01)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("gen-config", help="write a preset config")
    s.add_argument("--preset", required=True, choices=sorted(PRESETS))
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_gen_config)
    return p


def _fail(kind: str, message: str, code: int, **extra) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, **extra}) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CommandError as exc:
        return _fail(exc.kind, str(exc), exc.code, **exc.extra)
    except (ConfigError, InfeasibleError, files.FormatError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_USAGE)
    except FileNotFoundError as exc:
        return _fail("FileNotFound", str(exc), EXIT_USAGE, path=exc.filename)
    except (NumericError, ConvergenceError, FloatingPointError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_NUMERIC, step=getattr(exc, "step", None))


if __name__ == "__main__":
    sys.exit(main())
