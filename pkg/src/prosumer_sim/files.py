"""On-disk formats for runs, oracle solutions and comparisons."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .model import POPULATIONS, CommunityConfig, CostFunction, CostKind, CostPopulation

TRACE_COLUMNS = ["step", "thetaSolar", "thetaWind", "thetaConsumer",
                 "activeSolar", "activeWind", "activeConsumers", "totalCost"]


class FormatError(ValueError):
    pass


def fmt(v: float) -> str:
    return f"{v:.12g}"


def exact(v: float) -> str:
    return repr(float(v))


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def read_json(path: Path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def load_config(path) -> CommunityConfig:
    return CommunityConfig.loads(Path(path).read_text())


def write_trace(path: Path, trace) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in trace:
            w.writerow([r.step, fmt(r.thetas.solar), fmt(r.thetas.wind), fmt(r.thetas.consumer),
                        r.active_solar, r.active_wind, r.active_consumers, fmt(r.total_cost)])


def read_trace(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and list(rows[0]) != TRACE_COLUMNS:
        raise FormatError(f"{path}: unexpected columns {list(rows[0])}")
    return [{"step": int(r["step"]), "totalCost": float(r["totalCost"])} for r in rows]


def write_vectors(path: Path, value_name: str, vectors: dict, extra: dict | None = None) -> None:
    """One row per agent: population, index, value[, extra columns]."""
    extra = extra or {}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["population", "index", value_name, *extra])
        for kind in POPULATIONS:
            for i, v in enumerate(vectors[kind]):
                w.writerow([kind.value, i, exact(v), *(exact(extra[c][kind][i]) for c in extra)])


def read_vectors(path: Path, value_name: str) -> dict:
    out = {k: [] for k in POPULATIONS}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            try:
                kind = CostKind(row["population"])
                idx = int(row["index"])
                val = float(row[value_name])
            except (KeyError, ValueError) as exc:
                raise FormatError(f"{path}: bad row {row}") from exc
            if idx != len(out[kind]):
                raise FormatError(f"{path}: {kind.value} rows out of order at index {idx}")
            out[kind].append(val)
    return {k: np.array(v) for k, v in out.items()}


def write_costs(path: Path, costs: CostPopulation) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["population", "index", "lin", "quad", "quart", "const"])
        for kind in POPULATIONS:
            for i, c in enumerate(costs[kind]):
                w.writerow([kind.value, i, exact(c.lin), exact(c.quad), exact(c.quart), exact(c.const)])


def read_costs(path: Path) -> CostPopulation:
    out = {k: [] for k in POPULATIONS}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            kind = CostKind(row["population"])
            out[kind].append(CostFunction(kind, float(row["lin"]), float(row["quad"]),
                                          float(row["quart"]), float(row["const"])))
    return CostPopulation(*(tuple(out[k]) for k in POPULATIONS))
