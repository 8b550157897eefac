"""Centralized reference solver for the community cost-minimization problem.

The objective is separable and, once the consumer total is pinned to
``cap_solar + cap_wind``, so are the constraints. Each population is then a
capacity-allocation problem

    min sum_i c_i(v_i)  s.t.  sum_i v_i = C,  0 <= v_i <= 1

solved by bisection on the multiplier ``lam``: every agent sits where its
marginal cost equals ``lam`` (clipped to the box), and ``lam`` is moved until
the allocations add up to ``C``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import POPULATIONS, CommunityConfig, CostKind, CostPopulation, CostTable

OUTER_TOL = 1e-8
INNER_TOL = 1e-10
OUTER_MAX_ITER = 200
INNER_MAX_ITER = 100


class InfeasibleError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, msg, bracket):
        super().__init__(f"{msg}; bracket={bracket}")
        self.bracket = bracket


@dataclass(frozen=True)
class OracleSolution:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    lambda_solar: float
    lambda_wind: float
    lambda_consumer: float
    kkt_residual: float

    def __getitem__(self, kind: CostKind) -> np.ndarray:
        return {CostKind.SOLAR: self.x, CostKind.WIND: self.y, CostKind.CONSUMER: self.z}[kind]

    def multiplier(self, kind: CostKind) -> float:
        return getattr(self, f"lambda_{kind.value}")


def _marginal_inverse(table: CostTable, lam: float) -> np.ndarray:
    """Per-agent point in [0, 1] where the marginal cost reaches ``lam``.

    Marginal costs are nondecreasing cubics, so a safeguarded Newton
    iteration (bisection fallback inside the running bracket) converges.
    Agents with a flat marginal cost equal to ``lam`` land on 1; the caller
    redistributes slack among them.
    """
    d0 = table.deriv(0.0) * np.ones(len(table))
    d1 = table.deriv(1.0) * np.ones(len(table))
    v = np.where(d1 <= lam, 1.0, 0.0)
    inner = (d0 < lam) & (d1 > lam)
    if not inner.any():
        return v
    sub = CostTable(table.lin[inner], table.quad[inner], table.quart[inner], table.const[inner])
    lo = np.zeros(inner.sum())
    hi = np.ones(inner.sum())
    t = np.full(inner.sum(), 0.5)
    for _ in range(INNER_MAX_ITER):
        g = sub.deriv(t) - lam
        lo = np.where(g < 0, t, lo)
        hi = np.where(g > 0, t, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = t - g / sub.second_deriv(t)
        ok = (newton >= lo) & (newton <= hi) & np.isfinite(newton)
        t_new = np.where(g == 0, t, np.where(ok, newton, 0.5 * (lo + hi)))
        step = np.max(np.abs(t_new - t))
        t = t_new
        if step <= INNER_TOL:
            break
    else:
        raise ConvergenceError(f"marginal-cost root at lam={lam} did not converge",
                               (float(lo.min()), float(hi.max())))
    v[inner] = t
    return v


def solve_subproblem(costs, capacity: float) -> tuple[np.ndarray, float]:
    """Allocate ``capacity`` across agents with box [0, 1] at least total cost.

    ``costs`` is a sequence of cost functions or a ``CostTable``. Returns the
    allocation and the multiplier of the sum constraint.
    """
    table = costs if isinstance(costs, CostTable) else CostTable.from_costs(costs)
    n = len(table)
    if n == 0:
        raise InfeasibleError("empty population")
    if capacity < 0 or capacity > n + OUTER_TOL:
        raise InfeasibleError(f"capacity {capacity} outside [0, {n}]")
    d0 = table.deriv(0.0) * np.ones(n)
    d1 = table.deriv(1.0) * np.ones(n)
    lo, hi = float(d0.min()), float(d1.max())
    if capacity >= n:
        return np.ones(n), hi
    if capacity == 0:
        return np.zeros(n), lo

    def total(lam):
        return float(np.sum(_marginal_inverse(table, lam)))

    lam = 0.5 * (lo + hi)
    for _ in range(OUTER_MAX_ITER):
        lam = 0.5 * (lo + hi)
        s = total(lam)
        if abs(s - capacity) <= 1e-13 * max(1.0, capacity):
            break
        if s < capacity:
            lo = lam
        else:
            hi = lam
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(lam)):
            break
    v = _marginal_inverse(table, lam)
    slack = capacity - float(np.sum(v))
    if abs(slack) > OUTER_TOL:
        # Flat marginal costs at lam: any split among them is optimal.
        flat = (d0 == d1) & np.isclose(d0, lam, rtol=0, atol=1e-9)
        if flat.any():
            v[flat] = np.clip(v[flat] + slack / flat.sum(), 0.0, 1.0)
            slack = capacity - float(np.sum(v))
    if abs(slack) > OUTER_TOL:
        raise ConvergenceError(f"allocation misses capacity by {slack:.3e}", (lo, hi))
    return v, float(lam)


def kkt_residual(table: CostTable, v: np.ndarray, lam: float, capacity: float) -> float:
    d = table.deriv(v)
    interior = (v > 0) & (v < 1)
    parts = [abs(float(np.sum(v)) - capacity)]
    if interior.any():
        parts.append(float(np.max(np.abs(d[interior] - lam))))
    at0 = v <= 0
    if at0.any():
        parts.append(float(np.max(np.maximum(0.0, lam - d[at0]))))
    at1 = v >= 1
    if at1.any():
        parts.append(float(np.max(np.maximum(0.0, d[at1] - lam))))
    return max(parts)


def solve_full(costs: CostPopulation, cfg: CommunityConfig) -> OracleSolution:
    tables = costs.tables()
    sols = {}
    residual = 0.0
    for kind in POPULATIONS:
        if len(costs[kind]) != cfg.size(kind):
            raise InfeasibleError(f"{kind.value} population size {len(costs[kind])} != {cfg.size(kind)}")
        cap = cfg.capacity(kind)
        v, lam = solve_subproblem(tables[kind], cap)
        sols[kind] = (v, lam)
        residual = max(residual, kkt_residual(tables[kind], v, lam, cap))
    return OracleSolution(
        x=sols[CostKind.SOLAR][0],
        y=sols[CostKind.WIND][0],
        z=sols[CostKind.CONSUMER][0],
        lambda_solar=sols[CostKind.SOLAR][1],
        lambda_wind=sols[CostKind.WIND][1],
        lambda_consumer=sols[CostKind.CONSUMER][1],
        kkt_residual=residual,
    )


def optimal_cost(sol: OracleSolution, costs: CostPopulation) -> float:
    tables = costs.tables()
    return float(sum(np.sum(tables[k].value(sol[k])) for k in POPULATIONS))
