"""Post-run metrics: gap histograms, cost ratios and convergence diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import CostTable

INTERIOR_EPS = 1e-3


@dataclass(frozen=True)
class Histogram:
    bin_width: float
    counts: np.ndarray  # counts[i] covers [i*bin_width, (i+1)*bin_width)

    def edges(self) -> np.ndarray:
        return self.bin_width * np.arange(len(self.counts) + 1)

    def rows(self):
        for i, c in enumerate(self.counts):
            yield i * self.bin_width, (i + 1) * self.bin_width, int(c)


def abs_gap_histogram(final, star, bin_width: float = 0.01) -> Histogram:
    final, star = np.asarray(final, float), np.asarray(star, float)
    if final.shape != star.shape:
        raise ValueError(f"length mismatch: {final.shape} vs {star.shape}")
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    idx = np.floor(np.abs(final - star) / bin_width).astype(np.int64)
    return Histogram(bin_width, np.bincount(idx, minlength=1))


def mean_abs_gap(final, star) -> float:
    final, star = np.asarray(final, float), np.asarray(star, float)
    if final.shape != star.shape:
        raise ValueError(f"length mismatch: {final.shape} vs {star.shape}")
    return float(np.mean(np.abs(final - star)))


def fraction_within(final, star, tol: float) -> float:
    return float(np.mean(np.abs(np.asarray(final) - np.asarray(star)) <= tol))


def cost_ratio_series(trace, oracle_cost: float) -> list[tuple[int, float]]:
    if not oracle_cost > 0:
        raise ValueError("oracle cost must be positive")
    return [(rec.step, rec.total_cost / oracle_cost) for rec in trace]


def derivative_dispersion(final, costs, eps: float = INTERIOR_EPS) -> float:
    """Spread of marginal costs over agents strictly inside the box.

    At the optimum every interior agent's marginal cost equals the common
    multiplier, so this goes to 0 as a run converges.
    """
    table = costs if isinstance(costs, CostTable) else CostTable.from_costs(costs)
    final = np.asarray(final, float)
    interior = (final > eps) & (final < 1 - eps)
    if not interior.any():
        return 0.0
    return float(np.std(table.deriv(final)[interior]))


def tail_mean_counts(active_counts: np.ndarray, fraction: float = 0.25) -> np.ndarray:
    """Time-average of the per-step active counts over the last ``fraction`` of steps."""
    n = active_counts.shape[0] - 1  # row 0 is the initialization step
    start = active_counts.shape[0] - max(1, int(round(fraction * n)))
    return active_counts[start:].mean(axis=0)
