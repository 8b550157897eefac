"""Community manager: turns aggregate activity into the three feedback signals."""

from __future__ import annotations

import math

from .model import CommunityConfig, FeedbackSignals


def _clamp(v, lo, hi):
    return min(max(v, lo), hi)


def _step(theta, gain, k, error, cfg):
    return _clamp(theta - gain / (k + 1) * error, cfg.theta_min, cfg.theta_max)


def update_theta_solar(theta: float, k: int, active_solar: int, cfg: CommunityConfig) -> float:
    return _step(theta, cfg.gain_solar, k, active_solar - cfg.cap_solar, cfg)


def update_theta_wind(theta: float, k: int, active_wind: int, cfg: CommunityConfig) -> float:
    return _step(theta, cfg.gain_wind, k, active_wind - cfg.cap_wind, cfg)


def update_theta_consumer(theta: float, k: int, active_consumers: int, active_solar: int,
                          active_wind: int, cfg: CommunityConfig) -> float:
    # Consumers track the prosumption realized this step, not a fixed capacity.
    return _step(theta, cfg.gain_consumer, k, active_consumers - active_solar - active_wind, cfg)


def broadcast(signals: FeedbackSignals) -> FeedbackSignals:
    """Freeze ``signals`` into the snapshot every agent reads at the next step."""
    values = (signals.solar, signals.wind, signals.consumer)
    if not all(math.isfinite(v) for v in values):
        raise FloatingPointError(f"non-finite feedback signal {signals}")
    return FeedbackSignals(*(float(v) for v in values))


class CommunityManager:
    """Holds the current snapshot and counts broadcasts."""

    def __init__(self, cfg: CommunityConfig):
        self.cfg = cfg
        t0 = _clamp(cfg.theta_init, cfg.theta_min, cfg.theta_max)
        self.signals = broadcast(FeedbackSignals(t0, t0, t0))
        self.n_broadcasts = 0

    def observe(self, k: int, active_solar: int, active_wind: int, active_consumers: int) -> FeedbackSignals:
        s = self.signals
        nxt = FeedbackSignals(
            update_theta_solar(s.solar, k, active_solar, self.cfg),
            update_theta_wind(s.wind, k, active_wind, self.cfg),
            update_theta_consumer(s.consumer, k, active_consumers, active_solar, active_wind, self.cfg),
        )
        self.signals = broadcast(nxt)
        self.n_broadcasts += 1
        return self.signals
