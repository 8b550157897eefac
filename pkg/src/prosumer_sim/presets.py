"""Named starting configurations."""

from .model import CoefRange, CommunityConfig, CostKind, DEFAULT_RANGES


def paper() -> CommunityConfig:
    # 100 solar, 80 wind, 160 consumers; capacities 50 and 60; all signals start at 0.35.
    return CommunityConfig(
        n_solar=100, n_wind=80, n_consumers=160,
        cap_solar=50.0, cap_wind=60.0,
        theta_init=0.35, horizon=20000, seed=2023,
    )


def tiny() -> CommunityConfig:
    return CommunityConfig(
        n_solar=3, n_wind=3, n_consumers=3,
        cap_solar=1.5, cap_wind=1.5,
        horizon=2000, seed=7,
    )


def symmetric() -> CommunityConfig:
    ranges = dict(DEFAULT_RANGES)
    ranges[CostKind.SOLAR] = CoefRange((1.0, 1.0), (1.0, 1.0), (0.0, 0.0))
    ranges[CostKind.WIND] = CoefRange((1.0, 1.0), (0.0, 0.0), (1.0, 1.0))
    ranges[CostKind.CONSUMER] = CoefRange((1.0, 1.0), (1.0, 1.0), (0.5, 0.5))
    return paper().replace(coef_ranges=ranges)


PRESETS = {"paper": paper, "tiny": tiny, "symmetric": symmetric}
