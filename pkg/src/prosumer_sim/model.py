"""Domain types: polynomial cost families, agent state and community configuration."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, fields, replace
from typing import Any

import numpy as np


class ConfigError(ValueError):
    """Invalid community configuration or cost specification."""


class CostKind(str, enum.Enum):
    SOLAR = "solar"
    WIND = "wind"
    CONSUMER = "consumer"


POPULATIONS = (CostKind.SOLAR, CostKind.WIND, CostKind.CONSUMER)


@dataclass(frozen=True)
class CostFunction:
    """Convex increasing cost ``lin*v + quad*v**2 + quart*v**4 + const`` on [0, 1].

    Use the ``solar``/``wind``/``consumer`` constructors; they pin the
    coefficients that each family fixes.
    """

    kind: CostKind
    lin: float
    quad: float
    quart: float
    const: float

    def __post_init__(self):
        if min(self.quad, self.quart, self.const) < 0:
            raise ConfigError(f"negative cost coefficient in {self}")
        if self.kind is CostKind.SOLAR and (self.lin != 1.0 or self.const != 0.0):
            raise ConfigError("solar cost must have lin=1, const=0")
        if self.kind is CostKind.WIND and (self.lin != 1.0 or self.quart != 0.0):
            raise ConfigError("wind cost must have lin=1, quart=0")
        if self.kind is CostKind.CONSUMER:
            if self.lin != 0.0:
                raise ConfigError("consumer cost has no linear term")
            if self.quad <= 0.0:
                raise ConfigError("consumer cost needs quad > 0 so its derivative is positive on (0, 1]")

    @classmethod
    def solar(cls, a: float, b: float) -> CostFunction:
        return cls(CostKind.SOLAR, 1.0, float(a), float(b), 0.0)

    @classmethod
    def wind(cls, a: float, c: float) -> CostFunction:
        return cls(CostKind.WIND, 1.0, float(a), 0.0, float(c))

    @classmethod
    def consumer(cls, a: float, b: float, c: float) -> CostFunction:
        return cls(CostKind.CONSUMER, 0.0, float(a), float(b), float(c))


def _check_unit(v: float) -> None:
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"argument {v!r} outside [0, 1]")


def cost_eval(c: CostFunction, v: float) -> float:
    _check_unit(v)
    v2 = v * v
    return c.lin * v + c.quad * v2 + c.quart * (v2 * v2) + c.const


def cost_deriv(c: CostFunction, v: float) -> float:
    _check_unit(v)
    # Same operation order as CostTable.deriv so scalar and vector paths agree bitwise.
    return c.lin + 2.0 * c.quad * v + 4.0 * c.quart * (v * v * v)


@dataclass(frozen=True)
class CostTable:
    """Column-stacked coefficients of one or more cost functions, for vectorized use."""

    lin: np.ndarray
    quad: np.ndarray
    quart: np.ndarray
    const: np.ndarray

    @classmethod
    def from_costs(cls, costs) -> CostTable:
        costs = list(costs)
        return cls(
            np.array([c.lin for c in costs], dtype=float),
            np.array([c.quad for c in costs], dtype=float),
            np.array([c.quart for c in costs], dtype=float),
            np.array([c.const for c in costs], dtype=float),
        )

    def __len__(self):
        return len(self.lin)

    def value(self, v):
        v2 = v * v
        return self.lin * v + self.quad * v2 + self.quart * (v2 * v2) + self.const

    def deriv(self, v):
        return self.lin + 2.0 * self.quad * v + 4.0 * self.quart * (v * v * v)

    def second_deriv(self, v):
        return 2.0 * self.quad + 12.0 * self.quart * (v * v)


@dataclass
class AgentState:
    activity: int = 1
    avg: float = 1.0
    steps_seen: int = 1


def update_running_average(avg: float, steps_seen: int, bit: int) -> float:
    """Fold one more activity bit into a running average over ``steps_seen`` steps.

    The average is carried as an integer count so the result equals the
    direct mean of the bit history.
    """
    if steps_seen < 1:
        raise ValueError("steps_seen must be positive")
    count = round(avg * steps_seen)
    return (count + bit) / (steps_seen + 1)


@dataclass(frozen=True)
class FeedbackSignals:
    solar: float
    wind: float
    consumer: float

    def as_array(self) -> np.ndarray:
        return np.array([self.solar, self.wind, self.consumer])

    def __getitem__(self, kind: CostKind) -> float:
        return getattr(self, kind.value)


@dataclass(frozen=True)
class CoefRange:
    """Uniform sampling intervals for the (quad, quart, const) coefficients."""

    quad: tuple[float, float]
    quart: tuple[float, float]
    const: tuple[float, float]

    def to_dict(self):
        return {"quad": list(self.quad), "quart": list(self.quart), "const": list(self.const)}

    @classmethod
    def from_dict(cls, d):
        return cls(*(tuple(float(x) for x in d[k]) for k in ("quad", "quart", "const")))


# Solar has no constant term and wind no quartic term; their const/quart ranges are pinned at 0.
DEFAULT_RANGES = {
    CostKind.SOLAR: CoefRange((0.5, 2.0), (0.5, 2.0), (0.0, 0.0)),
    CostKind.WIND: CoefRange((0.5, 2.0), (0.0, 0.0), (0.5, 2.0)),
    CostKind.CONSUMER: CoefRange((0.5, 2.0), (0.5, 2.0), (0.0, 1.0)),
}


@dataclass
class CommunityConfig:
    n_solar: int = 100
    n_wind: int = 80
    n_consumers: int = 160
    cap_solar: float = 50.0
    cap_wind: float = 60.0
    gain_solar: float = 0.1
    gain_wind: float = 0.1
    gain_consumer: float = 0.1
    horizon: int = 20000
    seed: int = 2023
    theta_init: float = 0.35
    theta_min: float = 1e-6
    theta_max: float = 10.0
    record_every: int = 1
    coef_ranges: dict = field(default_factory=lambda: dict(DEFAULT_RANGES))
    # Explicit per-population coefficient columns; when set, sampling is skipped.
    coefficients: dict | None = None

    def size(self, kind: CostKind) -> int:
        return {CostKind.SOLAR: self.n_solar, CostKind.WIND: self.n_wind,
                CostKind.CONSUMER: self.n_consumers}[kind]

    def capacity(self, kind: CostKind) -> float:
        if kind is CostKind.SOLAR:
            return self.cap_solar
        if kind is CostKind.WIND:
            return self.cap_wind
        return self.cap_solar + self.cap_wind

    def gain(self, kind: CostKind) -> float:
        return getattr(self, f"gain_{kind.value}")

    def replace(self, **changes) -> CommunityConfig:
        return replace(self, **changes)

    def validate(self, allow_zero_gains: bool = False) -> CommunityConfig:
        for name in ("n_solar", "n_wind", "n_consumers", "horizon", "record_every"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if not 0 < self.cap_solar <= self.n_solar:
            raise ConfigError(f"cap_solar must lie in (0, n_solar]: {self.cap_solar} vs {self.n_solar}")
        if not 0 < self.cap_wind <= self.n_wind:
            raise ConfigError(f"cap_wind must lie in (0, n_wind]: {self.cap_wind} vs {self.n_wind}")
        if self.cap_solar + self.cap_wind > self.n_consumers:
            raise ConfigError("cap_solar + cap_wind exceeds n_consumers; consumer balance is infeasible")
        lo = 0.0 if allow_zero_gains else None
        for kind in POPULATIONS:
            g = self.gain(kind)
            if not (0 < g < 1 or (lo is not None and g == 0)):
                raise ConfigError(f"gain_{kind.value} must lie in (0, 1), got {g}")
        if not 0 < self.theta_min < self.theta_max:
            raise ConfigError("need 0 < theta_min < theta_max")
        if not self.theta_init > 0 or not math.isfinite(self.theta_init):
            raise ConfigError("theta_init must be positive and finite")
        for kind in POPULATIONS:
            r = self.coef_ranges[kind]
            for lo_, hi_ in (r.quad, r.quart, r.const):
                if not 0 <= lo_ <= hi_:
                    raise ConfigError(f"malformed {kind.value} coefficient range [{lo_}, {hi_}]")
        if self.coef_ranges[CostKind.CONSUMER].quad[0] <= 0:
            raise ConfigError("consumer quad range must exclude 0 (derivative would vanish)")
        if self.coefficients is not None:
            for kind in POPULATIONS:
                cols = self.coefficients[kind]
                for key in ("quad", "quart", "const"):
                    if len(cols[key]) != self.size(kind):
                        raise ConfigError(f"{kind.value}.{key} has {len(cols[key])} entries, "
                                          f"expected {self.size(kind)}")
        return self

    # serialization -------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        d = {
            "populations": {"solar": self.n_solar, "wind": self.n_wind, "consumer": self.n_consumers},
            "capacities": {"solar": self.cap_solar, "wind": self.cap_wind},
            "gains": {"solar": self.gain_solar, "wind": self.gain_wind, "consumer": self.gain_consumer},
            "theta": {"init": self.theta_init, "min": self.theta_min, "max": self.theta_max},
            "horizon": self.horizon,
            "seed": self.seed,
            "record_every": self.record_every,
            "coef_ranges": {k.value: self.coef_ranges[k].to_dict() for k in POPULATIONS},
            "coefficients": None,
        }
        if self.coefficients is not None:
            d["coefficients"] = {
                k.value: {c: [float(x) for x in self.coefficients[k][c]] for c in ("quad", "quart", "const")}
                for k in POPULATIONS
            }
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> CommunityConfig:
        base = cls()
        known = {"populations", "capacities", "gains", "theta", "horizon", "seed",
                 "record_every", "coef_ranges", "coefficients"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            pops = d.get("populations", {})
            caps = d.get("capacities", {})
            gains = d.get("gains", {})
            theta = d.get("theta", {})
            ranges = dict(DEFAULT_RANGES)
            for name, r in (d.get("coef_ranges") or {}).items():
                ranges[CostKind(name)] = CoefRange.from_dict(r)
            coefs = d.get("coefficients")
            if coefs is not None:
                coefs = {CostKind(name): {c: [float(x) for x in cols[c]] for c in ("quad", "quart", "const")}
                         for name, cols in coefs.items()}
                missing = [k.value for k in POPULATIONS if k not in coefs]
                if missing:
                    raise ConfigError(f"coefficients missing populations {missing}")
            return cls(
                n_solar=int(pops.get("solar", base.n_solar)),
                n_wind=int(pops.get("wind", base.n_wind)),
                n_consumers=int(pops.get("consumer", base.n_consumers)),
                cap_solar=float(caps.get("solar", base.cap_solar)),
                cap_wind=float(caps.get("wind", base.cap_wind)),
                gain_solar=float(gains.get("solar", base.gain_solar)),
                gain_wind=float(gains.get("wind", base.gain_wind)),
                gain_consumer=float(gains.get("consumer", base.gain_consumer)),
                theta_init=float(theta.get("init", base.theta_init)),
                theta_min=float(theta.get("min", base.theta_min)),
                theta_max=float(theta.get("max", base.theta_max)),
                horizon=int(d.get("horizon", base.horizon)),
                seed=int(d.get("seed", base.seed)),
                record_every=int(d.get("record_every", base.record_every)),
                coef_ranges=ranges,
                coefficients=coefs,
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed config: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def loads(cls, text: str) -> CommunityConfig:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)


CONFIG_FIELDS = tuple(f.name for f in fields(CommunityConfig))


@dataclass(frozen=True)
class CostPopulation:
    solar: tuple
    wind: tuple
    consumer: tuple

    def __getitem__(self, kind: CostKind) -> tuple:
        return getattr(self, kind.value)

    def tables(self) -> dict:
        return {k: CostTable.from_costs(self[k]) for k in POPULATIONS}

    def coefficient_columns(self) -> dict:
        return {k: {"quad": [c.quad for c in self[k]], "quart": [c.quart for c in self[k]],
                    "const": [c.const for c in self[k]]} for k in POPULATIONS}


def _build(kind: CostKind, quad, quart, const) -> list[CostFunction]:
    if kind is CostKind.SOLAR:
        return [CostFunction.solar(a, b) for a, b in zip(quad, quart)]
    if kind is CostKind.WIND:
        return [CostFunction.wind(a, c) for a, c in zip(quad, const)]
    return [CostFunction.consumer(a, b, c) for a, b, c in zip(quad, quart, const)]


def sample_cost_population(cfg: CommunityConfig, rng: np.random.Generator | None = None) -> CostPopulation:
    """Draw every agent's cost coefficients i.i.d. uniform from ``cfg.coef_ranges``.

    Uses the population stream derived from ``cfg.seed`` unless ``rng`` is
    given. Explicit ``cfg.coefficients`` bypass sampling entirely.
    """
    from .streams import population_rng

    cfg.validate(allow_zero_gains=True)
    if cfg.coefficients is not None:
        cols = cfg.coefficients
        return CostPopulation(*(tuple(_build(k, cols[k]["quad"], cols[k]["quart"], cols[k]["const"]))
                                for k in POPULATIONS))
    if rng is None:
        rng = population_rng(cfg.seed)
    out = []
    for kind in POPULATIONS:
        n = cfg.size(kind)
        r = cfg.coef_ranges[kind]
        # Always three draws per agent so the stream layout does not depend on the family.
        quad = rng.uniform(*r.quad, size=n)
        quart = rng.uniform(*r.quart, size=n)
        const = rng.uniform(*r.const, size=n)
        out.append(tuple(_build(kind, quad, quart, const)))
    return CostPopulation(*out)
