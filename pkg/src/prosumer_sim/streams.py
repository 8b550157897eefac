"""Counter-based random streams.

Each agent owns a 64-bit key derived from the master seed and its
``(kind, index)`` pair. The uniform for step ``k`` is the SplitMix64 output
at position ``k`` of the stream seeded with that key, so draws do not
depend on the order in which agents are evaluated.
"""

import numpy as np

from .model import CostKind

_KIND_CODE = {CostKind.SOLAR: 0, CostKind.WIND: 1, CostKind.CONSUMER: 2}
_POPULATION_CODE = 3

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TO_UNIT = 2.0**-53


def agent_keys(seed: int, kind: CostKind, n: int) -> np.ndarray:
    code = _KIND_CODE[kind]
    return np.array(
        [np.random.SeedSequence(seed, spawn_key=(code, i)).generate_state(1, np.uint64)[0] for i in range(n)],
        dtype=np.uint64,
    )


def population_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_POPULATION_CODE,)))


def uniforms(keys: np.ndarray, step) -> np.ndarray:
    """Uniform [0, 1) draws at counter ``step`` (broadcast against ``keys``)."""
    with np.errstate(over="ignore"):
        z = keys + (np.asarray(step, dtype=np.uint64) + np.uint64(1)) * _GAMMA
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * _TO_UNIT


class AgentStream:
    """The private stream of a single agent."""

    def __init__(self, seed: int, kind: CostKind, index: int):
        code = _KIND_CODE[kind]
        self.key = np.array(
            [np.random.SeedSequence(seed, spawn_key=(code, index)).generate_state(1, np.uint64)[0]],
            dtype=np.uint64,
        )

    def uniform(self, step: int) -> float:
        return float(uniforms(self.key, step)[0])

    def uniforms(self, steps) -> np.ndarray:
        return uniforms(self.key[0], np.asarray(steps))
