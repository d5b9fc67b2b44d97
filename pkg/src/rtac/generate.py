"""Seeded random binary CSPs (density / tightness model).

PRNG: SplitMix64. Draw ``i`` (0-based) is ``mix(seed + (i + 1) * 0x9E3779B97F4A7C15)``
modulo 2**64, and its uniform value is ``(draw >> 11) * 2**-53``. Draws are
consumed in this order: for each pair ``x < y`` in ascending order, one draw
decides the constraint (present iff ``u < density``); if present, ``d * d``
draws follow, one per value pair ``(a, b)`` in row-major order, and the pair
is forbidden iff ``u < tightness``. Constraints whose every pair is forbidden
are kept.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .model import Constraint, CspInstance

PRNG_NAME = "splitmix64"
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def splitmix64(seed: int, start: int, count: int) -> np.ndarray:
    """Outputs ``start .. start + count - 1`` of the SplitMix64 stream for ``seed``."""
    counters = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & _MASK64) + counters * _GAMMA
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, start: int, count: int) -> np.ndarray:
    return (splitmix64(seed, start, count) >> np.uint64(11)).astype(np.float64) * 2.0**-53


@dataclass(frozen=True)
class GenConfig:
    n: int
    d: int = 20
    density: float = 0.5
    tightness: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError(f"need n >= 1 and d >= 1, got n={self.n}, d={self.d}")
        for name in ("density", "tightness"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def metadata(self) -> dict:
        return {"gen": {**asdict(self), "prng": PRNG_NAME}}


def generate(cfg: GenConfig) -> CspInstance:
    n, d = cfg.n, cfg.d
    cells = d * d
    cursor = 0
    constraints = []
    for x in range(n):
        for y in range(x + 1, n):
            present = uniforms(cfg.seed, cursor, 1)[0] < cfg.density
            cursor += 1
            if not present:
                continue
            forbidden = uniforms(cfg.seed, cursor, cells) < cfg.tightness
            cursor += cells
            constraints.append(Constraint(x, y, ~forbidden.reshape(d, d)))
    return CspInstance(n, d, tuple(constraints))
