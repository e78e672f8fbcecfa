"""Counter-based deterministic random generator.

Draw i depends only on (seed, i) through a splitmix64 mix, so the stream is
reproducible bit-for-bit across platforms and trivially portable to other
languages. Library generators are avoided on purpose: episode randomization
feeds state digests, and those must never shift under a dependency upgrade.
"""

from __future__ import annotations

import math

from .geom import UnitQuat, quat_normalize

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


class CounterRng:
    """splitmix64 stream over (seed, counter)."""

    def __init__(self, seed: int):
        self.seed = seed & _MASK
        self.counter = 0

    def next_u64(self) -> int:
        self.counter += 1
        return _mix((self.seed + self.counter * _GOLDEN) & _MASK)

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 bits of entropy."""
        return (self.next_u64() >> 11) * (2.0**-53)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randrange(self, n: int) -> int:
        """Uniform-ish integer in [0, n); bias is below 2^-53 * n and irrelevant here."""
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        k = int(self.random() * n)
        return n - 1 if k >= n else k

    def unit_quat(self) -> UnitQuat:
        """Uniform random rotation (Shoemake subgroup method)."""
        u1 = self.random()
        u2 = self.random()
        u3 = self.random()
        a = math.sqrt(1.0 - u1)
        b = math.sqrt(u1)
        return quat_normalize(
            (
                b * math.cos(2.0 * math.pi * u3),
                a * math.sin(2.0 * math.pi * u2),
                a * math.cos(2.0 * math.pi * u2),
                b * math.sin(2.0 * math.pi * u3),
            )
        )
