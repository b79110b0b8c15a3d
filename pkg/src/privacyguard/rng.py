"""Seeded deterministic randomness for splits and stochastic training.

A tiny splitmix64 generator is used instead of the stdlib Mersenne Twister so
that shuffles and sample draws reproduce bit-for-bit regardless of platform,
Python version, or future stdlib changes. Reimplementations in other languages
can match it from the constants alone.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_SPAN = 1 << 64

#: recorded in split metadata so a reimplementation knows what to match
GENERATOR_NAME = "splitmix64-fisher-yates"


class SplitMix64:
    """64-bit splitmix generator: one word of state, fixed mixing constants."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), rejection-sampled to avoid modulo bias."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = _SPAN - _SPAN % n
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n


def permutation(n: int, seed: int) -> list[int]:
    """Fisher-Yates shuffle of range(n), fully determined by the seed."""
    order = list(range(n))
    rng = SplitMix64(seed)
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        order[i], order[j] = order[j], order[i]
    return order
