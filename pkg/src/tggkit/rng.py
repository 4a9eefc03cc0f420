"""Deterministic 64-bit random generator.

splitmix64 (Steele, Lea, Flood: "Fast Splittable Pseudorandom Number
Generators") -- a single 64-bit word of state, trivially serializable,
identical sequences on every platform.  Randomness in this package only
ever selects an index into an already-sorted list.
"""

from __future__ import annotations

_U64 = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.seed = seed & _U64
        self._state = seed & _U64

    @property
    def state(self) -> int:
        return self._state

    def restore(self, state: int) -> None:
        self._state = state & _U64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _U64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _U64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _U64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """A uniform integer in ``[0, n)`` (rejection sampling, no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (_U64 + 1) - ((_U64 + 1) % n)
        while True:
            draw = self.next_u64()
            if draw < limit:
                return draw % n
