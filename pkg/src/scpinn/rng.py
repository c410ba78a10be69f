"""SplitMix64 stream, so parameter initialization is reproducible bit-for-bit.

state += 0x9E3779B97F4A7C15
z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
z = (z ^ (z >> 27)) * 0x94D049BB133111EB
out = z ^ (z >> 31)

All arithmetic is modulo 2**64.  Uniform doubles in [0, 1) use the top 53 bits.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * _M1) & _MASK
        z = ((z ^ (z >> 27)) * _M2) & _MASK
        return z ^ (z >> 31)

    def uniform(self, size: int) -> np.ndarray:
        out = np.empty(size)
        for i in range(size):
            out[i] = (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)
        return out
