"""Counter-based deterministic random numbers (SplitMix64).

Every stochastic component in this package (the synthetic-data generator,
k-means++ seeding) draws from the generator below, so all results are
reproducible bit-for-bit from integer seeds, and fixtures can be
regenerated from another language by reimplementing this file.

Raw stream
----------
A stream is parameterized by two 64-bit integers ``(seed, stream)``. Its
base state and i-th raw output (i = 0, 1, ...) are, with all arithmetic
modulo 2**64:

    base   = mix64(seed) + stream
    raw_i  = mix64(base + (i + 1) * 0x9E3779B97F4A7C15)

where ``mix64`` is the SplitMix64 finalizer (Vigna, 2015):

    z  = input
    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31
    mix64 = z

Derived values
--------------
uniform in [0, 1):   (raw >> 11) * 2**-53
normals:             Box-Muller on consecutive raw pairs (2k, 2k+1):
                         u1 = ((raw_{2k} >> 11) + 1) * 2**-53   in (0, 1]
                         u2 =  (raw_{2k+1} >> 11) * 2**-53      in [0, 1)
                         r  = sqrt(-2 ln u1)
                         z0 = r cos(2 pi u2),  z1 = r sin(2 pi u2)
                     a request for n normals consumes ceil(n/2) pairs and
                     discards the final z1 when n is odd
integer below n:     floor(uniform * n)
sampling k of n:     partial Fisher-Yates over [0, n) using "integer
                     below n - i" draws, first k slots returned
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV53 = 2.0 ** -53


def mix64(value: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z = value & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    # uint64 array ops wrap modulo 2**64, matching mix64 exactly
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_MIX1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


class CounterRng:
    """One (seed, stream) random stream with a running counter.

    Streams with distinct ``(seed, stream)`` pairs are independent for all
    practical purposes; the counter gives random access, so batches of any
    size split identically to element-by-element draws.
    """

    def __init__(self, seed: int, stream: int = 0):
        self._base = (mix64(seed) + (stream & _MASK64)) & _MASK64
        self._count = 0

    def raw(self, n: int) -> np.ndarray:
        """Next ``n`` raw 64-bit outputs as a uint64 array."""
        start = self._count
        self._count += n
        counters = np.arange(start + 1, start + n + 1, dtype=np.uint64)
        counters = counters * np.uint64(_GAMMA) + np.uint64(self._base)
        return _mix64_array(counters)

    def uniforms(self, n: int) -> np.ndarray:
        """``n`` doubles uniform on [0, 1)."""
        return (self.raw(n) >> np.uint64(11)).astype(np.float64) * _INV53

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def normals(self, n: int) -> np.ndarray:
        """``n`` standard normal doubles via Box-Muller."""
        pairs = (n + 1) // 2
        raw = self.raw(2 * pairs)
        shifted = (raw >> np.uint64(11)).astype(np.float64)
        u1 = (shifted[0::2] + 1.0) * _INV53
        u2 = shifted[1::2] * _INV53
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * math.pi * u2
        out = np.empty(2 * pairs)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:n]

    def below(self, n: int) -> int:
        """Integer uniform on [0, n)."""
        if n < 1:
            raise ValueError("below() needs n >= 1")
        return min(int(self.uniform() * n), n - 1)

    def sample_without_replacement(self, n: int, k: int) -> list[int]:
        """``k`` distinct integers from [0, n), partial Fisher-Yates order."""
        if not 0 <= k <= n:
            raise ValueError("need 0 <= k <= n")
        slots = list(range(n))
        for i in range(k):
            j = i + self.below(n - i)
            slots[i], slots[j] = slots[j], slots[i]
        return slots[:k]
