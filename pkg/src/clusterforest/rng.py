"""Portable seeded random number generation.

All stochastic operations in the library draw from this generator so that a
fixed seed reproduces bit-for-bit across platforms and Python/numpy
versions. The stream is xoshiro256** (Blackman & Vigna) with the four-word
state filled from a splitmix64 chain over the seed; both are pure 64-bit
integer arithmetic with no platform-dependent behavior.

Seeds for subcomponents (per-tree sampling, per-node clustering, noise
emulation) are derived with :func:`derive_seed`, which absorbs a tag string
and integer tokens into a splitmix64 finalizer chain. Distinct tags give
statistically independent streams from one master seed.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def _mix64(x: int) -> int:
    """splitmix64 finalizer: one full avalanche step on a 64-bit word."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, tag: str, *tokens: int) -> int:
    """Derive a child seed from (seed, tag, tokens), deterministically.

    The tag is absorbed as little-endian 8-byte chunks, then each integer
    token; every absorption runs the splitmix64 finalizer so nearby inputs
    map to unrelated outputs.
    """
    h = _mix64(seed & _MASK64)
    data = tag.encode("utf-8")
    for i in range(0, len(data), 8):
        h = _mix64(h ^ int.from_bytes(data[i : i + 8], "little"))
    for tok in tokens:
        h = _mix64(h ^ (int(tok) & _MASK64))
    return h


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Rng:
    """xoshiro256** stream seeded through a splitmix64 chain.

    Provides the handful of draw kinds the library needs: uniform floats,
    unbiased bounded integers (rejection sampling), normals (Box-Muller),
    and Fisher-Yates shuffles. All are defined purely in terms of the
    uint64 output sequence, so streams are portable.
    """

    def __init__(self, seed: int):
        s = seed & _MASK64
        state = []
        for _ in range(4):
            s = (s + 0x9E3779B97F4A7C15) & _MASK64
            z = s
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
            state.append(z ^ (z >> 31))
        self._s = state
        self._gauss_cache: float | None = None

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform float64 in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def random_array(self, n: int) -> np.ndarray:
        return np.array([self.random() for _ in range(n)], dtype=np.float64)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def uniform_array(self, lo: float, hi: float, n: int) -> np.ndarray:
        return lo + (hi - lo) * self.random_array(n)

    def below(self, n: int) -> int:
        """Unbiased integer in [0, n) via rejection on the top of range."""
        if n <= 0:
            raise ValueError("bound must be positive")
        limit = (_MASK64 + 1) - ((_MASK64 + 1) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def integers(self, lo: int, hi: int, size: int | None = None):
        """Integers in [lo, hi); scalar if size is None, else int64 array."""
        span = hi - lo
        if size is None:
            return lo + self.below(span)
        return np.array([lo + self.below(span) for _ in range(size)], dtype=np.int64)

    def normal(self) -> float:
        """Standard normal via Box-Muller; pairs are cached."""
        if self._gauss_cache is not None:
            z = self._gauss_cache
            self._gauss_cache = None
            return z
        u1 = 1.0 - self.random()  # (0, 1]: keeps log() finite
        u2 = self.random()
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        self._gauss_cache = float(r * np.sin(theta))
        return float(r * np.cos(theta))

    def normal_array(self, mean: float, std: float, n: int) -> np.ndarray:
        return mean + std * np.array([self.normal() for _ in range(n)], dtype=np.float64)

    def shuffle(self, items: np.ndarray) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> np.ndarray:
        idx = np.arange(n, dtype=np.int64)
        self.shuffle(idx)
        return idx
