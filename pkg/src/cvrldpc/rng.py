"""Portable deterministic random streams.

Everything random in this package (code construction draws, information
bits, channel noise) flows through splitmix64, a counter-based 64-bit
mixing generator: output ``k`` of the stream seeded by ``s`` is
``mix64(s + (k + 1) * GAMMA)`` with the finalizer of Steele/Lea/Vigna's
splitmix64. Being a pure function of (seed, counter) it is vectorizable,
reproducible across platforms, and cheap to fork into substreams.

Gaussian samples use the Box-Muller transform on 53-bit uniforms, so a
given seed yields bit-identical noise everywhere numpy's libm does.
"""

from __future__ import annotations

import math

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1

_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)

# 2^-53, scales the top 53 bits of a word to [0, 1)
_INV53 = float(2.0**-53)


def mix64(x: int) -> int:
    """Scalar splitmix64 finalizer over python ints (no numpy types)."""
    z = x & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, *path: int) -> int:
    """Fork a substream seed from a master seed and an integer path.

    Chain-mixes each path element into the running state, so
    ``derive_seed(s, a, b) != derive_seed(s, b, a)`` in general and
    substreams for distinct paths are statistically independent.
    """
    s = mix64(master & _MASK64)
    for p in path:
        s = mix64((s + 0x9E3779B97F4A7C15 + (p & _MASK64)) & _MASK64)
    return s


def raw_block(seed: int, start: int, count: int) -> np.ndarray:
    """Outputs ``start .. start+count`` of the stream, as uint64."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    z = np.uint64(seed & _MASK64) + idx * _GAMMA
    z = (z ^ (z >> _U30)) * _MIX1
    z = (z ^ (z >> _U27)) * _MIX2
    return z ^ (z >> _U31)


class Stream:
    """Sequential view over one splitmix64 counter stream.

    Each draw advances a word counter by a size that depends only on the
    requested count, never on the values produced, so consumers that make
    the same sequence of calls always see the same samples.
    """

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self.pos = 0

    def u64(self, count: int) -> np.ndarray:
        out = raw_block(self.seed, self.pos, count)
        self.pos += count
        return out

    def doubles(self, count: int) -> np.ndarray:
        """Uniforms in [0, 1), one word each (top 53 bits)."""
        return (self.u64(count) >> _U11).astype(np.float64) * _INV53

    def gaussians(self, count: int) -> np.ndarray:
        """Standard normal samples via Box-Muller.

        Consumes ``2 * ceil(count/2)`` words regardless of parity.
        """
        pairs = (count + 1) // 2
        w = self.u64(2 * pairs)
        # u1 in (0, 1] so log() is finite; u2 in [0, 1)
        u1 = ((w[0::2] >> _U11).astype(np.float64) + 1.0) * _INV53
        u2 = (w[1::2] >> _U11).astype(np.float64) * _INV53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = (2.0 * math.pi) * u2
        out = np.empty(2 * pairs, dtype=np.float64)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:count]

    def bits(self, count: int) -> np.ndarray:
        """Uniform bits as uint8, unpacked LSB-first from whole words."""
        words = self.u64((count + 63) // 64)
        shifts = np.arange(64, dtype=np.uint64)
        b = (words[:, None] >> shifts[None, :]) & np.uint64(1)
        return b.reshape(-1)[:count].astype(np.uint8)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound), unbiased via rejection."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            w = int(self.u64(1)[0])
            if w < limit:
                return w % bound

    def sample_distinct(self, population: int, count: int) -> list[int]:
        """``count`` distinct values from range(population), order fixed
        by the draw (partial Fisher-Yates)."""
        if count > population:
            raise ValueError("count exceeds population")
        pool = list(range(population))
        picked = []
        for i in range(count):
            j = i + self.below(population - i)
            pool[i], pool[j] = pool[j], pool[i]
            picked.append(pool[i])
        return picked

    def permutation(self, n: int) -> list[int]:
        return self.sample_distinct(n, n)
