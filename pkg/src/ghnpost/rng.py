"""Deterministic, counter-based Gaussian random streams.

The generator is pinned so outputs are reproducible across builds and
platforms:

* substream seed = first 8 bytes (little-endian) of
  ``blake2b(master_seed as u64 LE || label as UTF-8, digest_size=8)``
* raw word i (0-based) = splitmix64 output for counter ``seed + (i+1) * G``
  with G = 0x9E3779B97F4A7C15 and the standard splitmix64 finalizer
  (shift-xor 30/27/31, multipliers 0xBF58476D1CE4E5B9, 0x94D049BB133111EB)
* uniform u_i = ((word_i >> 11) + 1) * 2**-53, in (0, 1]
* gaussians come from the Box-Muller transform on pairs (u_{2j}, u_{2j+1}):
  z_{2j} = sqrt(-2 ln u_{2j}) cos(2 pi u_{2j+1}),
  z_{2j+1} = sqrt(-2 ln u_{2j}) sin(2 pi u_{2j+1})

Streams are stateless: ``normal(n)`` always returns the first n values of
the stream, and ``normal(n)`` is a prefix of ``normal(m)`` for n <= m.
Because every word is a pure function of (seed, counter), layers can be
processed in any order, or in parallel, with identical results.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def substream_seed(master_seed: int, label: str) -> int:
    """Stable 64-bit seed for a named substream of a master seed."""
    h = hashlib.blake2b(digest_size=8)
    h.update((master_seed & _MASK64).to_bytes(8, "little"))
    h.update(label.encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


def _splitmix64(seed: int, count: int) -> np.ndarray:
    idx = np.arange(1, count + 1, dtype=np.uint64)
    z = np.uint64(seed & _MASK64) + idx * _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@dataclass(frozen=True)
class RngStream:
    """A named, deterministic Gaussian stream.

    Identical (master_seed, label) pairs produce identical sequences.
    """

    master_seed: int
    label: str = ""

    def substream(self, label: str) -> "RngStream":
        return RngStream(master_seed=self.master_seed, label=label)

    def uniform(self, n: int) -> np.ndarray:
        """First n uniforms of the stream, each in (0, 1]."""
        if n < 0:
            raise ValueError("n must be non-negative")
        seed = substream_seed(self.master_seed, self.label)
        words = _splitmix64(seed, n)
        return ((words >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53

    def normal(self, n: int) -> np.ndarray:
        """First n standard-normal values of the stream (float64)."""
        if n < 0:
            raise ValueError("n must be non-negative")
        if n == 0:
            return np.empty(0, dtype=np.float64)
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs)
        radius = np.sqrt(-2.0 * np.log(u[0::2]))
        angle = (2.0 * np.pi) * u[1::2]
        out = np.empty(2 * pairs, dtype=np.float64)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:n]
