"""Reproducible random streams.

Every random draw in the package comes from a Philox4x64-10 counter-based
generator (numpy's ``Philox`` bit generator) whose 64-bit key is derived
from a master seed and a stream index by SplitMix64:

    key(seed, i) = splitmix64_mix(seed + (i + 1) * 0x9E3779B97F4A7C15 mod 2**64)

which is the ``i``-th output (0-based) of a SplitMix64 sequence started at
``seed``. Streams for different replicates are therefore independent of
execution order and of how work is split across processes.

Generator version: ``philox4x64-10/splitmix64-v1``.
"""
from __future__ import annotations

import numpy as np

__all__ = ["GENERATOR_VERSION", "MASK64", "splitmix64_mix", "splitmix64", "stream_key", "stream", "as_generator"]

GENERATOR_VERSION = "philox4x64-10/splitmix64-v1"
MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def splitmix64_mix(z: int) -> int:
    """SplitMix64 output finalizer applied to a 64-bit state."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64(seed: int, count: int) -> list[int]:
    """First ``count`` outputs of SplitMix64 seeded with ``seed``."""
    return [stream_key(seed, i) for i in range(count)]


def stream_key(seed: int, index: int) -> int:
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be non-negative")
    return splitmix64_mix(int(seed) + (int(index) + 1) * _GAMMA)


def stream(seed: int, *indices: int) -> np.random.Generator:
    """Generator for the stream addressed by ``(seed, *indices)``.

    Nested indices are folded left to right, so ``stream(s, i, j)`` keys
    off ``stream_key(stream_key(s, i), j)``.
    """
    key = seed & MASK64
    for index in indices:
        key = stream_key(key, index)
    return np.random.Generator(np.random.Philox(key=key))


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator (returned as-is) or an integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, (int, np.integer)):
        return np.random.Generator(np.random.Philox(key=int(rng) & MASK64))
    raise TypeError(f"expected numpy Generator or int seed, got {type(rng).__name__}")
