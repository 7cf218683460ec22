"""Deterministic random-stream derivation.

Every stochastic component owns a stream derived from a 64-bit master seed
plus a structured key, so results are reproducible for a fixed seed and
independent of worker scheduling. Streams are backed by numpy's
``SeedSequence``/``default_rng``; draws are reproducible across platforms
for a pinned numpy version.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np


def _key_part(part) -> int:
    """Map a key component to a non-negative 32-bit integer."""
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError(f"stream key integers must be non-negative, got {part}")
        return int(part)
    raise TypeError(f"stream key parts must be str or int, got {type(part).__name__}")


@dataclass(frozen=True)
class RngStream:
    """A named, replayable random stream.

    Two streams with the same ``seed`` and ``key`` produce identical draws;
    streams with different keys are statistically independent.
    """

    seed: int
    key: tuple = ()

    def seed_sequence(self) -> np.random.SeedSequence:
        spawn_key = tuple(_key_part(p) for p in self.key)
        return np.random.SeedSequence(entropy=self.seed, spawn_key=spawn_key)

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(self.seed_sequence())

    def child(self, *parts) -> "RngStream":
        """Derive a sub-stream by extending the key."""
        return RngStream(self.seed, self.key + tuple(parts))
