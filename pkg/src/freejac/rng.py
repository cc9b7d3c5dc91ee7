"""Deterministic random number streams.

Every random quantity in the library flows from a ``SeededRng``, which is a
thin wrapper around numpy's PCG64 keyed by ``(seed, stream)``.  Two
``SeededRng`` objects built with the same key produce bit-identical sample
sequences; distinct stream paths are statistically independent.  Parallel
work (Monte-Carlo trials, per-layer weight draws) must give each unit its
own substream instead of sharing a generator.
"""

from __future__ import annotations

import numpy as np

__all__ = ["SeededRng"]


class SeededRng:
    """Reproducible random source keyed by a seed and a stream path.

    The stream is a tuple of integers fed to numpy's ``SeedSequence`` as the
    spawn key, so ``substream`` calls can be nested without collisions.
    """

    def __init__(self, seed: int, stream: int | tuple[int, ...] = ()):
        if isinstance(stream, int):
            stream = (stream,)
        self.seed = int(seed)
        self.stream = tuple(int(s) for s in stream)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        self._generator = np.random.Generator(np.random.PCG64(seq))

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def substream(self, *ids: int) -> "SeededRng":
        """Independent child stream; same (seed, path) always yields the same child."""
        return SeededRng(self.seed, self.stream + tuple(int(i) for i in ids))

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, stream={self.stream})"
