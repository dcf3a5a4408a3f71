"""Deterministic, splittable random streams.

All stochastic operations in this package draw from an :class:`RngState`.
The underlying bit generator is Philox (counter based), so the draw sequence
for a given seed is reproducible across runs and platforms, and independent
child streams can be derived for parallel work without coordination.
"""

from __future__ import annotations

import numpy as np


class RngState:
    """A single-owner random stream seeded by a 64-bit integer.

    Same seed, same numpy version: bit-identical draws.  Never share one
    instance between concurrent consumers; use :meth:`split` instead.
    """

    __slots__ = ("seed", "gen", "_seq")

    def __init__(self, seed: int, _seq: np.random.SeedSequence | None = None):
        self.seed = int(seed)
        self._seq = np.random.SeedSequence(self.seed) if _seq is None else _seq
        self.gen = np.random.Generator(np.random.Philox(self._seq))

    def split(self, n: int) -> list["RngState"]:
        """Derive ``n`` independent child streams (parent stays usable)."""
        return [RngState(self.seed, _seq=child) for child in self._seq.spawn(n)]

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngState(seed={self.seed})"
