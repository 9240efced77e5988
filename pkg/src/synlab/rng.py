"""Deterministic counter-based random streams for the Monte Carlo runs.

Every grid point of a sweep owns an independent Philox substream keyed by
(seed, grid index), and each epoch occupies one fixed-width row of that
substream.  Draw (epoch e, slot k) is therefore a pure function of
(seed, grid index, e, k) for a given per-epoch layout, no matter how grid
points are scheduled across worker threads.

Gaussian deviates are produced by pushing single uniform draws through the
inverse normal CDF, so each Gaussian consumes exactly one slot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mathutils import normal_quantile

_MASK64 = (1 << 64) - 1
# keep quantile arguments strictly inside (0, 1); draws of exactly 0.0 would
# otherwise map to -inf
_U_LO = 1e-300
_U_HI = 1.0 - 1e-16


@dataclass(frozen=True)
class RngStream:
    """Family of reproducible substreams derived from one 64-bit seed."""

    seed: int

    def _generator(self, grid_index: int) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, grid_index & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def uniform_matrix(
        self, grid_index: int, epochs: int, draws_per_epoch: int
    ) -> np.ndarray:
        """(epochs, draws_per_epoch) uniforms in [0, 1) for one grid point.

        Row e holds the draws of epoch e; rows are a prefix-stable
        function of the epoch count (asking for more epochs never changes
        earlier rows).
        """
        return self._generator(grid_index).random((epochs, draws_per_epoch))


def gaussian_from_uniform(u, sigma: float = 1.0):
    """Map uniform draws to centred Gaussian deviates of the given sigma
    via the inverse-CDF transform (one uniform per deviate)."""
    clipped = np.clip(np.asarray(u, dtype=float), _U_LO, _U_HI)
    out = sigma * normal_quantile(clipped)
    return float(out) if np.ndim(u) == 0 else out
