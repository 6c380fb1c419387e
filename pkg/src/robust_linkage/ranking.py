"""
Nearest-neighbor rankings.

Every point ranks all points by decreasing similarity. A point is its own
rank-0 neighbor and equal similarities are ordered by ascending index, so
rankings are a pure function of the matrix.
"""

from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .models import SimilarityMatrix


def rank_rows(values: np.ndarray) -> np.ndarray:
    """
    Rank every row of a square similarity block.

    Args:
        values: Square float matrix; row p holds sim(p, .)

    Returns:
        int64 array whose row p lists column indices with p first, then by
        decreasing similarity, ties by ascending index
    """
    keys = -np.array(values, dtype=np.float64, copy=True)
    np.fill_diagonal(keys, -np.inf)
    return np.argsort(keys, axis=1, kind="stable").astype(np.int64)


def rank_vector(values: np.ndarray) -> np.ndarray:
    """Rank the entries of one similarity vector (no self entry), ties by ascending index."""
    return np.argsort(-np.asarray(values, dtype=np.float64), kind="stable").astype(np.int64)


class NeighborRanking(BaseModel):
    """Per-point permutation of all points by decreasing similarity."""

    order: np.ndarray = Field(..., description="n x n int64; order[p][r] is p's rank-r neighbor")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def n(self) -> int:
        """Number of points."""
        return int(self.order.shape[0])

    def top(self, point: int, t: int, include_self: bool = True) -> np.ndarray:
        """Return the t nearest neighbors of a point."""
        start = 0 if include_self else 1
        return self.order[point, start : start + t]

    def indicator(self, t: int, include_self: bool = True, dtype: Any = np.float32) -> np.ndarray:
        """
        Build I_t, the n x n 0/1 matrix with I_t[x][y] = 1 iff y is among x's t nearest.

        Args:
            t: Neighborhood size
            include_self: Whether x counts as its own nearest neighbor
            dtype: Element type of the result

        Returns:
            Dense 0/1 matrix
        """
        start = 0 if include_self else 1
        columns = self.order[:, start : start + t]
        result = np.zeros((self.n, self.n), dtype=dtype)
        np.put_along_axis(result, columns, 1, axis=1)
        return result


def build_neighbor_ranking(sim: SimilarityMatrix, subset: Optional[Any] = None) -> NeighborRanking:
    """
    Build the deterministic neighbor ranking of a similarity matrix.

    Args:
        sim: Validated similarity matrix
        subset: Optional point ids; the ranking is then over the subset in
            local positions 0..len(subset)-1

    Returns:
        NeighborRanking with self first and index tie-breaks
    """
    values = sim.values
    if subset is not None:
        ids = np.asarray(subset, dtype=np.int64)
        values = values[np.ix_(ids, ids)]
    order = rank_rows(values)
    order.setflags(write=False)
    return NeighborRanking(order=order)
