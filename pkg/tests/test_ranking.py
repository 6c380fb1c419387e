"""
Tests for nearest-neighbor rankings.
"""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from robust_linkage.models import SimilarityMatrix
from robust_linkage.ranking import build_neighbor_ranking, rank_rows, rank_vector
from tests.utils.test_helpers import random_similarity


class TestRankRows:
    """Test cases for rank_rows."""

    def test_self_first(self):
        """Test a point is its own rank-0 neighbor even when another point is as similar."""
        values = np.array([[1.0, 1.0], [1.0, 1.0]])

        order = rank_rows(values)

        assert order.tolist() == [[0, 1], [1, 0]]

    def test_ties_by_index(self):
        """Test equal similarities are ordered by ascending index."""
        values = np.array(
            [
                [1.0, 0.5, 0.5, 0.9],
                [0.5, 1.0, 0.2, 0.2],
                [0.5, 0.2, 1.0, 0.2],
                [0.9, 0.2, 0.2, 1.0],
            ]
        )

        order = rank_rows(values)

        assert order[0].tolist() == [0, 3, 1, 2]
        assert order[1].tolist() == [1, 0, 2, 3]

    def test_input_unchanged(self):
        """Test ranking does not modify the input."""
        values = np.array([[1.0, 0.3], [0.3, 1.0]])

        rank_rows(values)

        assert values[0, 0] == 1.0

    def test_rank_vector(self):
        """Test ranking a single similarity vector."""
        assert rank_vector(np.array([0.1, 0.7, 0.7, -0.2])).tolist() == [1, 2, 0, 3]


class TestNeighborRanking:
    """Test cases for NeighborRanking."""

    def test_top(self):
        """Test the t nearest neighbors with and without the point itself."""
        sim = SimilarityMatrix(values=[[1.0, 0.2, 0.8], [0.2, 1.0, 0.5], [0.8, 0.5, 1.0]])
        ranking = build_neighbor_ranking(sim)

        assert ranking.top(0, 2).tolist() == [0, 2]
        assert ranking.top(0, 2, include_self=False).tolist() == [2, 1]

    def test_indicator(self):
        """Test the indicator marks exactly t entries per row."""
        sim = random_similarity(7, seed=3)
        ranking = build_neighbor_ranking(sim)

        indicator = ranking.indicator(3)

        assert indicator.dtype == np.float32
        assert indicator.sum(axis=1).tolist() == [3.0] * 7
        assert all(indicator[x, x] == 1 for x in range(7))
        assert all(indicator[x, ranking.top(x, 3)].sum() == 3 for x in range(7))

    def test_subset_ranking(self):
        """Test a ranking over a subset uses local positions."""
        sim = SimilarityMatrix(values=[[1.0, 0.9, 0.1], [0.9, 1.0, 0.3], [0.1, 0.3, 1.0]])

        ranking = build_neighbor_ranking(sim, subset=[0, 2])

        assert ranking.n == 2
        assert ranking.order.tolist() == [[0, 1], [1, 0]]

    @given(n=st.integers(min_value=2, max_value=12), seed=st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=40, deadline=None)
    def test_rows_are_permutations(self, n, seed):
        """Test every row is a permutation starting with the point itself."""
        ranking = build_neighbor_ranking(random_similarity(n, seed))

        for x in range(n):
            assert ranking.order[x, 0] == x
            assert sorted(ranking.order[x].tolist()) == list(range(n))
