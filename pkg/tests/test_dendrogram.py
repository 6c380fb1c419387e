"""
Tests for merge trees and prunings.
"""

import numpy as np
import pytest

from robust_linkage.dendrogram import Dendrogram, DendrogramBuilder, pruning_labeling, tree_pruning_points
from robust_linkage.errors import CoverageError, LinkageError, OverlapError
from robust_linkage.models import MergeEvent
from tests.utils.test_helpers import chain_tree, random_tree


def small_tree() -> Dendrogram:
    """((0, 1), (2, 3, 4)) over five points."""
    builder = DendrogramBuilder(5, algorithm="test")
    left = builder.record([0, 1], 1)
    right = builder.record([2, 3, 4], 2)
    builder.record([left.node_id, right.node_id], 3)
    return builder.build()


class TestDendrogram:
    """Test cases for Dendrogram."""

    def test_structure(self):
        """Test node queries."""
        tree = small_tree()

        assert tree.root == 7
        assert tree.node_count == 8
        assert tree.children(7) == [5, 6]
        assert tree.children(0) == []
        assert tree.parent(2) == 6
        assert tree.parent(7) is None
        assert tree.threshold(6) == 2
        assert tree.threshold(3) is None
        assert tree.points(6).tolist() == [2, 3, 4]
        assert tree.min_member(6) == 2
        assert tree.ancestors(3) == [3, 6, 7]
        assert not tree.is_binary()

    def test_single_point(self):
        """Test a one-point tree is a lone leaf."""
        tree = Dendrogram(n=1)

        assert tree.root == 0
        assert tree.points(0).tolist() == [0]

    def test_postorder(self):
        """Test children come before parents."""
        tree = random_tree(9, seed=4)
        seen = set()

        for node in tree.nodes_postorder():
            assert all(child in seen for child in tree.children(node))
            seen.add(node)

        assert len(seen) == tree.node_count

    def test_wrong_node_id(self):
        """Test merges must be numbered consecutively."""
        with pytest.raises(LinkageError, match="expected 3"):
            Dendrogram(n=3, merges=[MergeEvent(step=0, node_id=4, children=[0, 1], threshold=1)])

    def test_two_parents(self):
        """Test a node may not have two parents."""
        merges = [
            MergeEvent(step=0, node_id=3, children=[0, 1], threshold=1),
            MergeEvent(step=1, node_id=4, children=[1, 2], threshold=2),
        ]
        with pytest.raises(LinkageError, match="two parents"):
            Dendrogram(n=3, merges=merges)

    def test_several_roots(self):
        """Test an unfinished tree is rejected."""
        with pytest.raises(LinkageError, match="exactly one root"):
            Dendrogram(n=3, merges=[MergeEvent(step=0, node_id=3, children=[0, 1], threshold=1)])

    def test_audit_partition(self):
        """Test the recursive partition audit passes on valid trees."""
        random_tree(12, seed=7).audit_partition()

    def test_linkage_matrix(self):
        """Test the scipy-style export of a binary tree."""
        tree = chain_tree([[0, 1], [2]])

        matrix = tree.to_linkage_matrix()

        assert matrix.tolist() == [[0.0, 1.0, 1.0, 2.0], [3.0, 2.0, 2.0, 3.0]]

    def test_linkage_matrix_needs_binary_tree(self):
        """Test multiway trees cannot be exported."""
        with pytest.raises(LinkageError):
            small_tree().to_linkage_matrix()


class TestPrunings:
    """Test cases for prunings."""

    def test_pruning_points(self):
        """Test the point sets of a valid pruning."""
        tree = small_tree()

        parts = tree_pruning_points(tree, [6, 0, 1])

        assert [p.tolist() for p in parts] == [[2, 3, 4], [0], [1]]

    def test_pruning_labeling(self):
        """Test labels follow the pruning order."""
        assert pruning_labeling(small_tree(), [6, 5]).tolist() == [2, 2, 1, 1, 1]

    def test_root_pruning(self):
        """Test the root alone is a pruning."""
        assert pruning_labeling(small_tree(), [7]).tolist() == [1] * 5

    def test_overlap(self):
        """Test overlapping nodes raise OverlapError."""
        with pytest.raises(OverlapError) as excinfo:
            tree_pruning_points(small_tree(), [5, 6, 2])

        assert excinfo.value.details["nodes"] == [6, 2]

    def test_coverage(self):
        """Test a pruning missing points raises CoverageError."""
        with pytest.raises(CoverageError) as excinfo:
            tree_pruning_points(small_tree(), [5, 2])

        assert excinfo.value.details["missing_points"] == [3, 4]

    def test_unknown_node(self):
        """Test node ids outside the tree are rejected."""
        with pytest.raises(LinkageError, match="node ids"):
            tree_pruning_points(small_tree(), [9])

    def test_points_cached_read_only(self):
        """Test point arrays are frozen."""
        points = small_tree().points(6)

        with pytest.raises(ValueError):
            points[0] = 0
        assert isinstance(points, np.ndarray)


def deep_chain(n: int) -> Dendrogram:
    """Tree that adds one point at a time: ((0, 1), 2), 3) ..."""
    builder = DendrogramBuilder(n, algorithm="chain")
    current = 0
    for point in range(1, n):
        current = builder.record([current, point], point).node_id
    return builder.build()


class TestDeepTrees:
    """Test cases for trees deeper than the interpreter's recursion limit."""

    def test_points_of_root(self):
        """Test the root's point set on a 3000-level chain."""
        tree = deep_chain(3000)

        assert tree.points(tree.root).tolist() == list(range(3000))
        assert tree.min_member(tree.root) == 0
        assert tree.size(tree.root) == 3000
        assert tree.size(tree.root - 1) == 2999

    def test_min_member_without_points(self):
        """Test smallest members and sizes come from the index built at audit time."""
        tree = small_tree()

        assert [tree.min_member(node) for node in range(tree.node_count)] == [0, 1, 2, 3, 4, 0, 2, 0]
        assert [tree.size(node) for node in range(tree.node_count)] == [1, 1, 1, 1, 1, 2, 3, 5]

    def test_cached_descendants_reused(self):
        """Test a parent's points are right after a child was cached."""
        tree = deep_chain(2000)
        tree.points(1500)

        assert tree.points(tree.root).tolist() == list(range(2000))

    def test_pruning_of_deep_chain(self):
        """Test a 2-pruning of a deep chain is labeled without recursion."""
        tree = deep_chain(2500)

        labels = pruning_labeling(tree, [tree.root - 1, 2499])

        assert labels[:2499].tolist() == [1] * 2499
        assert labels[2499] == 2
