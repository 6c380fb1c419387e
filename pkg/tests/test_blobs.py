"""
Tests for union-find and the blob partition.
"""

from robust_linkage.blobs import BlobPartition, UnionFind


class TestUnionFind:
    """Test cases for UnionFind."""

    def test_union_and_find(self):
        """Test merged elements share a root."""
        uf = UnionFind(6)
        uf.union(1, 2)
        uf.union(2, 3)

        assert uf.find(3) == uf.find(1)
        assert uf.find(4) != uf.find(1)

    def test_union_same_set(self):
        """Test a union inside one set returns its root."""
        uf = UnionFind(3)
        root = uf.union(0, 1)

        assert uf.union(1, 0) == root


class TestBlobPartition:
    """Test cases for BlobPartition."""

    def test_initial_singletons(self):
        """Test every point starts as its own blob."""
        blobs = BlobPartition(4)

        assert len(blobs) == 4
        assert blobs.singletons() == [0, 1, 2, 3]
        assert blobs.non_singletons() == []
        assert blobs.labels().tolist() == [0, 1, 2, 3]

    def test_merge_allocates_node_ids(self):
        """Test merges create blobs numbered like tree nodes."""
        blobs = BlobPartition(5)

        first = blobs.merge([3, 1], threshold=2)
        second = blobs.merge([first.node_id, 4], threshold=3)

        assert first.node_id == 5
        assert first.children == [1, 3]
        assert second.node_id == 6
        assert blobs.members(6).tolist() == [1, 3, 4]
        assert blobs.min_member(6) == 1
        assert blobs.blob_of(4) == 6
        assert 5 not in blobs
        assert blobs.blob_ids == [0, 2, 6]

    def test_multiway_merge(self):
        """Test merging three blobs at once."""
        blobs = BlobPartition(4)

        event = blobs.merge([0, 1, 2], threshold=1)

        assert event.children == [0, 1, 2]
        assert blobs.size(event.node_id) == 3
        assert blobs.labels().tolist() == [4, 4, 4, 3]
        assert blobs.is_singleton(3)

    def test_builder_tree(self):
        """Test the recorded merges form a valid tree."""
        blobs = BlobPartition(3, algorithm="test")
        event = blobs.merge([0, 2], threshold=1)
        blobs.merge([event.node_id, 1], threshold=2)

        tree = blobs.builder.build()

        assert tree.algorithm == "test"
        assert tree.root == 4
        assert tree.points(3).tolist() == [0, 2]
