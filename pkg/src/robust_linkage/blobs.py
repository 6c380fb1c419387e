"""
Union-find and the evolving blob partition.
"""

from typing import Dict, List, Sequence, Union

import numpy as np

from .dendrogram import DendrogramBuilder
from .models import MergeEvent


class UnionFind:
    """
    Disjoint sets over 0..n-1 with union by rank and path compression.

    Examples
    --------
    >>> uf = UnionFind(6)
    >>> uf.union(1, 2)
    >>> uf.union(2, 3)
    >>> uf.find(3) == uf.find(1)
    True
    >>> uf.find(4) == uf.find(1)
    False
    """

    def __init__(self, n: int) -> None:
        self.parent = np.arange(n, dtype=np.int64)
        self.rank = np.zeros(n, dtype=np.int64)

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = int(self.parent[root])
        while self.parent[x] != root:
            self.parent[x], x = root, int(self.parent[x])
        return root

    def union(self, x: int, y: int) -> int:
        px = self.find(x)
        py = self.find(y)

        if px == py:
            return px

        if self.rank[px] == self.rank[py]:
            self.parent[py] = px
            self.rank[px] += 1
            return px
        elif self.rank[px] > self.rank[py]:
            self.parent[py] = px
            return px
        else:
            self.parent[px] = py
            return py


class BlobPartition:
    """
    Disjoint blobs covering all points, merged bottom-up.

    Blob ids coincide with merge-tree node ids: a point starts as the
    singleton blob carrying its own id and every merge allocates the next
    node id. Single writer.
    """

    def __init__(self, n: int, algorithm: str = ""):
        self.n = n
        self.builder = DendrogramBuilder(n, algorithm)
        self._sets = UnionFind(n)
        self._blob_of_root: Dict[int, int] = {point: point for point in range(n)}
        self._members: Dict[int, np.ndarray] = {point: np.array([point], dtype=np.int64) for point in range(n)}

    def __len__(self) -> int:
        return len(self._members)

    def __contains__(self, blob: int) -> bool:
        return blob in self._members

    @property
    def blob_ids(self) -> List[int]:
        """Current blob ids in ascending order."""
        return sorted(self._members)

    def members(self, blob: int) -> np.ndarray:
        """Sorted point ids of a blob."""
        return self._members[blob]

    def size(self, blob: int) -> int:
        return len(self._members[blob])

    def min_member(self, blob: int) -> int:
        return int(self._members[blob][0])

    def is_singleton(self, blob: int) -> bool:
        return len(self._members[blob]) == 1

    def singletons(self) -> List[int]:
        """Ids of singleton blobs (each equal to its point id)."""
        return [blob for blob in self.blob_ids if self.is_singleton(blob)]

    def non_singletons(self) -> List[int]:
        return [blob for blob in self.blob_ids if not self.is_singleton(blob)]

    def blob_of(self, point: int) -> int:
        """Id of the blob holding a point."""
        return self._blob_of_root[self._sets.find(point)]

    def labels(self) -> np.ndarray:
        """Array mapping each point to the id of its blob."""
        result = np.empty(self.n, dtype=np.int64)
        for blob, points in self._members.items():
            result[points] = blob
        return result

    def merge(self, blobs: Sequence[int], threshold: Union[int, float]) -> MergeEvent:
        """
        Merge two or more blobs into a new one.

        Args:
            blobs: Ids of current blobs
            threshold: Threshold recorded on the merge node

        Returns:
            The merge event; its node_id is the id of the new blob
        """
        children = sorted(set(blobs))
        event = self.builder.record(children, threshold)
        root = -1
        for blob in children:
            point = int(self._members[blob][0])
            del self._blob_of_root[self._sets.find(point)]
            root = point if root < 0 else self._sets.union(root, point)
        self._blob_of_root[root] = event.node_id
        self._members[event.node_id] = np.sort(np.concatenate([self._members.pop(blob) for blob in children]))
        return event
