"""
Merge trees.

Leaves are points 0..n-1 and the i-th merge creates node n + i. Nodes may
have more than two children when a whole component merges at once.
"""

import logging
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr

from .errors import ErrorFactory, LinkageError
from .models import MergeEvent

logger = logging.getLogger(__name__)


class Dendrogram(BaseModel):
    """Merge tree over n points."""

    n: int = Field(..., description="Number of leaves", gt=0)
    merges: List[MergeEvent] = Field(default_factory=list, description="Internal nodes in creation order")
    algorithm: str = Field(default="", description="Algorithm that produced the tree")

    model_config = ConfigDict(frozen=True)

    _children: Dict[int, List[int]] = PrivateAttr(default_factory=dict)
    _parent: Dict[int, int] = PrivateAttr(default_factory=dict)
    _points: Dict[int, np.ndarray] = PrivateAttr(default_factory=dict)
    _min_member: np.ndarray = PrivateAttr(default=None)
    _size: np.ndarray = PrivateAttr(default=None)

    def model_post_init(self, __context: Any) -> None:
        """Audit node numbering and index the tree."""
        self.audit()

    def audit(self) -> None:
        """
        Check that every node's children partition its point set and the root covers all points.

        Raises:
            LinkageError: On any structural violation
        """
        children: Dict[int, List[int]] = {}
        parent: Dict[int, int] = {}
        for index, event in enumerate(self.merges):
            expected = self.n + index
            if event.node_id != expected or event.step != index:
                raise LinkageError(f"Merge {index} has node id {event.node_id} (expected {expected}) and step {event.step}")
            for child in event.children:
                if child < 0 or child >= expected:
                    raise LinkageError(f"Node {expected} references unknown child {child}")
                if child in parent:
                    raise LinkageError(f"Node {child} has two parents ({parent[child]} and {expected})")
                parent[child] = expected
            children[expected] = list(event.children)

        roots = [node for node in range(self.n + len(self.merges)) if node not in parent]
        if len(roots) != 1:
            raise LinkageError(f"Tree must have exactly one root, found {len(roots)}")

        # Children always have smaller ids, so one pass in id order fills both tables
        min_member = np.arange(self.node_count, dtype=np.int64)
        size = np.ones(self.node_count, dtype=np.int64)
        for node, kids in children.items():
            min_member[node] = min_member[kids].min()
            size[node] = size[kids].sum()

        self._children = children
        self._parent = parent
        self._points = {}
        self._min_member = min_member
        self._size = size

    @property
    def root(self) -> int:
        """Root node id."""
        return self.n + len(self.merges) - 1 if self.merges else 0

    @property
    def node_count(self) -> int:
        """Number of nodes including leaves."""
        return self.n + len(self.merges)

    def is_leaf(self, node: int) -> bool:
        """Whether a node is a point."""
        return node < self.n

    def children(self, node: int) -> List[int]:
        """Children of a node (empty for leaves)."""
        return self._children.get(node, [])

    def parent(self, node: int) -> Optional[int]:
        """Parent of a node (None for the root)."""
        return self._parent.get(node)

    def threshold(self, node: int) -> Union[int, float, None]:
        """Threshold recorded when the node was created."""
        if self.is_leaf(node):
            return None
        return self.merges[node - self.n].threshold

    def points(self, node: int) -> np.ndarray:
        """Sorted point ids below a node."""
        cached = self._points.get(node)
        if cached is not None:
            return cached
        parts: List[np.ndarray] = []
        leaves: List[int] = []
        stack = [node]
        while stack:
            current = stack.pop()
            if self.is_leaf(current):
                leaves.append(current)
            elif current in self._points:
                parts.append(self._points[current])
            else:
                stack.extend(self._children[current])
        parts.append(np.array(leaves, dtype=np.int64))
        result = np.sort(np.concatenate(parts))
        result.setflags(write=False)
        self._points[node] = result
        return result

    def size(self, node: int) -> int:
        """Number of points below a node."""
        return int(self._size[node])

    def min_member(self, node: int) -> int:
        """Smallest point id below a node."""
        return int(self._min_member[node])

    def ancestors(self, node: int) -> List[int]:
        """Path from a node up to the root, the node included."""
        path = [node]
        while (up := self.parent(path[-1])) is not None:
            path.append(up)
        return path

    def nodes_postorder(self) -> List[int]:
        """All nodes with every child before its parent."""
        return list(range(self.node_count))

    def is_binary(self) -> bool:
        """Whether every merge joins exactly two nodes."""
        return all(len(event.children) == 2 for event in self.merges)

    def audit_partition(self) -> None:
        """
        Recursively verify that children of every node partition its points.

        Raises:
            LinkageError: If a node's children overlap or miss points
        """
        for node in range(self.n, self.node_count):
            parts = [self.points(child) for child in self.children(node)]
            joined = np.concatenate(parts)
            if len(np.unique(joined)) != len(joined) or not np.array_equal(np.sort(joined), self.points(node)):
                raise LinkageError(f"Children of node {node} do not partition its points")
        if len(self.points(self.root)) != self.n:
            raise LinkageError("Root does not cover all points")

    def to_linkage_matrix(self) -> np.ndarray:
        """
        Export a binary tree as a scipy-style (n-1) x 4 linkage matrix.

        Returns:
            Rows of [left, right, threshold, size]

        Raises:
            LinkageError: If the tree has a node with more than two children
        """
        if not self.is_binary():
            raise ErrorFactory.validation_error("tree", self.algorithm or "dendrogram", "only binary trees export to a linkage matrix")
        rows = np.zeros((len(self.merges), 4), dtype=np.float64)
        for index, event in enumerate(self.merges):
            left, right = event.children
            rows[index] = [left, right, float(event.threshold), self.size(event.node_id)]
        return rows


class DendrogramBuilder:
    """Accumulates merges and allocates node ids."""

    def __init__(self, n: int, algorithm: str = ""):
        self.n = n
        self.algorithm = algorithm
        self.events: List[MergeEvent] = []

    @property
    def next_id(self) -> int:
        """Id the next merge will receive."""
        return self.n + len(self.events)

    def record(self, children: Sequence[int], threshold: Union[int, float]) -> MergeEvent:
        """Record a merge of the given nodes and return the created event."""
        event = MergeEvent(step=len(self.events), node_id=self.next_id, children=list(children), threshold=threshold)
        self.events.append(event)
        logger.debug(f"merge {event.step}: node {event.node_id} <- {event.children} at {threshold}")
        return event

    def build(self) -> Dendrogram:
        """Freeze the recorded merges into a Dendrogram."""
        return Dendrogram(n=self.n, merges=list(self.events), algorithm=self.algorithm)


def tree_pruning_points(tree: Dendrogram, node_set: Sequence[int]) -> List[np.ndarray]:
    """
    Return the point sets of a pruning.

    Args:
        tree: The merge tree
        node_set: Node ids forming an antichain that covers all points

    Returns:
        One sorted point array per node, in the given order

    Raises:
        OverlapError: If two nodes share points
        CoverageError: If some point is not covered
    """
    owner = np.full(tree.n, -1, dtype=np.int64)
    result: List[np.ndarray] = []
    for node in node_set:
        if node < 0 or node >= tree.node_count:
            raise ErrorFactory.validation_error("node_set", node, f"node ids must lie in 0..{tree.node_count - 1}")
        points = tree.points(node)
        taken = owner[points]
        if np.any(taken >= 0):
            clash = points[taken >= 0]
            raise ErrorFactory.pruning_overlap(int(taken[taken >= 0][0]), int(node), clash.tolist())
        owner[points] = node
        result.append(points)
    missing = np.flatnonzero(owner < 0)
    if len(missing):
        raise ErrorFactory.pruning_coverage(missing.tolist())
    return result


def pruning_labeling(tree: Dendrogram, node_set: Sequence[int]) -> np.ndarray:
    """Return 1-based labels assigning each point the position of its pruning node."""
    labels = np.zeros(tree.n, dtype=np.int64)
    for index, points in enumerate(tree_pruning_points(tree, node_set)):
        labels[points] = index + 1
    return labels
