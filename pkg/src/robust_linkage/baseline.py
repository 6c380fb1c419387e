"""
Classical agglomerative linkage: single, average, complete and Ward.

Cluster dissimilarities are maintained with Lance-Williams updates on a
dense matrix. A merged cluster keeps the slot of its smallest member, so
scanning the matrix in row-major order breaks ties by the smallest member
of the left cluster, then of the right one.
"""

import logging
from typing import Set, Union

import numpy as np
from scipy.sparse.csgraph import minimum_spanning_tree

from .blobs import BlobPartition
from .dendrogram import Dendrogram, DendrogramBuilder
from .models import DissimilarityMatrix, Labeling, LinkageMethod, SimilarityMatrix

logger = logging.getLogger(__name__)


def _lance_williams(method: LinkageMethod, dik: np.ndarray, djk: np.ndarray, dij: float, ni: float, nj: float, nk: np.ndarray) -> np.ndarray:
    """Dissimilarity between every cluster k and the union of clusters i and j."""
    if method == LinkageMethod.SINGLE:
        return np.minimum(dik, djk)
    if method == LinkageMethod.COMPLETE:
        return np.maximum(dik, djk)
    if method == LinkageMethod.AVERAGE:
        return (ni * dik + nj * djk) / (ni + nj)
    # Ward on squared Euclidean distances
    return ((ni + nk) * dik + (nj + nk) * djk - nk * dij) / (ni + nj + nk)


def linkage_cluster(d: DissimilarityMatrix, method: Union[LinkageMethod, str]) -> Dendrogram:
    """
    Build a binary merge tree with a classical linkage method.

    Args:
        d: Dissimilarities; for ward they must be squared Euclidean distances
        method: single, average, complete or ward

    Returns:
        Dendrogram with n - 1 binary merges whose thresholds are the merge heights
    """
    method = LinkageMethod(method)
    n = d.n
    builder = DendrogramBuilder(n, algorithm=method.value)
    logger.info(f"{method.value} linkage on {n} points")
    if n == 1:
        return builder.build()

    dist = np.array(d.values, dtype=np.float64, copy=True)
    np.fill_diagonal(dist, np.inf)
    node = np.arange(n, dtype=np.int64)
    size = np.ones(n, dtype=np.float64)
    active = np.ones(n, dtype=bool)

    for _ in range(n - 1):
        i, j = divmod(int(np.argmin(dist)), n)
        height = float(dist[i, j])
        event = builder.record([int(node[i]), int(node[j])], height)

        merged = _lance_williams(method, dist[i], dist[j], height, size[i], size[j], size)
        active[j] = False
        merged[~active] = np.inf
        merged[i] = np.inf
        dist[i, :] = merged
        dist[:, i] = merged
        dist[j, :] = np.inf
        dist[:, j] = np.inf

        size[i] += size[j]
        node[i] = event.node_id

    return builder.build()


def linkage_from_similarity(sim: SimilarityMatrix, method: Union[LinkageMethod, str]) -> Dendrogram:
    """Run a linkage method on the similarity-adapted dissimilarities d = 1 - sim."""
    return linkage_cluster(DissimilarityMatrix.from_similarity(sim), method)


def single_linkage_mst(d: DissimilarityMatrix) -> Dendrogram:
    """
    Single linkage through Kruskal's algorithm on a minimum spanning tree.

    Zero off-diagonal dissimilarities are treated as missing edges by the
    sparse spanning-tree routine, so inputs should be strictly positive off
    the diagonal.
    """
    n = d.n
    blobs = BlobPartition(n, algorithm="single-mst")
    tree = minimum_spanning_tree(d.values).tocoo()
    edges = sorted(zip(tree.data.tolist(), tree.row.tolist(), tree.col.tolist()), key=lambda e: (e[0], min(e[1], e[2]), max(e[1], e[2])))
    for weight, a, b in edges:
        left, right = blobs.blob_of(a), blobs.blob_of(b)
        if left != right:
            blobs.merge([left, right], weight)
    return blobs.builder.build()


def cluster_sets(tree: Dendrogram) -> Set[frozenset]:
    """Point sets of all internal nodes."""
    return {frozenset(tree.points(node).tolist()) for node in range(tree.n, tree.node_count)}


def matched_pairs_failure_check(tree: Dendrogram, target: Labeling) -> bool:
    """
    Detect the matched-pairs failure signature.

    Args:
        tree: A merge tree over the instance
        target: Target clustering

    Returns:
        True iff each of the first n/2 merges joins two single points with
        different target labels
    """
    count = tree.n // 2
    if count == 0 or len(tree.merges) < count:
        return False
    for event in tree.merges[:count]:
        if len(event.children) != 2 or not all(tree.is_leaf(child) for child in event.children):
            return False
        left, right = event.children
        if target.labels[left] == target.labels[right]:
            return False
    return True

