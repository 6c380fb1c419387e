"""
Robust median neighborhood linkage.

The algorithm keeps a partition of the points into blobs and raises a
threshold t one step at a time. At each t it links points whose t nearest
neighbors overlap almost completely (graph F_t), links blobs through a
median test over common F_t neighbors (graph H_t) and merges linked blobs
that are large enough. All neighbor counting is done with dense 0/1 matrix
products:

    N_t  = I_t I_t^T
    NS_t = F_t F_t^T
    S_t  = F_t FC_t^T + FC_t F_t^T

where I_t marks each point's t nearest neighbors and FC_t keeps the F_t
edges that stay inside one blob.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .blobs import BlobPartition
from .config import ClusteringConfig, get_config
from .dendrogram import Dendrogram
from .errors import NoNonSingletonBlob
from .models import MergeEvent, NoiseParams, SimilarityMatrix, ThresholdMargins
from .ranking import NeighborRanking, build_neighbor_ranking

logger = logging.getLogger(__name__)

PairKey = Tuple[float, int, int, int, int]


def _product_dtype(n: int) -> type:
    # Integer counts up to n are exact in float32 below 2**24
    return np.float32 if n < 2**24 else np.float64


def _count_product(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Multiply 0/1 matrices with BLAS and return the integer counts."""
    return np.rint(left @ right).astype(np.int64)


def lower_median(values: np.ndarray, axis: Optional[int] = None) -> Union[int, float, np.ndarray]:
    """
    Return the ceil(m/2)-th smallest of m values.

    Args:
        values: Array of values
        axis: Axis to reduce, or None for all values

    Returns:
        Scalar for axis=None, otherwise an array with the axis removed
    """
    if axis is None:
        flat = np.asarray(values).ravel()
        kth = (len(flat) + 1) // 2 - 1
        return np.partition(flat, kth)[kth].item()
    m = values.shape[axis]
    kth = (m + 1) // 2 - 1
    return np.take(np.partition(values, kth, axis=axis), kth, axis=axis)


def compute_margins(params: NoiseParams, n: int, config: Optional[ClusteringConfig] = None) -> ThresholdMargins:
    """Derive the run's integer thresholds from the configured factors."""
    config = config or get_config()
    return params.margins(
        n,
        t_init_factor=config.t_init_factor,
        f_margin_factor=config.f_margin_factor,
        h_margin_factor=config.h_margin_factor,
        merge_size_factor=config.merge_size_factor,
    )


@dataclass
class ThresholdState:
    """Matrices of one threshold t."""

    t: int
    indicator: np.ndarray  # I_t
    common: np.ndarray  # N_t
    point_graph: np.ndarray  # F_t, bool
    shared: np.ndarray  # NS_t
    same_blob: Optional[np.ndarray] = None  # FC_t, bool
    statistic: Optional[np.ndarray] = None  # S_t
    similarity: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return int(self.point_graph.shape[0])


def build_F(rank: NeighborRanking, t: int, margin2: int, include_self: bool = True) -> ThresholdState:
    """
    Build I_t, N_t, F_t and NS_t.

    Args:
        rank: Neighbor ranking of all points
        t: Threshold, 1 <= t <= n - 1
        margin2: Allowed shortfall; F_t[x][y] = 1 iff N_t[x][y] >= t - margin2
        include_self: Whether a point is among its own t nearest neighbors

    Returns:
        ThresholdState without the blob-dependent matrices
    """
    dtype = _product_dtype(rank.n)
    indicator = rank.indicator(t, include_self=include_self, dtype=dtype)
    common = _count_product(indicator, indicator.T)
    point_graph = common >= t - margin2
    edges = point_graph.astype(dtype)
    shared = _count_product(edges, edges.T)
    return ThresholdState(t=t, indicator=indicator, common=common, point_graph=point_graph, shared=shared)


def refresh_statistic(state: ThresholdState, labels: np.ndarray, rows: Optional[np.ndarray] = None) -> None:
    """
    Recompute FC_t and S_t for the blob labels.

    Args:
        state: State to update in place
        labels: Blob id of every point
        rows: Points whose blob changed since the last refresh; all rows are
            recomputed when omitted
    """
    dtype = _product_dtype(state.n)
    state.same_blob = state.point_graph & (labels[:, None] == labels[None, :])
    edges = state.point_graph.astype(dtype)
    inside = state.same_blob.astype(dtype)
    if rows is None or state.statistic is None:
        state.statistic = _count_product(edges, inside.T) + _count_product(inside, edges.T)
        return
    part = _count_product(edges[rows], inside.T) + _count_product(inside[rows], edges.T)
    state.statistic[rows, :] = part
    state.statistic[:, rows] = part.T


class BlobGraph:
    """
    H_t over the current blobs.

    Two singletons are linked when they share more than margin1 common F_t
    neighbors; any other pair is linked when the lower median of S_t over
    all cross pairs exceeds a quarter of their combined size.
    """

    def __init__(self, blobs: BlobPartition, state: ThresholdState, margin1: int):
        self.blobs = blobs
        self.state = state
        self.margin1 = margin1

        singles = np.array(blobs.singletons(), dtype=np.int64)
        self._single_ids = singles
        self._single_pos = {int(point): index for index, point in enumerate(singles)}
        adjacency = state.shared[np.ix_(singles, singles)] > margin1
        np.fill_diagonal(adjacency, False)
        self._single_adj = adjacency
        self._single_alive = np.ones(len(singles), dtype=bool)
        self._median: Dict[int, Dict[int, int]] = {}
        for blob in blobs.non_singletons():
            self.add_blob(blob)

    def _alive_singletons(self) -> np.ndarray:
        return self._single_ids[self._single_alive]

    def add_blob(self, blob: int) -> None:
        """Compute medians between a non-singleton blob and every other blob."""
        assert self.state.statistic is not None
        rows = self.state.statistic[self.blobs.members(blob)]
        entry = self._median.setdefault(blob, {})
        alive = self._alive_singletons()
        if len(alive):
            for point, med in zip(alive.tolist(), lower_median(rows[:, alive], axis=0).tolist()):
                entry[point] = int(med)
                self._median.setdefault(point, {})[blob] = int(med)
        for other in self.blobs.non_singletons():
            if other == blob or other in entry:
                continue
            med = int(lower_median(rows[:, self.blobs.members(other)]))
            entry[other] = med
            self._median.setdefault(other, {})[blob] = med

    def remove_blob(self, blob: int) -> None:
        """Drop a blob that is about to be merged."""
        position = self._single_pos.get(blob)
        if position is not None and self.blobs.is_singleton(blob):
            self._single_alive[position] = False
        for other in self._median.pop(blob, {}):
            self._median.get(other, {}).pop(blob, None)

    def median(self, u: int, v: int) -> int:
        """Lower median of S_t over C_u x C_v."""
        if self.blobs.is_singleton(u) and self.blobs.is_singleton(v):
            assert self.state.statistic is not None
            return int(self.state.statistic[u, v])
        return self._median[u][v]

    def connected(self, u: int, v: int) -> bool:
        """Whether H_t links two blobs."""
        if self.blobs.is_singleton(u) and self.blobs.is_singleton(v):
            return bool(self._single_adj[self._single_pos[u], self._single_pos[v]])
        return 4 * self._median[u][v] > self.blobs.size(u) + self.blobs.size(v)

    def _pair_key(self, u: int, v: int, med: int) -> PairKey:
        total = self.blobs.size(u) + self.blobs.size(v)
        first, second = min(u, v), max(u, v)
        return (-med / total, total, min(self.blobs.min_member(u), self.blobs.min_member(v)), first, second)

    def best_pair(self, min_size: int, linked_only: bool = True) -> Optional[Tuple[int, int]]:
        """
        Find the pair with the highest normalized median.

        Args:
            min_size: Combined size must exceed this
            linked_only: Restrict to H_t edges with at least one non-singleton;
                otherwise every pair of blobs competes

        Returns:
            (u, v) or None when no pair qualifies; ties go to the smaller
            combined size, then the smaller minimum member
        """
        best_key: Optional[PairKey] = None
        best: Optional[Tuple[int, int]] = None
        for u in self.blobs.non_singletons():
            for v, med in self._median[u].items():
                if not self.blobs.is_singleton(v) and v < u:
                    continue
                total = self.blobs.size(u) + self.blobs.size(v)
                if linked_only and (total <= min_size or 4 * med <= total):
                    continue
                key = self._pair_key(u, v, med)
                if best_key is None or key < best_key:
                    best_key, best = key, (u, v)

        if not linked_only:
            alive = self._alive_singletons()
            if len(alive) >= 2:
                assert self.state.statistic is not None
                block = self.state.statistic[np.ix_(alive, alive)].astype(np.float64)
                block[np.tril_indices(len(alive))] = -np.inf
                row, col = np.unravel_index(int(np.argmax(block)), block.shape)
                u, v = int(alive[row]), int(alive[col])
                key = self._pair_key(u, v, int(self.state.statistic[u, v]))
                if best_key is None or key < best_key:
                    best_key, best = key, (u, v)
        return best

    def components(self) -> List[List[int]]:
        """Connected components of H_t as lists of blob ids, ordered by smallest member."""
        ids = self.blobs.blob_ids
        index = {blob: position for position, blob in enumerate(ids)}
        rows: List[int] = []
        cols: List[int] = []

        alive_pos = np.flatnonzero(self._single_alive)
        linked = np.triu(self._single_adj[np.ix_(alive_pos, alive_pos)], k=1)
        for a, b in zip(*np.nonzero(linked)):
            rows.append(index[int(self._single_ids[alive_pos[a]])])
            cols.append(index[int(self._single_ids[alive_pos[b]])])

        for u in self.blobs.non_singletons():
            for v in self._median[u]:
                if self.connected(u, v):
                    rows.append(index[u])
                    cols.append(index[v])

        graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(ids), len(ids)))
        count, labels = connected_components(graph, directed=False)
        groups: List[List[int]] = [[] for _ in range(count)]
        for position, label in enumerate(labels):
            groups[label].append(ids[position])
        return sorted(groups, key=lambda group: min(self.blobs.min_member(blob) for blob in group))


def build_H(state: ThresholdState, blobs: BlobPartition, margin1: int) -> BlobGraph:
    """Build the blob graph H_t for the current partition."""
    return BlobGraph(blobs, state, margin1)


def _merge_and_refresh(blobs: BlobPartition, graph: BlobGraph, state: ThresholdState, group: Sequence[int], threshold: int) -> MergeEvent:
    for blob in group:
        graph.remove_blob(blob)
    event = blobs.merge(group, threshold)
    refresh_statistic(state, blobs.labels(), rows=blobs.members(event.node_id))
    graph.add_blob(event.node_id)
    return event


def merge_step(blobs: BlobPartition, H: BlobGraph, state: ThresholdState, min_size: int, merge_order: str = "best_first") -> List[MergeEvent]:
    """
    Merge linked blobs at the current threshold.

    With best_first ordering, the linked pair (not both singletons, combined
    size above min_size) with the largest median S_t / (|C_u| + |C_v|) is
    merged and S_t and H_t are recomputed, until no such pair is left. Then,
    in both orderings, every H_t component of two or more blobs holding at
    least min_size points is merged into one blob.

    Args:
        blobs: Partition to update
        H: Blob graph of the current state
        state: Threshold state, updated in place
        min_size: Size bound for merges
        merge_order: best_first or component

    Returns:
        The merge events in order
    """
    events: List[MergeEvent] = []
    if merge_order == "best_first":
        while (pair := H.best_pair(min_size)) is not None:
            events.append(_merge_and_refresh(blobs, H, state, pair, state.t))

    for component in H.components():
        if len(component) < 2 or sum(blobs.size(blob) for blob in component) < min_size:
            continue
        events.append(_merge_and_refresh(blobs, H, state, component, state.t))
    return events


def singleton_speedup(blobs: BlobPartition, state: ThresholdState, t: int, min_size: int) -> List[MergeEvent]:
    """
    Attach leftover singletons once few of them remain.

    When fewer than max(min_size, t/2) singletons are left, each joins the
    non-singleton blob with the highest median similarity to it, ties to the
    blob with the smallest member. Targets are chosen against the blobs as
    they are before any attachment.

    Raises:
        NoNonSingletonBlob: If the rule fires while every blob is a singleton
    """
    singles = blobs.singletons()
    if not singles or 2 * len(singles) >= max(2 * min_size, t):
        return []
    targets = sorted(blobs.non_singletons(), key=blobs.min_member)
    if not targets:
        raise NoNonSingletonBlob(f"{len(singles)} singletons left at t={t} and no non-singleton blob to attach them to")
    assert state.similarity is not None

    rows = np.array(singles, dtype=np.int64)
    scores = np.stack([lower_median(state.similarity[np.ix_(rows, blobs.members(target))], axis=1) for target in targets])
    choice = np.argmax(scores, axis=0)

    current = {target: target for target in targets}
    events: List[MergeEvent] = []
    for point, position in zip(singles, choice.tolist()):
        target = targets[position]
        event = blobs.merge([current[target], point], t)
        current[target] = event.node_id
        events.append(event)
    logger.debug(f"t={t}: attached {len(singles)} singletons")
    return events


def _finish(blobs: BlobPartition, ranking: NeighborRanking, margins: ThresholdMargins, sim: SimilarityMatrix, include_self: bool) -> None:
    t = sim.n - 1
    logger.warning(f"{len(blobs)} blobs remain after the last threshold; merging best pairs at t={t}")
    state = build_F(ranking, t, margins.f_margin, include_self=include_self)
    state.similarity = sim.values
    refresh_statistic(state, blobs.labels())
    graph = build_H(state, blobs, margins.h_margin)
    while len(blobs) > 1:
        pair = graph.best_pair(margins.min_size, linked_only=False)
        assert pair is not None
        _merge_and_refresh(blobs, graph, state, pair, t)


def rmnl_cluster(sim: SimilarityMatrix, params: NoiseParams, config: Optional[ClusteringConfig] = None) -> Dendrogram:
    """
    Build a hierarchy with robust median neighborhood linkage.

    Args:
        sim: Similarity matrix
        params: Noise fractions alpha and nu
        config: Algorithm knobs (global configuration when omitted)

    Returns:
        Dendrogram over all points; every node records the threshold t at
        which it was created

    Raises:
        ParamsTooLarge: If 6(alpha+nu)n + 1 > n - 1
    """
    config = config or get_config()
    n = sim.n
    margins = compute_margins(params, n, config)
    ranking = build_neighbor_ranking(sim)
    blobs = BlobPartition(n, algorithm="rmnl")
    logger.info(
        f"rmnl: n={n} alpha={params.alpha} nu={params.nu} t_init={margins.t_init} "
        f"f_margin={margins.f_margin} h_margin={margins.h_margin} min_size={margins.min_size}"
    )

    t = margins.t_init
    while len(blobs) > 1 and t <= n - 1:
        state = build_F(ranking, t, margins.f_margin, include_self=config.self_in_neighbors)
        state.similarity = sim.values
        refresh_statistic(state, blobs.labels())
        graph = build_H(state, blobs, margins.h_margin)
        events = merge_step(blobs, graph, state, margins.min_size, config.merge_order)
        if config.speedup_enabled and len(blobs) > 1:
            try:
                events.extend(singleton_speedup(blobs, state, t, margins.min_size))
            except NoNonSingletonBlob as e:
                logger.debug(f"speedup skipped: {e}")
        if events:
            logger.debug(f"t={t}: {len(events)} merges, {len(blobs)} blobs left")
        t += 1

    if len(blobs) > 1:
        _finish(blobs, ranking, margins, sim, config.self_in_neighbors)

    tree = blobs.builder.build()
    logger.info(f"rmnl: built tree with {len(tree.merges)} merges, last threshold {tree.threshold(tree.root)}")
    return tree

