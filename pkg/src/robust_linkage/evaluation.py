"""
Evaluation protocol.

Classification error of a flat clustering is one minus the best one-to-one
matching between predicted and true clusters. A hierarchy is scored by its
best pruning into k clusters, found with a dynamic program over
(tree node, set of target labels used).
"""

import itertools
import logging
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, Field
from scipy.optimize import linear_sum_assignment

from .baseline import linkage_from_similarity
from .config import ClusteringConfig, get_config
from .dendrogram import Dendrogram, pruning_labeling
from .errors import ErrorFactory, ParamsTooLarge
from .models import AIStatSpec, ConfusionTable, Labeling, LinkageMethod, NoiseParams, SimilarityMatrix
from .rmnl import rmnl_cluster
from .synth import generate_aistat

logger = logging.getLogger(__name__)

# Target clusterings with more labels make the label-subset state too large
MAX_TARGET_LABELS = 10

# Marks an infeasible (count, label set) state
INFEASIBLE = -1

# AIStat sweep levels i/256 for i = 0..8
FAMILY_LEVELS = [i / 256 for i in range(9)]


def classification_error(pred: Labeling, target: Labeling) -> float:
    """
    Fraction of points misplaced under the best cluster matching.

    Args:
        pred: Predicted clustering
        target: Target clustering over the same points

    Returns:
        1 - (maximum one-to-one matching weight) / n, in [0, 1]
    """
    table = ConfusionTable.from_labelings(pred, target)
    rows, cols = linear_sum_assignment(table.counts, maximize=True)
    return 1.0 - int(table.counts[rows, cols].sum()) / table.n


def pruning_error(tree: Dendrogram, target: Labeling, pruning: Sequence[int]) -> float:
    """Classification error of the clustering given by a pruning."""
    return classification_error(Labeling(labels=pruning_labeling(tree, pruning), k=len(pruning)), target)


def _disjoint_pairs(labels: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All (a, b, a | b) with disjoint label sets a and b."""
    masks = np.arange(1 << labels)
    left, right = np.meshgrid(masks, masks, indexing="ij")
    keep = (left & right) == 0
    return left[keep], right[keep], (left | right)[keep]


class _PruningTable:
    """Per-node tables best[s][mask]: most matched points using s pruning nodes below the node and exactly the labels in mask."""

    def __init__(self, tree: Dendrogram, target: Labeling, k: int):
        self.tree = tree
        self.k = k
        self.labels = target.k
        self.width = 1 << target.k
        self.pairs = _disjoint_pairs(target.k)
        self.weights = np.zeros((tree.node_count, target.k), dtype=np.int64)
        self.weights[np.arange(tree.n), target.labels - 1] = 1
        self.best: List[np.ndarray] = []
        self.prefixes: Dict[int, List[np.ndarray]] = {}

        for node in tree.nodes_postorder():
            if tree.is_leaf(node):
                self.best.append(self._single(node))
                continue
            children = tree.children(node)
            self.weights[node] = self.weights[children].sum(axis=0)
            single = self._single(node)
            folds = [self.best[children[0]]]
            for child in children[1:]:
                folds.append(self._combine(folds[-1], self.best[child]))
            self.prefixes[node] = folds
            self.best.append(np.maximum(folds[-1], single))

    def _single(self, node: int) -> np.ndarray:
        """The node itself as one pruning cluster, unmatched or matched to one label."""
        table = np.full((self.k + 1, self.width), INFEASIBLE, dtype=np.int64)
        table[1, 0] = 0
        for label in range(self.labels):
            table[1, 1 << label] = self.weights[node, label]
        return table

    def _combine(self, first: np.ndarray, second: np.ndarray) -> np.ndarray:
        left, right, union = self.pairs
        result = np.full((self.k + 1, self.width), INFEASIBLE, dtype=np.int64)
        for s1 in range(1, self.k):
            for s2 in range(1, self.k - s1 + 1):
                a = first[s1, left]
                b = second[s2, right]
                ok = (a >= 0) & (b >= 0)
                if np.any(ok):
                    np.maximum.at(result[s1 + s2], union[ok], a[ok] + b[ok])
        return result

    def pruning(self, node: int, s: int, mask: int) -> List[int]:
        """Recover the pruning nodes achieving best[node][s][mask]."""
        value = self.best[node][s, mask]
        if s == 1 and self._single(node)[1, mask] == value:
            return [node]
        children = self.tree.children(node)
        tail: List[int] = []
        for index in range(len(children) - 1, 0, -1):
            s, mask, value, part = self._split(node, index, s, mask, value)
            tail = part + tail
        return self.pruning(children[0], s, mask) + tail

    def _split(self, node: int, index: int, s: int, mask: int, value: int) -> Tuple[int, int, int, List[int]]:
        """Peel child `index` off the prefix fold; returns the prefix's (s, mask, value) and the child's nodes."""
        children = self.tree.children(node)
        before = self.prefixes[node][index - 1]
        last = self.best[children[index]]
        for s1 in range(1, s):
            sub = mask
            while True:
                a, b = before[s1, sub], last[s - s1, mask ^ sub]
                if a >= 0 and b >= 0 and a + b == value:
                    return s1, sub, int(a), self.pruning(children[index], s - s1, mask ^ sub)
                if sub == 0:
                    break
                sub = (sub - 1) & mask
        raise ErrorFactory.validation_error("pruning", node, "no decomposition matches the table")


def best_pruning_error(tree: Dendrogram, target: Labeling, k: int) -> Tuple[float, List[int]]:
    """
    Minimum classification error over all prunings of a tree into k clusters.

    Args:
        tree: Merge tree over the target's points
        target: Target clustering
        k: Number of pruning nodes

    Returns:
        (error, pruning node ids in ascending order of their smallest point)

    Raises:
        KTooLarge: If no pruning of size k exists
    """
    if tree.n != target.n:
        raise ErrorFactory.validation_error("target", f"{target.n} labels", f"target must label all {tree.n} leaves")
    if k < 1 or k > tree.n:
        raise ErrorFactory.k_too_large(k, tree.n)
    if target.k > MAX_TARGET_LABELS:
        raise ErrorFactory.validation_error("target", target.k, f"best pruning supports at most {MAX_TARGET_LABELS} target clusters")

    table = _PruningTable(tree, target, k)
    root = table.best[tree.root][k]
    if root.max() < 0:
        raise ErrorFactory.k_too_large(k, tree.n)
    mask = int(np.argmax(root))
    pruning = sorted(table.pruning(tree.root, k, mask), key=tree.min_member)
    error = 1.0 - int(root[mask]) / tree.n
    logger.debug(f"best pruning of size {k}: error {error:.4f}")
    return error, pruning


def enumerate_prunings(tree: Dendrogram, k: int) -> Iterator[List[int]]:
    """Yield every pruning with exactly k nodes (exponential; for small trees)."""

    def below(node: int, size: int) -> Iterator[List[int]]:
        if size == 1:
            yield [node]
        children = tree.children(node)
        if not children or size < len(children):
            return
        for split in _compositions(size, len(children)):
            for parts in itertools.product(*(list(below(child, part)) for child, part in zip(children, split))):
                yield [item for part in parts for item in part]

    yield from below(tree.root, k)


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """Ordered ways to write total as a sum of parts positive integers."""
    for cuts in itertools.combinations(range(1, total), parts - 1):
        bounds = (0,) + cuts + (total,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(parts))


def brute_force_pruning_error(tree: Dendrogram, target: Labeling, k: int) -> Tuple[float, List[int]]:
    """Best pruning error by enumerating every pruning of size k."""
    best: Optional[Tuple[float, List[int]]] = None
    for pruning in enumerate_prunings(tree, k):
        error = pruning_error(tree, target, pruning)
        if best is None or error < best[0]:
            best = (error, pruning)
    if best is None:
        raise ErrorFactory.k_too_large(k, tree.n)
    return best


# (similarity, target, config) -> best pruning error
Runner = Callable[[SimilarityMatrix, Labeling, ClusteringConfig], float]


def run_rmnl(sim: SimilarityMatrix, target: Labeling, config: ClusteringConfig) -> float:
    """Best pruning error of robust linkage over the configured (alpha + nu) grid."""
    best = 1.0
    for value in config.sweep_grid:
        try:
            tree = rmnl_cluster(sim, NoiseParams(alpha=value, nu=0.0), config)
        except ParamsTooLarge:
            continue
        best = min(best, best_pruning_error(tree, target, target.k)[0])
    return best


def _linkage_runner(method: LinkageMethod) -> Runner:
    def run(sim: SimilarityMatrix, target: Labeling, config: ClusteringConfig) -> float:
        return best_pruning_error(linkage_from_similarity(sim, method), target, target.k)[0]

    return run


RUNNERS: Dict[str, Runner] = {"rmnl": run_rmnl, **{method.value: _linkage_runner(method) for method in LinkageMethod}}

# (level, seed) -> (similarity, target)
Generator = Callable[[float, int], Tuple[SimilarityMatrix, Labeling]]


def aistat_family(family: str, n: int = 512) -> Generator:
    """
    Instance generator for one AIStat noise family.

    Family a raises alpha by the level, b flips a level fraction of the
    documents and c does both.
    """
    if family not in ("a", "b", "c"):
        raise ErrorFactory.validation_error("family", family, "family must be a, b or c")

    def generate(level: float, seed: int) -> Tuple[SimilarityMatrix, Labeling]:
        extra_alpha = level if family in ("a", "c") else 0.0
        extra_nu = level if family in ("b", "c") else 0.0
        instance = generate_aistat(AIStatSpec(n=n, extra_alpha=extra_alpha, extra_nu=extra_nu, seed=seed))
        return instance.similarity, instance.targets["ai_stat"]

    return generate


class ErrorTable(BaseModel):
    """Mean error per noise level (rows) and algorithm (columns)."""

    columns: List[str] = Field(..., description="'level' followed by algorithm names")
    rows: List[List[float]] = Field(default_factory=list, description="One row per level")


def _run_cell(generator: Generator, algorithms: Sequence[str], level: float, seed: int, config: ClusteringConfig) -> Dict[str, float]:
    sim, target = generator(level, seed)
    errors = {name: RUNNERS[name](sim, target, config) for name in algorithms}
    logger.info(f"sweep cell level={level:.5f} seed={seed}: " + ", ".join(f"{name}={value:.4f}" for name, value in errors.items()))
    return errors


def noise_sweep(
    algorithms: Sequence[str],
    generator: Generator,
    levels: Sequence[float],
    seeds: Sequence[int],
    config: Optional[ClusteringConfig] = None,
) -> ErrorTable:
    """
    Mean best-pruning error of each algorithm at each noise level.

    Args:
        algorithms: Runner names from RUNNERS
        generator: Builds (similarity, target) for a level and a seed
        levels: Noise levels in ascending order
        seeds: One instance per seed and level
        config: Supplies the threads and the robust linkage grid

    Returns:
        ErrorTable; empty when there are no seeds
    """
    config = config or get_config()
    unknown = [name for name in algorithms if name not in RUNNERS]
    if unknown:
        raise ErrorFactory.validation_error("algorithms", unknown, f"known algorithms are {sorted(RUNNERS)}")
    if list(levels) != sorted(levels):
        raise ErrorFactory.validation_error("levels", list(levels), "levels must be sorted")
    columns = ["level", *algorithms]
    if not seeds:
        return ErrorTable(columns=columns)

    cells = [(level, seed) for level in levels for seed in seeds]
    results = Parallel(n_jobs=config.threads, prefer="threads")(delayed(_run_cell)(generator, algorithms, level, seed, config) for level, seed in cells)

    rows: List[List[float]] = []
    for index, level in enumerate(levels):
        chunk = results[index * len(seeds) : (index + 1) * len(seeds)]
        rows.append([float(level)] + [float(np.mean([cell[name] for cell in chunk])) for name in algorithms])
    return ErrorTable(columns=columns, rows=rows)
