"""
Inductive clustering from a uniform sample.

A uniform sample of the instance space is clustered with doubled noise
parameters. Any other point is placed in the sample tree by starting at
the root and repeatedly moving to the child that holds most of its nearest
sample points.
"""

import logging
import math
from typing import Dict, List, Optional, Protocol, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .config import ClusteringConfig, get_config
from .dendrogram import Dendrogram, tree_pruning_points
from .errors import ErrorFactory
from .evaluation import best_pruning_error, classification_error
from .models import AttributeTable, Labeling, NoiseParams, SimilarityMatrix
from .ranking import rank_vector
from .rmnl import rmnl_cluster
from .validation import scaled_ceil, validate_fraction_param, validate_noise_params

logger = logging.getLogger(__name__)

# Rows of out-of-sample similarities fetched per batch
INSERT_BATCH = 512


class SimilarityOracle(Protocol):
    """Point-pair similarity access over the instance space X."""

    calls: int

    @property
    def size(self) -> int:
        """Number of points N in X."""
        ...

    def block(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        """Similarities between every row point and every column point."""
        ...


class MatrixOracle:
    """Oracle backed by an in-memory similarity matrix."""

    def __init__(self, sim: SimilarityMatrix):
        self.values = sim.values
        self.calls = 0

    @property
    def size(self) -> int:
        return int(self.values.shape[0])

    def block(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        self.calls += len(rows) * len(cols)
        return self.values[np.ix_(rows, cols)]


class AttributeOracle:
    """
    Oracle computing similarities from an attribute table on demand.

    sim(x, y) = 1 - 2 |x - y|^2 / D, with D the squared diagonal of the
    table's bounding box, so values stay in [-1, 1].
    """

    def __init__(self, table: AttributeTable):
        self.table = table
        self.calls = 0

    @property
    def size(self) -> int:
        return self.table.n

    def block(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        self.calls += len(rows) * len(cols)
        return self.table.similarity_block(rows, cols)


class InductiveModel(BaseModel):
    """Sample tree plus what is needed to place new points in it."""

    sample_ids: np.ndarray = Field(..., description="Sorted ids in X of the distinct sampled points")
    tree: Dendrogram = Field(..., description="Tree over the sample; leaf i is sample_ids[i]")
    alpha: float = Field(..., description="Original alpha")
    nu: float = Field(..., description="Original nu")
    insertion_k: int = Field(..., description="Size of N_S(x)")
    population: int = Field(..., description="N = |X|")
    draws: int = Field(..., description="Number of draws before deduplication")
    similarity_evaluations: int = Field(default=0, description="Similarities the oracle served while fitting")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def n(self) -> int:
        """Effective sample size after deduplication."""
        return int(len(self.sample_ids))


def required_sample_size(alpha: float, nu: float, delta: float, constant: Optional[float] = None) -> int:
    """
    Sample size C / eta * ln(1 / (delta * eta)) with eta = min(alpha, nu).

    Args:
        alpha: Neighborhood noise fraction in (0, 1)
        nu: Bad-point fraction in (0, 1)
        delta: Failure probability in (0, 1)
        constant: C (configured sample_size_constant when omitted)

    Returns:
        The size rounded up, at least 1
    """
    for name, value in (("alpha", alpha), ("nu", nu), ("delta", delta)):
        validate_fraction_param(value, name, open_low=True)
    if constant is None:
        constant = get_config().sample_size_constant
    eta = min(alpha, nu)
    return max(1, math.ceil(constant / eta * math.log(1.0 / (delta * eta))))


def fit_inductive(oracle: SimilarityOracle, N: int, n: int, alpha: float, nu: float, seed: int, config: Optional[ClusteringConfig] = None) -> InductiveModel:
    """
    Cluster a uniform sample of X with (2 alpha, 2 nu).

    Args:
        oracle: Similarity access over X
        N: Number of points in X
        n: Number of i.i.d. uniform draws (with replacement, then deduplicated);
            n >= N takes all of X
        alpha: Original alpha
        nu: Original nu
        seed: PRNG seed
        config: Algorithm knobs

    Returns:
        InductiveModel over the distinct sampled points

    Raises:
        ParamsTooLarge: If 12(alpha+nu)n + 1 > n - 1
    """
    config = config or get_config()
    params = NoiseParams(alpha=alpha, nu=nu)
    doubled = params.doubled()
    if n < 1:
        raise ErrorFactory.validation_error("sample_n", n, "sample size must be positive")
    validate_noise_params(doubled.alpha, doubled.nu, min(n, N), config.t_init_factor)

    if n >= N:
        ids = np.arange(N, dtype=np.int64)
    else:
        rng = np.random.default_rng(seed)
        ids = np.unique(rng.integers(0, N, size=n))
    logger.info(f"inductive: {n} draws from N={N} gave {len(ids)} distinct points")

    before = oracle.calls
    sample_sim = SimilarityMatrix(values=oracle.block(ids, ids))
    tree = rmnl_cluster(sample_sim, doubled, config)

    insertion = doubled if config.insertion_params == "doubled" else params
    insertion_k = min(len(ids), max(1, scaled_ceil(config.t_init_factor, insertion.alpha, insertion.nu, len(ids))))
    ids.setflags(write=False)
    return InductiveModel(
        sample_ids=ids,
        tree=tree,
        alpha=alpha,
        nu=nu,
        insertion_k=insertion_k,
        population=N,
        draws=n,
        similarity_evaluations=oracle.calls - before,
    )


def insert_point(model: InductiveModel, sims_to_sample: np.ndarray) -> List[int]:
    """
    Place a point in the sample tree by majority descent.

    Args:
        model: Fitted model
        sims_to_sample: Similarities to the sampled points, aligned with sample_ids

    Returns:
        Node ids from the root down to a leaf; the point belongs to exactly
        the clusters on this path
    """
    tree = model.tree
    nearest = rank_vector(sims_to_sample)[: model.insertion_k]
    marked = np.zeros(tree.n, dtype=bool)
    marked[nearest] = True

    node = tree.root
    path = [node]
    while not tree.is_leaf(node):
        children = sorted(tree.children(node), key=tree.min_member)
        votes = [int(marked[tree.points(child)].sum()) for child in children]
        node = children[int(np.argmax(votes))]
        path.append(node)
    return path


def _pruning_index(tree: Dendrogram, pruning: Sequence[int]) -> Dict[int, int]:
    tree_pruning_points(tree, pruning)
    return {int(node): index for index, node in enumerate(pruning)}


def extend_labeling(model: InductiveModel, oracle: SimilarityOracle, pruning: Sequence[int]) -> Labeling:
    """
    Label every point of X by the pruning node on its descent path.

    Args:
        model: Fitted model
        oracle: Similarity access over X
        pruning: Valid pruning of model.tree

    Returns:
        Labeling over X with label i + 1 for pruning[i]; sampled points keep
        the label of the node holding their leaf
    """
    tree = model.tree
    index = _pruning_index(tree, pruning)
    labels = np.zeros(model.population, dtype=np.int64)

    for leaf, point in enumerate(model.sample_ids.tolist()):
        for node in tree.ancestors(leaf):
            if node in index:
                labels[point] = index[node] + 1
                break

    sampled = np.zeros(model.population, dtype=bool)
    sampled[model.sample_ids] = True
    rest = np.flatnonzero(~sampled)
    for start in range(0, len(rest), INSERT_BATCH):
        batch = rest[start : start + INSERT_BATCH]
        rows = oracle.block(batch, model.sample_ids)
        for point, sims in zip(batch.tolist(), rows):
            for node in insert_point(model, sims):
                if node in index:
                    labels[point] = index[node] + 1
                    break
    logger.info(f"inductive: labeled {len(rest)} out-of-sample points into {len(pruning)} clusters")
    return Labeling(labels=labels, k=len(pruning))


class InductiveRun(BaseModel):
    """Outcome of one fit-and-extend run against a target."""

    seed: int
    sample_size: int
    sample_error: float
    extended_error: float
    similarity_evaluations: int
    evaluated_fraction: float


def run_inductive(
    oracle: SimilarityOracle, target: Labeling, n: int, alpha: float, nu: float, seed: int, config: Optional[ClusteringConfig] = None
) -> Tuple[InductiveRun, InductiveModel, Labeling]:
    """
    Fit on a sample, choose the best pruning for the sample-induced target and extend it to X.

    Args:
        oracle: Similarity access over X
        target: Target clustering of X
        n: Number of draws
        alpha: Original alpha
        nu: Original nu
        seed: PRNG seed
        config: Algorithm knobs

    Returns:
        (run summary, fitted model, extended labeling of X)
    """
    start = oracle.calls
    model = fit_inductive(oracle, target.n, n, alpha, nu, seed, config)
    sample_target = target.restrict(model.sample_ids)
    k = min(target.k, model.n)
    sample_error, pruning = best_pruning_error(model.tree, sample_target, k)
    extended = extend_labeling(model, oracle, pruning)
    used = oracle.calls - start
    run = InductiveRun(
        seed=seed,
        sample_size=model.n,
        sample_error=sample_error,
        extended_error=classification_error(extended, target),
        similarity_evaluations=used,
        evaluated_fraction=used / float(target.n) ** 2,
    )
    logger.info(f"inductive seed {seed}: sample error {sample_error:.4f}, extended error {run.extended_error:.4f}")
    return run, model, extended


def evaluate_inductive(
    oracle: SimilarityOracle, target: Labeling, n: int, alpha: float, nu: float, seeds: Sequence[int], config: Optional[ClusteringConfig] = None
) -> List[InductiveRun]:
    """Run the inductive protocol once per seed."""
    return [run_inductive(oracle, target, n, alpha, nu, seed, config)[0] for seed in seeds]
