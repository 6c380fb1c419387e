"""
Synthetic instances and noise injectors.

All generators are pure functions of their arguments: randomness comes from
numpy's PCG64 generator seeded explicitly, so equal seeds give identical
outputs.
"""

import logging
import math
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .errors import ErrorFactory
from .models import AIStatSpec, AttributeTable, DissimilarityMatrix, Labeling, NoiseKind, SimilarityMatrix
from .properties import check_good_neighborhood
from .validation import exact_fraction, validate_fraction_param

logger = logging.getLogger(__name__)

# Regeneration attempts for planted instances
CERTIFY_ATTEMPTS = 10

# AIStat similarity levels
SAME_AREA = 0.99
SAME_FIELD = 0.8
OTHER_FIELD = 0.5
BOUNDARY_OTHER_FIELD = 0.9
BOUNDARY_SAME_FIELD = 0.6

# Topic-region similarity levels
SAME_REGION = 0.999
SIBLING_REGION = 0.75
SAME_GROUP = 0.5

# Planted-instance similarity levels
PLANTED_WITHIN = 0.9
PLANTED_ACROSS = 0.1
PLANTED_NOISE = 0.95


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


class AIStatInstance(BaseModel):
    """Generated AI/Statistics documents with their targets and planted structure."""

    similarity: SimilarityMatrix
    targets: Dict[str, Labeling] = Field(..., description="ai_stat, ai_pe_ht, l_p_stat and areas")
    subsets: Dict[int, np.ndarray] = Field(..., description="A_p: the area of p minus the bad set, for every good p")
    bad_set: List[int] = Field(default_factory=list, description="Flipped documents")
    boundary: List[int] = Field(default_factory=list, description="Boundary documents")
    spec: AIStatSpec

    model_config = ConfigDict(arbitrary_types_allowed=True)


def generate_aistat(spec: AIStatSpec) -> AIStatInstance:
    """
    Generate the four-area document collection.

    Areas are Learning, Planning (field AI), ParameterEstimation and
    HypothesisTesting (field Statistics), laid out as consecutive id ranges.
    Similarities are built in order: base levels, boundary documents,
    per-point extra other-field links at 1, then flipped documents.

    Args:
        spec: Construction parameters

    Returns:
        AIStatInstance with the 2-, 3- and 4-cluster targets
    """
    rng = _rng(spec.seed)
    n, a = spec.n, spec.area_size
    area = np.arange(n) // a
    field = area // 2

    same_area = area[:, None] == area[None, :]
    same_field = field[:, None] == field[None, :]
    values = np.where(same_area, SAME_AREA, np.where(same_field, SAME_FIELD, OTHER_FIELD))

    boundary = np.sort(np.concatenate([rng.choice(np.arange(k * a, (k + 1) * a), size=spec.boundary_per_area, replace=False) for k in range(4)])).astype(np.int64)
    is_boundary = np.zeros(n, dtype=bool)
    is_boundary[boundary] = True

    for x in boundary.tolist():
        other_field = field != field[x]
        linked = other_field if spec.boundary_link == "all" else other_field & is_boundary
        values[x, linked] = BOUNDARY_OTHER_FIELD
        values[linked, x] = BOUNDARY_OTHER_FIELD
        sibling = same_field[x] & ~same_area[x]
        values[x, sibling] = BOUNDARY_SAME_FIELD
        values[sibling, x] = BOUNDARY_SAME_FIELD

    for x in boundary.tolist():
        y = int(rng.choice(np.flatnonzero(field != field[x])))
        values[x, y] = values[y, x] = 1.0

    if spec.alpha_links:
        for x in range(n):
            ys = rng.choice(np.flatnonzero(field != field[x]), size=spec.alpha_links, replace=False)
            values[x, ys] = 1.0
            values[ys, x] = 1.0

    flipped = np.sort(rng.choice(n, size=spec.flipped, replace=False)).astype(np.int64) if spec.flipped else np.zeros(0, dtype=np.int64)
    if len(flipped):
        before = values.copy()
        values[flipped, :] = 1.0 - before[flipped, :]
        values[:, flipped] = 1.0 - before[:, flipped]
    np.fill_diagonal(values, 1.0)

    areas = [np.arange(k * a, (k + 1) * a) for k in range(4)]
    targets = {
        "ai_stat": Labeling.from_groups([np.concatenate(areas[:2]), np.concatenate(areas[2:])]),
        "ai_pe_ht": Labeling.from_groups([np.concatenate(areas[:2]), areas[2], areas[3]]),
        "l_p_stat": Labeling.from_groups([areas[0], areas[1], np.concatenate(areas[2:])]),
        "areas": Labeling.from_groups(areas),
    }
    bad = set(flipped.tolist())
    subsets: Dict[int, np.ndarray] = {}
    for members in areas:
        kept = np.array([p for p in members.tolist() if p not in bad], dtype=np.int64)
        for p in kept.tolist():
            subsets[p] = kept

    logger.info(f"aistat: n={n}, {len(boundary)} boundary documents, {len(flipped)} flipped, seed {spec.seed}")
    return AIStatInstance(
        similarity=SimilarityMatrix(values=values),
        targets=targets,
        subsets=subsets,
        bad_set=flipped.tolist(),
        boundary=boundary.tolist(),
        spec=spec,
    )


def _region_values(n: int) -> np.ndarray:
    if n < 8 or n % 8 != 0:
        raise ErrorFactory.validation_error("n", n, "n must be a positive multiple of 8 (eight equal regions)")
    region = np.arange(n) // (n // 8)
    pair = region // 2
    group = region // 4
    values = np.where(
        region[:, None] == region[None, :],
        SAME_REGION,
        np.where(pair[:, None] == pair[None, :], SIBLING_REGION, np.where(group[:, None] == group[None, :], SAME_GROUP, 0.0)),
    )
    np.fill_diagonal(values, 1.0)
    return values


def generate_topic_regions(n: int) -> Tuple[SimilarityMatrix, List[Labeling]]:
    """
    Eight equal topic regions in two groups of two pairs.

    Regions 0..3 (Algorithms, Complexity, Learning, Planning) form the first
    group and 4..7 (Squash, Billiards, Football, Baseball) the second.
    Similarity is 0.999 inside a region, 3/4 between the regions of a pair,
    1/2 between pairs of the same group and 0 across groups.

    Args:
        n: Number of points, a multiple of 8

    Returns:
        The similarity matrix and the two 3-cluster targets that satisfy
        strict separation: {0-3, 4-5, 6-7} and {0-1, 2-3, 4-7}
    """
    r = n // 8 if n >= 8 else 0
    sim = SimilarityMatrix(values=_region_values(n))
    regions = [np.arange(k * r, (k + 1) * r) for k in range(8)]
    targets = [
        Labeling.from_groups([np.concatenate(regions[0:4]), np.concatenate(regions[4:6]), np.concatenate(regions[6:8])]),
        Labeling.from_groups([np.concatenate(regions[0:2]), np.concatenate(regions[2:4]), np.concatenate(regions[4:8])]),
    ]
    return sim, targets


def generate_matched_pairs(n: int) -> Tuple[SimilarityMatrix, Labeling]:
    """
    Topic regions plus a perfect cross-group matching at similarity 1.

    Point i of region g is matched with point i of region g + 4, so every
    pair straddles the two groups.

    Args:
        n: Number of points, a multiple of 8

    Returns:
        The similarity matrix and the target {0-3, 4-5, 6-7}
    """
    values = _region_values(n)
    half = n // 2
    left = np.arange(half)
    values[left, left + half] = 1.0
    values[left + half, left] = 1.0
    r = n // 8
    regions = [np.arange(k * r, (k + 1) * r) for k in range(8)]
    target = Labeling.from_groups([np.concatenate(regions[0:4]), np.concatenate(regions[4:6]), np.concatenate(regions[6:8])])
    logger.info(f"matched pairs: n={n}, {half} pairs")
    return SimilarityMatrix(values=values), target


def _plant(rng: np.random.Generator, labels: np.ndarray, cap: int, bad_count: int) -> Tuple[np.ndarray, np.ndarray]:
    n = len(labels)
    values = np.where(labels[:, None] == labels[None, :], PLANTED_WITHIN, PLANTED_ACROSS)
    degree = np.zeros(n, dtype=np.int64)
    linked = np.zeros((n, n), dtype=bool)
    if cap > 0:
        for x in rng.permutation(n).tolist():
            free = np.flatnonzero((labels != labels[x]) & (degree < cap) & ~linked[x])
            need = min(cap - int(degree[x]), len(free))
            if need <= 0:
                continue
            ys = rng.choice(free, size=need, replace=False)
            linked[x, ys] = linked[ys, x] = True
            degree[x] += need
            degree[ys] += 1
    values[linked] = PLANTED_NOISE

    bad = np.sort(rng.choice(n, size=bad_count, replace=False)).astype(np.int64) if bad_count else np.zeros(0, dtype=np.int64)
    for x in bad.tolist():
        row = rng.uniform(-1.0, 1.0, size=n)
        values[x, :] = row
        values[:, x] = row
    np.fill_diagonal(values, 1.0)
    return values, bad


def generate_planted_good_neighborhood(k: int, sizes: Sequence[int], alpha: float, nu: float, seed: int) -> Tuple[SimilarityMatrix, Labeling, List[int]]:
    """
    Generate a certified (alpha, nu)-good neighborhood instance.

    Clusters are blocks of similarity 0.9 with 0.1 across. Each point gets
    at most alpha*n cross-cluster links at 0.95 and nu*n random points get
    rows drawn uniformly from [-1, 1].

    Args:
        k: Number of clusters
        sizes: Cluster sizes, one per cluster
        alpha: Neighborhood noise fraction
        nu: Bad-point fraction
        seed: PRNG seed

    Returns:
        (similarity, target, sorted bad set)

    Raises:
        CertificationFailed: If no attempt certifies
    """
    if len(sizes) != k or k < 1 or min(sizes) < 1:
        raise ErrorFactory.validation_error("sizes", list(sizes), f"need {k} positive cluster sizes")
    alpha = validate_fraction_param(alpha, "alpha")
    nu = validate_fraction_param(nu, "nu")
    n = int(sum(sizes))
    if min(sizes) <= 6 * (exact_fraction(alpha) + exact_fraction(nu)) * n:
        raise ErrorFactory.validation_error("sizes", list(sizes), f"smallest cluster must exceed 6(alpha+nu)n = {6 * (alpha + nu) * n:g}")

    labels = np.repeat(np.arange(1, k + 1), sizes)
    target = Labeling(labels=labels, k=k)
    cap = math.floor(exact_fraction(alpha) * n)
    bad_count = math.floor(exact_fraction(nu) * n)
    rng = _rng(seed)
    minimal = 0.0
    for attempt in range(1, CERTIFY_ATTEMPTS + 1):
        values, bad = _plant(rng, labels, cap, bad_count)
        sim = SimilarityMatrix(values=values)
        report = check_good_neighborhood(sim, target, alpha, bad.tolist())
        if report.holds:
            logger.info(f"planted instance: n={n}, k={k}, alpha={alpha}, nu={nu}, certified on attempt {attempt}")
            return sim, target, bad.tolist()
        minimal = report.minimal_alpha or 0.0
        logger.warning(f"planted instance failed certification on attempt {attempt} (minimal alpha {minimal:.4f}), regenerating")
    raise ErrorFactory.certification_failed(CERTIFY_ATTEMPTS, minimal)


def generate_ward_counterexample(m: int) -> Tuple[np.ndarray, DissimilarityMatrix, Labeling]:
    """
    Unbalanced groups on a line that Ward's method splits wrongly.

    Group A (4m points) sits at 0, B (m points) at 5 and C (m points) at 11.

    Args:
        m: Group scale

    Returns:
        (coordinates, squared-distance matrix, target {A and B, C})
    """
    if m < 1:
        raise ErrorFactory.validation_error("m", m, "m must be at least 1")
    coords = np.concatenate([np.zeros(4 * m), np.full(m, 5.0), np.full(m, 11.0)])
    squared = (coords[:, None] - coords[None, :]) ** 2
    target = Labeling(labels=np.concatenate([np.ones(5 * m, dtype=np.int64), np.full(m, 2, dtype=np.int64)]), k=2)
    return coords, DissimilarityMatrix(values=squared), target


def similarity_from_dissimilarity(d: DissimilarityMatrix) -> SimilarityMatrix:
    """Rescale dissimilarities to similarities 1 - 2 d / max d, keeping the order."""
    top = float(d.values.max())
    if top == 0:
        return SimilarityMatrix(values=np.ones_like(d.values))
    return SimilarityMatrix(values=1.0 - 2.0 * d.values / top)


def _normalized(table: AttributeTable) -> np.ndarray:
    values = np.array(table.values, dtype=np.float64, copy=True)
    low = values.min(axis=0)
    span = values.max(axis=0) - low
    span[span == 0] = 1.0
    return (values - low) / span


def inject_noise(data: Union[AttributeTable, SimilarityMatrix], kind: Union[NoiseKind, str], p: float, seed: int) -> Union[AttributeTable, SimilarityMatrix]:
    """
    Apply one of the noise models.

    attr_corrupt replaces a p fraction of the (min-max normalized) table
    entries with N(0, 1) draws; attr_gauss adds N(0, p^2) to every
    normalized entry; sim_corrupt replaces a p fraction of the unordered
    pairs of a similarity matrix with N(0, 1) draws clipped to [-1, 1].

    Args:
        data: Attribute table or similarity matrix
        kind: Noise kind
        p: Noise level in [0, 1]; 0 returns data unchanged
        seed: PRNG seed

    Returns:
        Noisy data of the same type

    Raises:
        KindMismatch: If the kind does not fit the data type
    """
    kind = NoiseKind(kind)
    p = validate_fraction_param(p, "p", open_high=False)
    is_table = isinstance(data, AttributeTable)
    if kind in (NoiseKind.ATTR_CORRUPT, NoiseKind.ATTR_GAUSS) and not is_table:
        raise ErrorFactory.kind_mismatch(kind.value, type(data).__name__)
    if kind == NoiseKind.SIM_CORRUPT and not isinstance(data, SimilarityMatrix):
        raise ErrorFactory.kind_mismatch(kind.value, type(data).__name__)
    if p == 0:
        return data

    rng = _rng(seed)
    if isinstance(data, AttributeTable):
        values = _normalized(data)
        if kind == NoiseKind.ATTR_CORRUPT:
            count = int(round(p * values.size))
            picked = rng.choice(values.size, size=count, replace=False)
            values.flat[picked] = rng.standard_normal(count)
        else:
            values = values + rng.normal(0.0, p, size=values.shape)
        return AttributeTable(values=values)

    values = np.array(data.values, dtype=np.float64, copy=True)
    rows, cols = np.triu_indices(data.n, k=1)
    count = int(round(p * len(rows)))
    picked = rng.choice(len(rows), size=count, replace=False)
    drawn = np.clip(rng.standard_normal(count), -1.0, 1.0)
    values[rows[picked], cols[picked]] = drawn
    values[cols[picked], rows[picked]] = drawn
    return SimilarityMatrix(values=values)
