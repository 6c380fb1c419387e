"""
Similarity-function properties.

Checkers for strict separation, (alpha, nu)-good neighborhood and the weak
(alpha, beta, nu)-good neighborhood, together with greedy bad-set search and
an empirical check of the implications between the properties. Every
neighbor ranking is restricted to the good points S' = S minus B and uses
the same self-first, index tie-break order as the clustering engine.
"""

import logging
import math
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from .errors import ErrorFactory
from .models import Labeling, PropertyReport, SimilarityMatrix
from .ranking import rank_rows
from .validation import exact_fraction, validate_fraction_param

logger = logging.getLogger(__name__)

# Witness rows kept in a report
WITNESS_LIMIT = 10

# Largest instance accepted by implication_suite
IMPLICATION_MAX_N = 512


def _check_pair(sim: SimilarityMatrix, target: Labeling) -> None:
    if sim.n != target.n:
        raise ErrorFactory.validation_error("target", f"{target.n} labels", f"target must label all {sim.n} points")


def _split_points(n: int, bad_set: Iterable[int]) -> Tuple[np.ndarray, List[int]]:
    """Return (sorted good ids, sorted bad ids)."""
    bad = sorted({int(point) for point in bad_set})
    if bad and (bad[0] < 0 or bad[-1] >= n):
        raise ErrorFactory.validation_error("bad_set", bad, f"point ids must lie in 0..{n - 1}")
    keep = np.ones(n, dtype=bool)
    keep[bad] = False
    return np.flatnonzero(keep), bad


def _allowed(fraction: float, n: int) -> int:
    """Largest integer count not exceeding fraction * n."""
    return math.floor(exact_fraction(fraction) * n)


def neighborhood_deficits(sim: SimilarityMatrix, target: Labeling, good: np.ndarray) -> np.ndarray:
    """
    Count, for every good point, the outsiders among its cluster-sized neighborhood.

    Args:
        sim: Similarity matrix over S
        target: Target clustering of S
        good: Sorted ids of S'

    Returns:
        int64 array aligned with good; entry x is |C(x) cap S'| minus the
        members of C(x) cap S' among x's |C(x) cap S'| nearest neighbors in S'
    """
    if len(good) == 0:
        return np.zeros(0, dtype=np.int64)
    labels = target.labels[good]
    order = rank_rows(sim.values[np.ix_(good, good)])
    sizes = np.bincount(labels, minlength=target.k + 1)
    own = sizes[labels]
    same = np.cumsum(labels[order] == labels[:, None], axis=1)
    inside = same[np.arange(len(good)), own - 1]
    return (own - inside).astype(np.int64)


def check_strict_separation(sim: SimilarityMatrix, target: Labeling, bad_set: Iterable[int] = ()) -> PropertyReport:
    """
    Check strict separation after removing a bad set.

    Every good x must be strictly more similar to each other good point of
    its cluster than to any good point outside it.

    Args:
        sim: Similarity matrix
        target: Target clustering
        bad_set: Points excluded from the check

    Returns:
        PropertyReport whose witness rows are violating triples [x, x', x'']
        with x' the least similar own-cluster point and x'' the most similar
        other-cluster point
    """
    _check_pair(sim, target)
    good, bad = _split_points(sim.n, bad_set)
    violators = _strict_violators(sim, target, good)
    witness = [list(row) for row in violators[:WITNESS_LIMIT]]
    logger.info(f"strict separation on {len(good)} good points: {len(violators)} violating anchors")
    return PropertyReport(
        property_name="strict_separation",
        holds=not violators,
        witness=witness,
        bad_set=bad,
        details={"violating_points": len(violators), "good_points": int(len(good))},
    )


def _strict_violators(sim: SimilarityMatrix, target: Labeling, good: np.ndarray) -> List[Tuple[int, int, int]]:
    if len(good) < 2:
        return []
    block = sim.values[np.ix_(good, good)]
    labels = target.labels[good]
    same = labels[:, None] == labels[None, :]
    np.fill_diagonal(same, False)
    other = labels[:, None] != labels[None, :]

    own_values = np.where(same, block, np.inf)
    other_values = np.where(other, block, -np.inf)
    closest_own = np.argmin(own_values, axis=1)
    farthest_other = np.argmax(other_values, axis=1)
    rows = np.arange(len(good))
    bad_rows = np.flatnonzero(own_values[rows, closest_own] <= other_values[rows, farthest_other])
    return [(int(good[x]), int(good[closest_own[x]]), int(good[farthest_other[x]])) for x in bad_rows]


def check_good_neighborhood(sim: SimilarityMatrix, target: Labeling, alpha: float, bad_set: Iterable[int] = ()) -> PropertyReport:
    """
    Check the (alpha, nu)-good neighborhood property for a given bad set.

    Args:
        sim: Similarity matrix
        target: Target clustering
        alpha: Allowed fraction of outside neighbors, relative to n = |S|
        bad_set: The bad set B; nu is |B| / n

    Returns:
        PropertyReport with [x, deficit] witness rows and minimal_alpha, the
        largest deficit divided by n
    """
    _check_pair(sim, target)
    alpha = validate_fraction_param(alpha, "alpha")
    n = sim.n
    good, bad = _split_points(n, bad_set)
    deficits = neighborhood_deficits(sim, target, good)
    allowed = _allowed(alpha, n)
    failing = np.flatnonzero(deficits > allowed)
    worst = int(deficits.max()) if len(deficits) else 0

    logger.info(f"good neighborhood: alpha={alpha}, |B|={len(bad)}, worst deficit {worst} (allowed {allowed})")
    return PropertyReport(
        property_name="good_neighborhood",
        holds=len(failing) == 0,
        witness=[[int(good[x]), int(deficits[x])] for x in failing[:WITNESS_LIMIT]],
        minimal_alpha=worst / n,
        bad_set=bad,
        details={"worst_deficit": worst, "allowed": allowed, "violating_points": int(len(failing)), "nu": len(bad) / n},
    )


def check_weak_good_neighborhood(
    sim: SimilarityMatrix,
    target: Labeling,
    alpha: float,
    beta: float,
    bad_set: Iterable[int],
    subsets: Mapping[int, Sequence[int]],
    nu: Optional[float] = None,
) -> PropertyReport:
    """
    Check the weak (alpha, beta, nu)-good neighborhood property for a supplied subset family.

    Args:
        sim: Similarity matrix
        target: Target clustering
        alpha: Allowed fraction of outside neighbors
        beta: Required fraction of good points in every subset
        bad_set: The bad set B
        subsets: A_p for every point p outside B
        nu: Bad-point fraction; defaults to |B| / n

    Returns:
        PropertyReport; witness rows are [q, outside neighbors] for points of
        some A_p with too many outside neighbors among their |A_p| nearest,
        and [min member of A_p, good count] for subsets below beta

    Raises:
        SubsetInvalid: If some A_p is missing, misses p, leaves C(p) minus B,
            or has at most 6(alpha+nu)n points
    """
    _check_pair(sim, target)
    alpha = validate_fraction_param(alpha, "alpha")
    beta = validate_fraction_param(beta, "beta", open_high=False)
    n = sim.n
    good, bad = _split_points(n, bad_set)
    if nu is None:
        nu = len(bad) / n
    nu = validate_fraction_param(nu, "nu")
    if len(bad) > exact_fraction(nu) * n:
        raise ErrorFactory.validation_error("bad_set", len(bad), f"bad set larger than nu * n = {nu * n}")

    families = _distinct_subsets(target, good, bad, subsets, exact_fraction(alpha) + exact_fraction(nu), n)
    position = np.full(n, -1, dtype=np.int64)
    position[good] = np.arange(len(good))
    order = rank_rows(sim.values[np.ix_(good, good)])
    deficits = neighborhood_deficits(sim, target, good)
    allowed = _allowed(alpha, n)
    is_good = deficits <= allowed
    required = exact_fraction(beta)

    local: List[List[int]] = []
    sparse: List[List[int]] = []
    fractions: List[List[Any]] = []
    for members in families:
        local_ids = position[members]
        inside = np.zeros(len(good), dtype=bool)
        inside[local_ids] = True
        size = len(members)
        outside = size - inside[order[local_ids, :size]].sum(axis=1)
        local.extend([int(members[i]), int(outside[i])] for i in np.flatnonzero(outside > allowed))

        good_count = int(is_good[local_ids].sum())
        fractions.append([int(members[0]), size, good_count])
        if Fraction(good_count, size) < required:
            sparse.append([int(members[0]), good_count])

    local.sort()
    sparse.sort()
    binding = min((count / size for _, size, count in fractions), default=1.0)
    logger.info(f"weak good neighborhood: {len(families)} distinct subsets, binding beta {binding:.4f}, {len(local)} local violations")
    return PropertyReport(
        property_name="weak_good_neighborhood",
        holds=not local and not sparse,
        witness=(local + sparse)[:WITNESS_LIMIT],
        bad_set=bad,
        details={
            "alpha": alpha,
            "beta": beta,
            "nu": nu,
            "binding_beta": binding,
            "local_violations": len(local),
            "sparse_subsets": len(sparse),
            "subset_fractions": fractions,
        },
        notes=["Only the supplied subset family was verified, not every admissible family"],
    )


def _distinct_subsets(target: Labeling, good: np.ndarray, bad: List[int], subsets: Mapping[int, Sequence[int]], noise: Fraction, n: int) -> List[np.ndarray]:
    """Validate A_p for every good p and return the distinct subsets."""
    bad_mask = np.zeros(n, dtype=bool)
    bad_mask[bad] = True
    seen: Dict[Tuple[int, ...], np.ndarray] = {}
    for p in good.tolist():
        if p not in subsets:
            raise ErrorFactory.subset_invalid(p, "no subset supplied")
        members = np.unique(np.asarray(subsets[p], dtype=np.int64))
        key = tuple(members.tolist())
        if p not in key:
            raise ErrorFactory.subset_invalid(p, "subset does not contain p")
        if key in seen:
            continue
        if members[0] < 0 or members[-1] >= n or np.any(bad_mask[members]) or np.any(target.labels[members] != target.labels[p]):
            raise ErrorFactory.subset_invalid(p, "subset is not inside C(p) minus the bad set")
        if len(members) <= 6 * noise * n:
            raise ErrorFactory.subset_invalid(p, f"subset has {len(members)} points, needs more than 6(alpha+nu)n = {float(6 * noise * n):g}")
        seen[key] = members
    return list(seen.values())


def check_neighbor_fact(sim: SimilarityMatrix, target: Labeling, alpha: float, nu: float, bad_set: Iterable[int]) -> PropertyReport:
    """
    Spot-check the nearest-neighbor fact behind the clustering guarantee.

    For every good x in C_i and every t up to |C_i|, at most (alpha+nu)n of
    x's t nearest neighbors in S lie outside the good set G_i = C_i minus B.
    The outside count grows with t, so only t = |C_i| is checked.

    Args:
        sim: Similarity matrix
        target: Target clustering
        alpha: Neighborhood noise fraction
        nu: Bad-point fraction
        bad_set: The bad set B

    Returns:
        PropertyReport with [x, outside count] witness rows
    """
    _check_pair(sim, target)
    alpha = validate_fraction_param(alpha, "alpha")
    nu = validate_fraction_param(nu, "nu")
    n = sim.n
    good, bad = _split_points(n, bad_set)
    allowed = math.floor((exact_fraction(alpha) + exact_fraction(nu)) * n)

    counts = np.zeros(0, dtype=np.int64)
    if len(good):
        order = rank_rows(sim.values)[good]
        is_good = np.ones(n, dtype=bool)
        is_good[bad] = False
        labels = target.labels
        sizes = np.bincount(labels, minlength=target.k + 1)[labels[good]]
        in_own = (labels[order] == labels[good][:, None]) & is_good[order]
        inside = np.cumsum(in_own, axis=1)[np.arange(len(good)), sizes - 1]
        counts = sizes - inside
    failing = np.flatnonzero(counts > allowed)
    return PropertyReport(
        property_name="neighbor_fact",
        holds=len(failing) == 0,
        witness=[[int(good[x]), int(counts[x])] for x in failing[:WITNESS_LIMIT]],
        bad_set=bad,
        details={"allowed": allowed, "worst": int(counts.max()) if len(counts) else 0},
    )


def greedy_bad_set(sim: SimilarityMatrix, target: Labeling, alpha: float) -> List[int]:
    """
    Grow a bad set until the good neighborhood property holds for alpha.

    Each round removes the good point with the largest deficit, ties to the
    smallest id. The result is an upper bound on the smallest bad set.

    Args:
        sim: Similarity matrix
        target: Target clustering
        alpha: Neighborhood noise fraction

    Returns:
        Sorted bad point ids
    """
    _check_pair(sim, target)
    allowed = _allowed(validate_fraction_param(alpha, "alpha"), sim.n)
    good, bad = _split_points(sim.n, ())
    while len(good):
        deficits = neighborhood_deficits(sim, target, good)
        worst = int(np.argmax(deficits))
        if deficits[worst] <= allowed:
            break
        bad.append(int(good[worst]))
        good = np.delete(good, worst)
    logger.info(f"greedy bad set for alpha={alpha}: {len(bad)} points (upper bound)")
    return sorted(bad)


def _strict_involvement(sim: SimilarityMatrix, target: Labeling, good: np.ndarray) -> np.ndarray:
    """Number of violating triples each good point takes part in, in any role."""
    block = sim.values[np.ix_(good, good)]
    labels = target.labels[good]
    involvement = np.zeros(len(good), dtype=np.int64)
    for x in range(len(good)):
        own = np.flatnonzero(labels == labels[x])
        own = own[own != x]
        other = np.flatnonzero(labels != labels[x])
        if len(own) == 0 or len(other) == 0:
            continue
        own_values = block[x, own]
        other_values = block[x, other]
        # triples (x, x', x'') with sim(x, x') <= sim(x, x'')
        as_own = len(other_values) - np.searchsorted(np.sort(other_values), own_values, side="left")
        as_other = np.searchsorted(np.sort(own_values), other_values, side="right")
        involvement[own] += as_own
        involvement[other] += as_other
        involvement[x] += int(as_own.sum())
    return involvement


def greedy_strict_bad_set(sim: SimilarityMatrix, target: Labeling) -> List[int]:
    """
    Grow a bad set until strict separation holds.

    Each round removes the point taking part in the most violating triples,
    ties to the smallest id. The result is an upper bound on the smallest
    bad set.
    """
    _check_pair(sim, target)
    good, bad = _split_points(sim.n, ())
    while len(good) > 1:
        involvement = _strict_involvement(sim, target, good)
        worst = int(np.argmax(involvement))
        if involvement[worst] == 0:
            break
        bad.append(int(good[worst]))
        good = np.delete(good, worst)
    logger.info(f"greedy strict-separation bad set: {len(bad)} points (upper bound)")
    return sorted(bad)


class ImplicationArrow(BaseModel):
    """One implication between properties, checked on a single instance."""

    name: str = Field(..., description="Premise -> conclusion")
    parameters: Dict[str, Any] = Field(default_factory=dict, description="Parameters the premise was measured at")
    premise_holds: bool = Field(..., description="Whether the premise holds on the instance")
    conclusion_holds: Optional[bool] = Field(default=None, description="Conclusion outcome; None when the premise fails")

    @property
    def passed(self) -> bool:
        """An arrow passes unless its premise holds and its conclusion fails."""
        return not self.premise_holds or bool(self.conclusion_holds)


class ImplicationReport(BaseModel):
    """Outcome of every implication arrow on one instance."""

    arrows: List[ImplicationArrow] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(arrow.passed for arrow in self.arrows)


def _cluster_family(target: Labeling, good: np.ndarray) -> Dict[int, np.ndarray]:
    """A_p = C(p) minus B for every good p."""
    family: Dict[int, np.ndarray] = {}
    for label in range(1, target.k + 1):
        members = good[target.labels[good] == label]
        for p in members.tolist():
            family[p] = members
    return family


def implication_suite(sim: SimilarityMatrix, target: Labeling) -> ImplicationReport:
    """
    Confirm the implications between the properties on one instance.

    Premise parameters are measured on the instance: alpha is the minimal
    alpha with no bad points, and the bad sets come from the greedy
    searches. Each conclusion is then checked at the parameters the
    implication promises.

    Args:
        sim: Similarity matrix with at most 512 points
        target: Target clustering

    Returns:
        ImplicationReport with one arrow per implication
    """
    _check_pair(sim, target)
    n = sim.n
    if n > IMPLICATION_MAX_N:
        raise ErrorFactory.validation_error("n", n, f"implication suite runs on instances of at most {IMPLICATION_MAX_N} points")
    arrows: List[ImplicationArrow] = []
    smallest = int(np.bincount(target.labels, minlength=target.k + 1)[1:].min())
    everyone = np.arange(n, dtype=np.int64)

    alpha = check_good_neighborhood(sim, target, 0.0).minimal_alpha or 0.0
    alpha_good = check_good_neighborhood(sim, target, alpha).holds
    arrows.append(
        ImplicationArrow(
            name="alpha-good -> (alpha,0)-good",
            parameters={"alpha": alpha},
            premise_holds=alpha_good,
            conclusion_holds=check_good_neighborhood(sim, target, alpha, ()).holds if alpha_good else None,
        )
    )

    strict_bad = greedy_strict_bad_set(sim, target)
    nu_strict = len(strict_bad) / n
    strict = check_strict_separation(sim, target, strict_bad).holds
    arrows.append(
        ImplicationArrow(
            name="nu-strict -> (0,nu)-good",
            parameters={"nu": nu_strict, "bad_set": strict_bad},
            premise_holds=strict,
            conclusion_holds=check_good_neighborhood(sim, target, 0.0, strict_bad).holds if strict else None,
        )
    )

    half_alpha = alpha / 2
    good_bad = greedy_bad_set(sim, target, half_alpha)
    nu_good = len(good_bad) / n
    noise = exact_fraction(half_alpha) + exact_fraction(nu_good)
    premise = check_good_neighborhood(sim, target, half_alpha, good_bad).holds and smallest > 7 * noise * n and nu_good < 1
    conclusion = None
    if premise:
        good, _ = _split_points(n, good_bad)
        conclusion = check_weak_good_neighborhood(sim, target, half_alpha, 1.0, good_bad, _cluster_family(target, good), nu=nu_good).holds
    arrows.append(
        ImplicationArrow(
            name="(alpha,nu)-good with min cluster > 7(alpha+nu)n -> weak (alpha,1,nu)-good",
            parameters={"alpha": half_alpha, "nu": nu_good, "bad_set": good_bad},
            premise_holds=premise,
            conclusion_holds=conclusion,
        )
    )

    family = _cluster_family(target, everyone)
    premise = alpha_good and smallest > 6 * exact_fraction(alpha) * n
    weak = check_weak_good_neighborhood(sim, target, alpha, 1.0, (), family) if premise else None
    arrows.append(
        ImplicationArrow(
            name="alpha-good with min cluster > 6 alpha n -> weak (alpha,1)-good",
            parameters={"alpha": alpha},
            premise_holds=premise,
            conclusion_holds=weak.holds if weak is not None else None,
        )
    )

    weak_holds = bool(weak is not None and weak.holds)
    arrows.append(
        ImplicationArrow(
            name="weak (alpha,beta)-good -> weak (alpha,beta,0)-good",
            parameters={"alpha": alpha, "beta": 1.0},
            premise_holds=weak_holds,
            conclusion_holds=check_weak_good_neighborhood(sim, target, alpha, 1.0, (), family, nu=0.0).holds if weak_holds else None,
        )
    )

    for arrow in arrows:
        logger.info(f"implication {arrow.name}: premise {arrow.premise_holds}, conclusion {arrow.conclusion_holds}")
    return ImplicationReport(arrows=arrows)
