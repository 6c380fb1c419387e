"""
Data models for robust-linkage using Pydantic.

This module contains the shared domain types:
- SimilarityMatrix, DissimilarityMatrix, AttributeTable
- Labeling, NoiseParams, ThresholdMargins
- MergeEvent, PropertyReport, ConfusionTable
- AIStatSpec and the noise-kind enums
"""

from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import ErrorFactory
from .validation import InputValidator, scaled_ceil, validate_dissimilarity_params, validate_noise_params, validate_similarity_params


def _frozen_array(values: Any, dtype: Any) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


class NoiseKind(str, Enum):
    """Noise injectors applied to attribute tables or similarity matrices."""

    ATTR_CORRUPT = "attr_corrupt"  # replace a fraction of table entries with N(0,1)
    ATTR_GAUSS = "attr_gauss"  # add N(0, p^2) to every table entry
    SIM_CORRUPT = "sim_corrupt"  # replace a fraction of unordered pairs with N(0,1), clipped


class LinkageMethod(str, Enum):
    """Classical agglomerative linkage methods."""

    SINGLE = "single"
    AVERAGE = "average"
    COMPLETE = "complete"
    WARD = "ward"


class SimilarityMatrix(BaseModel):
    """Symmetric n x n similarity scores in [-1, 1]."""

    values: np.ndarray = Field(..., description="Symmetric float64 matrix, read-only")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("values", mode="before")
    @classmethod
    def validate_values(cls, v: Any) -> np.ndarray:
        """Validate shape, range and symmetry, then freeze a private copy."""
        return _frozen_array(validate_similarity_params(v), np.float64)

    @property
    def n(self) -> int:
        """Number of points."""
        return int(self.values.shape[0])

    def subset(self, ids: Any) -> "SimilarityMatrix":
        """Return the similarity matrix restricted to the given point ids."""
        ids = np.asarray(ids, dtype=np.int64)
        return SimilarityMatrix(values=self.values[np.ix_(ids, ids)])


class DissimilarityMatrix(BaseModel):
    """Symmetric nonnegative n x n dissimilarities with zero diagonal."""

    values: np.ndarray = Field(..., description="Symmetric float64 matrix, read-only")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("values", mode="before")
    @classmethod
    def validate_values(cls, v: Any) -> np.ndarray:
        """Validate shape, sign, diagonal and symmetry, then freeze a private copy."""
        return _frozen_array(validate_dissimilarity_params(v), np.float64)

    @property
    def n(self) -> int:
        """Number of points."""
        return int(self.values.shape[0])

    @classmethod
    def from_similarity(cls, sim: SimilarityMatrix) -> "DissimilarityMatrix":
        """Adapt a similarity matrix with d = 1 - sim and a zero diagonal."""
        values = 1.0 - sim.values
        np.fill_diagonal(values, 0.0)
        return cls(values=values)


class AttributeTable(BaseModel):
    """Points as rows of numeric attributes."""

    values: np.ndarray = Field(..., description="float64 array of shape (points, attributes)")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("values", mode="before")
    @classmethod
    def validate_values(cls, v: Any) -> np.ndarray:
        """Validate a finite 2-D table."""
        array = np.array(v, dtype=np.float64, copy=True)
        if array.ndim != 2 or array.shape[0] == 0:
            raise ErrorFactory.validation_error("table", f"shape {array.shape}", "attribute table must be a nonempty 2-D array")
        if not np.all(np.isfinite(array)):
            raise ErrorFactory.validation_error("table", "values", "attribute table contains non-finite values")
        array.setflags(write=False)
        return array

    @property
    def n(self) -> int:
        """Number of points (rows)."""
        return int(self.values.shape[0])

    @property
    def scale(self) -> float:
        """Squared diagonal of the table's bounding box."""
        ranges = self.values.max(axis=0) - self.values.min(axis=0)
        return float(np.sum(ranges**2))

    def similarity_block(self, rows: Any = None, cols: Any = None) -> np.ndarray:
        """
        Similarities 1 - 2 |x - y|^2 / D between row points and column points.

        D is the bounding-box scale, so every value lies in [-1, 1]; a table
        of identical rows gives all ones.
        """
        left = self.values if rows is None else self.values[np.asarray(rows, dtype=np.int64)]
        right = self.values if cols is None else self.values[np.asarray(cols, dtype=np.int64)]
        squared = np.sum((left[:, None, :] - right[None, :, :]) ** 2, axis=2)
        scale = self.scale
        if scale == 0:
            return np.ones_like(squared)
        return np.clip(1.0 - 2.0 * squared / scale, -1.0, 1.0)

    def to_similarity(self) -> "SimilarityMatrix":
        """Similarity matrix over all rows."""
        values = self.similarity_block()
        np.fill_diagonal(values, 1.0)
        return SimilarityMatrix(values=values)


class Labeling(BaseModel):
    """Cluster assignment with labels in 1..k."""

    labels: np.ndarray = Field(..., description="int64 labels, one per point, 1-based")
    k: int = Field(..., description="Number of clusters")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @model_validator(mode="before")
    @classmethod
    def validate_labels(cls, data: Any) -> Any:
        """Validate the labels and default k to the largest label."""
        if not isinstance(data, dict):
            return data
        result = InputValidator.validate_labeling(data.get("labels", []), data.get("k"))
        if not result.is_valid:
            raise ErrorFactory.validation_error("labels", f"{len(np.atleast_1d(data.get('labels', [])))} labels", "; ".join(result.errors))
        labels = result.sanitized_value
        labels.setflags(write=False)
        k = data.get("k")
        return {"labels": labels, "k": int(labels.max()) if k is None else int(k)}

    @classmethod
    def from_groups(cls, groups: List[Any], n: Optional[int] = None) -> "Labeling":
        """Build a labeling where groups[i] receives label i + 1."""
        total = sum(len(g) for g in groups) if n is None else n
        labels = np.zeros(total, dtype=np.int64)
        for index, group in enumerate(groups):
            labels[np.asarray(group, dtype=np.int64)] = index + 1
        return cls(labels=labels, k=len(groups))

    @property
    def n(self) -> int:
        """Number of points."""
        return int(self.labels.shape[0])

    def members(self, label: int) -> np.ndarray:
        """Return the sorted point ids carrying a label."""
        return np.flatnonzero(self.labels == label)

    def clusters(self) -> List[np.ndarray]:
        """Return the point ids of every cluster, in label order."""
        return [self.members(label) for label in range(1, self.k + 1)]

    def restrict(self, ids: Any) -> "Labeling":
        """Return the labeling of a subset of points, keeping label values."""
        ids = np.asarray(ids, dtype=np.int64)
        return Labeling(labels=self.labels[ids], k=self.k)


class ThresholdMargins(BaseModel):
    """Integer thresholds derived once from (alpha, nu, n)."""

    t_init: int = Field(..., description="First threshold visited")
    f_margin: int = Field(..., description="Allowed shortfall of common neighbors for an F edge")
    h_margin: int = Field(..., description="Common F neighbors two singletons must exceed")
    min_size: int = Field(..., description="Minimum size of a merged blob")
    insertion_k: int = Field(default=1, description="Size of N_S(x) for inductive insertion")


class NoiseParams(BaseModel):
    """Noise fractions alpha (neighborhood noise) and nu (bad points)."""

    alpha: float = Field(default=0.0, description="Fraction of wrong nearest neighbors tolerated", ge=0.0, lt=1.0)
    nu: float = Field(default=0.0, description="Fraction of bad points", ge=0.0, lt=1.0)

    def doubled(self) -> "NoiseParams":
        """Return (2 alpha, 2 nu) as used for the sample tree."""
        return NoiseParams(alpha=float(2 * Fraction(self.alpha).limit_denominator(10**9)), nu=float(2 * Fraction(self.nu).limit_denominator(10**9)))

    def margins(self, n: int, t_init_factor: int = 6, f_margin_factor: int = 2, h_margin_factor: int = 1, merge_size_factor: int = 4) -> ThresholdMargins:
        """
        Derive the integer thresholds for n points.

        Args:
            n: Number of points
            t_init_factor: Initial threshold factor
            f_margin_factor: F-margin factor
            h_margin_factor: H-singleton margin factor
            merge_size_factor: Component merge size factor

        Returns:
            ThresholdMargins with every product rounded up

        Raises:
            ParamsTooLarge: If the initial threshold exceeds n - 1
        """
        checked = validate_noise_params(self.alpha, self.nu, n, t_init_factor)
        return ThresholdMargins(
            t_init=checked["t_init"],
            f_margin=scaled_ceil(f_margin_factor, self.alpha, self.nu, n),
            h_margin=scaled_ceil(h_margin_factor, self.alpha, self.nu, n),
            min_size=scaled_ceil(merge_size_factor, self.alpha, self.nu, n),
            insertion_k=max(1, scaled_ceil(t_init_factor, self.alpha, self.nu, n)),
        )


class MergeEvent(BaseModel):
    """One internal node of a merge tree."""

    step: int = Field(..., description="Sequence number of the merge, starting at 0")
    node_id: int = Field(..., description="Node id; leaves are 0..n-1 and merge i creates node n + i")
    children: List[int] = Field(..., description="Child node ids (at least two)")
    threshold: Union[int, float] = Field(..., description="Threshold t (robust linkage) or merge height (baselines)")

    model_config = ConfigDict(frozen=True)

    @field_validator("children")
    @classmethod
    def validate_children(cls, v: List[int]) -> List[int]:
        """A merge joins at least two distinct nodes."""
        if len(v) < 2:
            raise ValueError("A merge needs at least two children")
        if len(set(v)) != len(v):
            raise ValueError("Merge children must be distinct")
        return v


class PropertyReport(BaseModel):
    """Outcome of a similarity-property check."""

    property_name: str = Field(..., description="Name of the checked property")
    holds: bool = Field(..., description="Whether the property holds for the given parameters")
    witness: List[List[int]] = Field(default_factory=list, description="Violations, canonically sorted and truncated")
    minimal_alpha: Optional[float] = Field(default=None, description="Smallest alpha making the property hold for this bad set")
    bad_set: List[int] = Field(default_factory=list, description="Bad set B used for the check")
    details: Dict[str, Any] = Field(default_factory=dict, description="Property-specific measurements")
    notes: List[str] = Field(default_factory=list, description="Caveats about what was verified")

    @model_validator(mode="after")
    def check_witness(self) -> "PropertyReport":
        """holds is true exactly when there is no witness."""
        if self.holds == bool(self.witness):
            raise ValueError("holds must equal an empty witness list")
        return self


class ConfusionTable(BaseModel):
    """Intersection sizes between predicted and true clusters."""

    counts: np.ndarray = Field(..., description="k_pred x k_true int64 matrix")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @classmethod
    def from_labelings(cls, pred: Labeling, target: Labeling) -> "ConfusionTable":
        """Count |pred cluster i intersect target cluster j| for all i, j."""
        if pred.n != target.n:
            raise ErrorFactory.validation_error("labels", f"{pred.n} vs {target.n}", "labelings must cover the same points")
        counts = np.zeros((pred.k, target.k), dtype=np.int64)
        np.add.at(counts, (pred.labels - 1, target.labels - 1), 1)
        return cls(counts=counts)

    @property
    def n(self) -> int:
        """Total number of points."""
        return int(self.counts.sum())


class AIStatSpec(BaseModel):
    """Parameters of the AI/Statistics document-similarity construction."""

    n: int = Field(default=512, description="Total number of documents", gt=0)
    boundary_fraction: float = Field(default=0.125, description="Fraction of each area lying near the other field", ge=0.0, le=1.0)
    extra_alpha: float = Field(default=0.0, description="Extra per-point fraction of other-field similarities set to 1", ge=0.0, lt=1.0)
    extra_nu: float = Field(default=0.0, description="Fraction of documents whose similarities are flipped to 1 - s", ge=0.0, lt=1.0)
    boundary_link: str = Field(default="boundary", description="Which other-field documents a boundary document is 0.9-similar to (all or boundary)")
    seed: int = Field(default=0, description="PRNG seed")

    @field_validator("n")
    @classmethod
    def validate_n(cls, v: int) -> int:
        """Four equal areas."""
        if v % 4 != 0:
            raise ValueError("n must be divisible by 4")
        return v

    @field_validator("boundary_link")
    @classmethod
    def validate_boundary_link(cls, v: str) -> str:
        """Validate the boundary link convention."""
        if v not in ["all", "boundary"]:
            raise ValueError("Boundary link must be 'all' or 'boundary'")
        return v

    @model_validator(mode="after")
    def check_counts(self) -> "AIStatSpec":
        """Boundary, alpha-noise and flip counts must be whole numbers."""
        area = self.n // 4
        for name, count in (
            ("boundary count per area", area * self.boundary_fraction),
            ("extra_alpha * n", self.extra_alpha * self.n),
            ("extra_nu * n", self.extra_nu * self.n),
        ):
            if abs(count - round(count)) > 1e-9:
                raise ValueError(f"{name} must be an integer, got {count}")
        return self

    @property
    def area_size(self) -> int:
        """Documents per area."""
        return self.n // 4

    @property
    def boundary_per_area(self) -> int:
        """Boundary documents per area."""
        return int(round(self.area_size * self.boundary_fraction))

    @property
    def alpha_links(self) -> int:
        """Other-field similarities set to 1 per document."""
        return int(round(self.extra_alpha * self.n))

    @property
    def flipped(self) -> int:
        """Number of flipped documents."""
        return int(round(self.extra_nu * self.n))
