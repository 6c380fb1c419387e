"""
Input validation for robust-linkage.

This module validates raw matrices, labelings and noise parameters before
they reach the clustering engines, so that bad input is reported as a
validation error rather than as an internal failure.
"""

import math
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from .errors import ErrorFactory


class ValidationResult(BaseModel):
    """Result of a validation operation."""

    is_valid: bool
    sanitized_value: Any = None
    errors: List[str] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)


def exact_fraction(value: float) -> Fraction:
    """Convert a user-supplied decimal fraction to an exact rational."""
    return Fraction(value).limit_denominator(10**9)


def scaled_ceil(factor: int, alpha: float, nu: float, n: int) -> int:
    """Return ceil(factor * (alpha + nu) * n) computed in exact arithmetic."""
    return math.ceil(factor * (exact_fraction(alpha) + exact_fraction(nu)) * n)


class InputValidator:
    """Input validator for clustering operations."""

    # Similarity values live in [-1, 1]
    SIMILARITY_MIN = -1.0
    SIMILARITY_MAX = 1.0

    # Absolute tolerance used by the symmetry check
    SYMMETRY_TOLERANCE = 0.0

    @classmethod
    def _square_matrix(cls, values: Any, name: str) -> ValidationResult:
        errors: List[str] = []
        try:
            matrix = np.asarray(values, dtype=np.float64)
        except (TypeError, ValueError) as e:
            return ValidationResult(is_valid=False, errors=[f"{name} must be numeric: {e}"])

        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            errors.append(f"{name} must be a square matrix, got shape {matrix.shape}")
            return ValidationResult(is_valid=False, errors=errors)

        if matrix.shape[0] == 0:
            errors.append(f"{name} must contain at least one point")
            return ValidationResult(is_valid=False, errors=errors)

        if not np.all(np.isfinite(matrix)):
            errors.append(f"{name} contains non-finite values")

        return ValidationResult(is_valid=not errors, sanitized_value=matrix if not errors else None, errors=errors)

    @classmethod
    def first_asymmetric_pair(cls, matrix: np.ndarray) -> Optional[tuple]:
        """
        Find the first (row-major) pair with values[i][j] != values[j][i].

        Args:
            matrix: Square matrix

        Returns:
            (i, j) with i < j, or None if the matrix is symmetric
        """
        diff = np.abs(matrix - matrix.T) > cls.SYMMETRY_TOLERANCE
        upper = np.triu(diff, k=1)
        if not upper.any():
            return None
        flat = int(np.flatnonzero(upper)[0])
        n = matrix.shape[0]
        return (flat // n, flat % n)

    @classmethod
    def validate_similarity(cls, values: Any) -> ValidationResult:
        """
        Validate a similarity matrix: square, finite, symmetric, entries in [-1, 1].

        Args:
            values: Anything convertible to a 2-D float array

        Returns:
            ValidationResult whose sanitized value is a float64 array
        """
        result = cls._square_matrix(values, "Similarity matrix")
        if not result.is_valid:
            return result
        matrix = result.sanitized_value
        errors: List[str] = []

        pair = cls.first_asymmetric_pair(matrix)
        if pair is not None:
            i, j = pair
            errors.append(f"Similarity matrix is not symmetric at ({i}, {j})")

        if matrix.min() < cls.SIMILARITY_MIN or matrix.max() > cls.SIMILARITY_MAX:
            errors.append("Similarity values must lie in [-1, 1]")

        is_valid = len(errors) == 0
        return ValidationResult(is_valid=is_valid, sanitized_value=matrix if is_valid else None, errors=errors)

    @classmethod
    def validate_dissimilarity(cls, values: Any) -> ValidationResult:
        """
        Validate a dissimilarity matrix: square, finite, symmetric, nonnegative, zero diagonal.

        Args:
            values: Anything convertible to a 2-D float array

        Returns:
            ValidationResult whose sanitized value is a float64 array
        """
        result = cls._square_matrix(values, "Dissimilarity matrix")
        if not result.is_valid:
            return result
        matrix = result.sanitized_value
        errors: List[str] = []

        pair = cls.first_asymmetric_pair(matrix)
        if pair is not None:
            errors.append(f"Dissimilarity matrix is not symmetric at {pair}")
        if matrix.min() < 0:
            errors.append("Dissimilarity values must be nonnegative")
        if np.any(np.diag(matrix) != 0):
            errors.append("Dissimilarity diagonal must be zero")

        is_valid = len(errors) == 0
        return ValidationResult(is_valid=is_valid, sanitized_value=matrix if is_valid else None, errors=errors)

    @classmethod
    def validate_labeling(cls, labels: Sequence[int], k: Optional[int] = None) -> ValidationResult:
        """
        Validate a 1-based labeling.

        Args:
            labels: One label per point
            k: Declared number of clusters (defaults to the largest label)

        Returns:
            ValidationResult whose sanitized value is an int64 array
        """
        errors: List[str] = []
        array = np.asarray(labels)
        if array.ndim != 1 or array.size == 0:
            return ValidationResult(is_valid=False, errors=["Labeling must be a nonempty 1-D sequence"])
        if not np.issubdtype(array.dtype, np.integer):
            if np.issubdtype(array.dtype, np.floating) and np.all(np.mod(array, 1) == 0):
                array = array.astype(np.int64)
            else:
                return ValidationResult(is_valid=False, errors=["Labels must be integers"])

        declared = int(array.max()) if k is None else k
        if declared < 1:
            errors.append("Number of clusters k must be at least 1")
        if array.min() < 1 or array.max() > declared:
            errors.append(f"Labels must lie in 1..{declared}")

        is_valid = len(errors) == 0
        return ValidationResult(is_valid=is_valid, sanitized_value=array.astype(np.int64) if is_valid else None, errors=errors)

    @classmethod
    def validate_fraction(cls, value: Any, field_name: str, open_low: bool = False, open_high: bool = True) -> ValidationResult:
        """
        Validate a fraction in [0, 1) (or the configured open/closed variant).

        Args:
            value: The value to validate
            field_name: Name of the field for error messages
            open_low: Whether 0 itself is excluded
            open_high: Whether 1 itself is excluded

        Returns:
            ValidationResult with the value as float
        """
        try:
            number = float(value)
        except (TypeError, ValueError):
            return ValidationResult(is_valid=False, errors=[f"{field_name} must be a number"])

        low_ok = number > 0 if open_low else number >= 0
        high_ok = number < 1 if open_high else number <= 1
        if not (low_ok and high_ok and math.isfinite(number)):
            low = "(" if open_low else "["
            high = ")" if open_high else "]"
            return ValidationResult(is_valid=False, errors=[f"{field_name} must lie in {low}0, 1{high}, got {value}"])
        return ValidationResult(is_valid=True, sanitized_value=number)

    @classmethod
    def validate_noise_params(cls, alpha: Any, nu: Any, n: int, t_init_factor: int = 6) -> ValidationResult:
        """
        Validate noise parameters against the initial-threshold bound.

        Args:
            alpha: Neighborhood noise fraction
            nu: Bad-point fraction
            n: Number of points
            t_init_factor: Initial threshold factor

        Returns:
            ValidationResult with (alpha, nu, t_init) as sanitized value
        """
        errors: List[str] = []
        for name, value in (("alpha", alpha), ("nu", nu)):
            result = cls.validate_fraction(value, name)
            errors.extend(result.errors)
        if errors:
            return ValidationResult(is_valid=False, errors=errors)

        t_init = scaled_ceil(t_init_factor, float(alpha), float(nu), n) + 1
        if t_init > n - 1:
            errors.append(f"initial threshold {t_init} exceeds n - 1 = {n - 1}")
            return ValidationResult(is_valid=False, errors=errors, sanitized_value=(float(alpha), float(nu), t_init))

        return ValidationResult(is_valid=True, sanitized_value=(float(alpha), float(nu), t_init))


def validate_similarity_params(values: Any) -> np.ndarray:
    """
    Validate a similarity matrix, raising the matching error.

    Raises:
        AsymmetryError: For the first asymmetric pair
        LinkageError: For any other violation
    """
    result = InputValidator.validate_similarity(values)
    if result.is_valid:
        return result.sanitized_value
    matrix = np.asarray(values, dtype=np.float64)
    if matrix.ndim == 2 and matrix.shape[0] == matrix.shape[1]:
        pair = InputValidator.first_asymmetric_pair(matrix)
        if pair is not None:
            i, j = pair
            raise ErrorFactory.asymmetry(i, j, float(matrix[i, j]), float(matrix[j, i]))
    raise ErrorFactory.validation_error("similarity", f"matrix of shape {matrix.shape}", "; ".join(result.errors))


def validate_dissimilarity_params(values: Any) -> np.ndarray:
    """Validate a dissimilarity matrix, raising the matching error."""
    result = InputValidator.validate_dissimilarity(values)
    if not result.is_valid:
        raise ErrorFactory.validation_error("dissimilarity", "matrix", "; ".join(result.errors))
    return result.sanitized_value


def validate_noise_params(alpha: float, nu: float, n: int, t_init_factor: int = 6) -> Dict[str, Any]:
    """
    Validate parameters for a clustering run.

    Args:
        alpha: Neighborhood noise fraction
        nu: Bad-point fraction
        n: Number of points
        t_init_factor: Initial threshold factor

    Returns:
        Dictionary with sanitized alpha, nu and t_init

    Raises:
        ParamsTooLarge: If the initial threshold exceeds n - 1
        LinkageError: If alpha or nu are not fractions
    """
    result = InputValidator.validate_noise_params(alpha, nu, n, t_init_factor)
    if not result.is_valid:
        if result.sanitized_value is not None:
            a, v, t_init = result.sanitized_value
            raise ErrorFactory.params_too_large(a, v, n, t_init)
        raise ErrorFactory.validation_error("noise_params", f"alpha={alpha}, nu={nu}", "; ".join(result.errors))
    a, v, t_init = result.sanitized_value
    return {"alpha": a, "nu": v, "t_init": t_init}


def validate_fraction_param(value: Any, field_name: str, open_low: bool = False, open_high: bool = True) -> float:
    """Validate a single fraction, raising a validation error."""
    result = InputValidator.validate_fraction(value, field_name, open_low=open_low, open_high=open_high)
    if not result.is_valid:
        raise ErrorFactory.validation_error(field_name, value, "; ".join(result.errors))
    return float(result.sanitized_value)
