"""
Tests for the input validation system.
"""

from fractions import Fraction

import numpy as np
import pytest

from robust_linkage.errors import AsymmetryError, ErrorCode, LinkageError, ParamsTooLarge
from robust_linkage.validation import (
    InputValidator,
    exact_fraction,
    scaled_ceil,
    validate_dissimilarity_params,
    validate_fraction_param,
    validate_noise_params,
    validate_similarity_params,
)
from tests.fixtures import asymmetric_values


class TestExactArithmetic:
    """Test cases for the exact threshold helpers."""

    def test_exact_fraction(self):
        """Test decimal inputs become the intended rationals."""
        assert exact_fraction(0.1) == Fraction(1, 10)
        assert exact_fraction(1 / 3) == Fraction(1, 3)
        assert exact_fraction(0.0) == 0

    def test_scaled_ceil_exact_products(self):
        """Test products that are whole numbers are not rounded up by float error."""
        # 6 * 0.1 * 10 is 6.000000000000001 in floating point
        assert scaled_ceil(6, 0.1, 0.0, 10) == 6
        assert scaled_ceil(6, 0.05, 0.05, 10) == 6
        assert scaled_ceil(6, 0.01, 0.0, 40) == 3
        assert scaled_ceil(2, 0.0, 0.0, 100) == 0


class TestInputValidator:
    """Test cases for InputValidator class."""

    def test_validate_similarity_valid(self):
        """Test a valid similarity matrix."""
        result = InputValidator.validate_similarity([[1.0, 0.5], [0.5, 1.0]])

        assert result.is_valid
        assert result.sanitized_value.dtype == np.float64

    def test_validate_similarity_invalid(self):
        """Test invalid similarity matrices."""
        invalid = [
            [[1.0, 0.5]],  # Not square
            [],  # Empty
            [[1.0, 2.0], [2.0, 1.0]],  # Out of range
            [[1.0, np.nan], [np.nan, 1.0]],  # Not finite
            [[1.0, 0.5], [0.4, 1.0]],  # Asymmetric
            [["a", "b"], ["c", "d"]],  # Not numeric
        ]

        for values in invalid:
            result = InputValidator.validate_similarity(values)
            assert not result.is_valid, f"{values} should be invalid"
            assert result.sanitized_value is None

    def test_first_asymmetric_pair(self):
        """Test the first asymmetric pair in row-major order."""
        values = np.eye(4)
        values[2, 3] = 0.3
        values[1, 3] = 0.2

        assert InputValidator.first_asymmetric_pair(values) == (1, 3)
        assert InputValidator.first_asymmetric_pair(np.eye(3)) is None

    def test_validate_dissimilarity(self):
        """Test dissimilarity validation."""
        assert InputValidator.validate_dissimilarity([[0.0, 1.0], [1.0, 0.0]]).is_valid
        assert not InputValidator.validate_dissimilarity([[0.0, -1.0], [-1.0, 0.0]]).is_valid
        assert not InputValidator.validate_dissimilarity([[1.0, 1.0], [1.0, 0.0]]).is_valid

    def test_validate_labeling(self):
        """Test labeling validation."""
        result = InputValidator.validate_labeling([1, 2, 2, 1])
        assert result.is_valid
        assert result.sanitized_value.tolist() == [1, 2, 2, 1]

        assert InputValidator.validate_labeling([1.0, 2.0]).is_valid
        assert not InputValidator.validate_labeling([0, 1]).is_valid
        assert not InputValidator.validate_labeling([1, 3], k=2).is_valid
        assert not InputValidator.validate_labeling([1.5, 2]).is_valid
        assert not InputValidator.validate_labeling([]).is_valid

    def test_validate_fraction(self):
        """Test fraction validation with open and closed ends."""
        assert InputValidator.validate_fraction(0.0, "alpha").is_valid
        assert not InputValidator.validate_fraction(1.0, "alpha").is_valid
        assert InputValidator.validate_fraction(1.0, "beta", open_high=False).is_valid
        assert not InputValidator.validate_fraction(0.0, "delta", open_low=True).is_valid
        assert not InputValidator.validate_fraction("abc", "alpha").is_valid
        assert not InputValidator.validate_fraction(float("nan"), "alpha").is_valid

    def test_validate_noise_params(self):
        """Test the initial threshold bound."""
        result = InputValidator.validate_noise_params(0.01, 0.0, 40)

        assert result.is_valid
        assert result.sanitized_value == (0.01, 0.0, 4)


class TestValidationFunctions:
    """Test cases for the raising validation functions."""

    def test_validate_similarity_params_asymmetry(self):
        """Test the asymmetry error names the first pair."""
        with pytest.raises(AsymmetryError) as excinfo:
            validate_similarity_params(asymmetric_values())

        assert excinfo.value.pair == (1, 2)

    def test_validate_similarity_params_range(self):
        """Test out-of-range values raise a validation error."""
        with pytest.raises(LinkageError) as excinfo:
            validate_similarity_params([[1.0, 1.5], [1.5, 1.0]])

        assert excinfo.value.error_code == ErrorCode.VALIDATION_ERROR

    def test_validate_dissimilarity_params(self):
        """Test the raising dissimilarity validator."""
        values = validate_dissimilarity_params([[0, 2], [2, 0]])

        assert values.tolist() == [[0.0, 2.0], [2.0, 0.0]]
        with pytest.raises(LinkageError):
            validate_dissimilarity_params([[0, 2], [3, 0]])

    def test_validate_noise_params_too_large(self):
        """Test noise parameters leaving no threshold raise ParamsTooLarge."""
        with pytest.raises(ParamsTooLarge) as excinfo:
            validate_noise_params(0.2, 0.0, 10)

        assert excinfo.value.details["t_init"] == 13

    def test_validate_noise_params_boundary(self):
        """Test the largest admissible initial threshold n - 1."""
        # ceil(6 * 0.1 * 10) + 1 = 7 <= 9
        assert validate_noise_params(0.1, 0.0, 10)["t_init"] == 7
        # ceil(6 * 0.14 * 10) + 1 = 10 > 9
        with pytest.raises(ParamsTooLarge):
            validate_noise_params(0.14, 0.0, 10)

    def test_validate_noise_params_not_fraction(self):
        """Test invalid fractions raise a validation error."""
        with pytest.raises(LinkageError) as excinfo:
            validate_noise_params(-0.1, 0.0, 10)

        assert excinfo.value.error_code == ErrorCode.VALIDATION_ERROR

    def test_validate_fraction_param(self):
        """Test the raising fraction validator."""
        assert validate_fraction_param("0.25", "alpha") == 0.25
        with pytest.raises(LinkageError, match="alpha"):
            validate_fraction_param(1.0, "alpha")
