"""
Tests for the structured error handling system.
"""

from robust_linkage.errors import (
    AsymmetryError,
    CertificationFailed,
    ErrorCode,
    ErrorFactory,
    ErrorSeverity,
    ErrorSuggestion,
    KindMismatch,
    KTooLarge,
    LinkageError,
    NoNonSingletonBlob,
    ParamsTooLarge,
    ParseError,
    SubsetInvalid,
    format_error_response,
)


class TestErrorSuggestion:
    """Test cases for ErrorSuggestion model."""

    def test_create_suggestion(self):
        """Test creating an error suggestion."""
        suggestion = ErrorSuggestion(action="lower_k", description="Use a smaller k", example="--k 2")

        assert suggestion.action == "lower_k"
        assert suggestion.description == "Use a smaller k"
        assert suggestion.example == "--k 2"

    def test_suggestion_without_example(self):
        """Test creating a suggestion without example."""
        suggestion = ErrorSuggestion(action="lower_k", description="Use a smaller k")

        assert suggestion.example is None


class TestLinkageError:
    """Test cases for LinkageError class."""

    def test_create_basic_error(self):
        """Test creating a basic LinkageError."""
        error = LinkageError("Something broke")

        assert error.message == "Something broke"
        assert error.error_code == ErrorCode.INTERNAL_ERROR
        assert error.severity == ErrorSeverity.MEDIUM
        assert error.details == {}
        assert error.suggestions == []
        assert error.cause is None
        assert str(error) == "Something broke"

    def test_subclass_default_codes(self):
        """Test that each subclass carries its own error code."""
        assert ParamsTooLarge("x").error_code == ErrorCode.PARAMS_TOO_LARGE
        assert KTooLarge("x").error_code == ErrorCode.K_TOO_LARGE
        assert NoNonSingletonBlob("x").error_code == ErrorCode.NO_NON_SINGLETON_BLOB
        assert SubsetInvalid("x").error_code == ErrorCode.SUBSET_INVALID
        assert CertificationFailed("x").error_code == ErrorCode.CERTIFICATION_FAILED
        assert KindMismatch("x").error_code == ErrorCode.KIND_MISMATCH

    def test_exit_status(self):
        """Test that input errors exit with 2 and internal failures with 1."""
        assert ErrorFactory.validation_error("alpha", 2, "too big").exit_status == 2
        assert ErrorFactory.k_too_large(9, 4).exit_status == 2
        assert ErrorFactory.parse_error("f.txt", 3, 1, "bad").exit_status == 2
        assert LinkageError("boom").exit_status == 1
        assert ErrorFactory.certification_failed(10, 0.2).exit_status == 1
        assert NoNonSingletonBlob("none").exit_status == 1

    def test_to_dict(self):
        """Test converting LinkageError to dictionary."""
        cause = ValueError("root cause")
        error = LinkageError(
            message="Detailed error",
            error_code=ErrorCode.VALIDATION_ERROR,
            severity=ErrorSeverity.HIGH,
            details={"field": "alpha"},
            suggestions=[ErrorSuggestion(action="fix", description="Fix it")],
            context={"command": "cluster"},
            cause=cause,
        )

        result = error.to_dict()

        assert result["success"] is False
        assert result["error_code"] == "VALIDATION_ERROR"
        assert result["severity"] == "high"
        assert result["details"] == {"field": "alpha"}
        assert result["suggestions"] == [{"action": "fix", "description": "Fix it", "example": None}]
        assert result["context"] == {"command": "cluster"}
        assert result["cause"] == "root cause"


class TestErrorFactory:
    """Test cases for ErrorFactory."""

    def test_params_too_large(self):
        """Test the error for noise parameters beyond the threshold bound."""
        error = ErrorFactory.params_too_large(0.2, 0.0, 10, 14)

        assert isinstance(error, ParamsTooLarge)
        assert error.details == {"alpha": 0.2, "nu": 0.0, "n": 10, "t_init": 14}
        assert "n=10" in error.message
        assert len(error.suggestions) == 2

    def test_pruning_overlap(self):
        """Test the overlap error keeps at most ten shared points."""
        error = ErrorFactory.pruning_overlap(5, 7, list(range(30)))

        assert error.error_code == ErrorCode.PRUNING_OVERLAP
        assert error.details["nodes"] == [5, 7]
        assert error.details["shared_points"] == list(range(10))
        assert "30 point(s)" in error.message

    def test_pruning_coverage(self):
        """Test the coverage error reports the missing points."""
        error = ErrorFactory.pruning_coverage([3, 4])

        assert error.error_code == ErrorCode.PRUNING_COVERAGE
        assert error.details["missing_points"] == [3, 4]

    def test_subset_invalid(self):
        """Test the subset error names the point."""
        error = ErrorFactory.subset_invalid(12, "no subset supplied")

        assert isinstance(error, SubsetInvalid)
        assert error.details == {"point": 12, "reason": "no subset supplied"}
        assert "point 12" in error.message

    def test_certification_failed(self):
        """Test the certification error is high severity."""
        error = ErrorFactory.certification_failed(10, 0.125)

        assert error.severity == ErrorSeverity.HIGH
        assert error.details["attempts"] == 10
        assert "0.1250" in error.message

    def test_kind_mismatch(self):
        """Test the noise kind error."""
        error = ErrorFactory.kind_mismatch("attr_gauss", "SimilarityMatrix")

        assert isinstance(error, KindMismatch)
        assert "attr_gauss" in error.message
        assert "SimilarityMatrix" in error.message

    def test_parse_error_location(self):
        """Test the parse error carries its line and column."""
        error = ErrorFactory.parse_error("sim.txt", 4, 9, "cannot parse 'x'")

        assert isinstance(error, ParseError)
        assert error.line == 4
        assert error.column == 9
        assert error.message == "sim.txt:4:9: cannot parse 'x'"

    def test_asymmetry(self):
        """Test the asymmetry error carries the offending pair."""
        error = ErrorFactory.asymmetry(1, 2, 0.5, 0.0)

        assert isinstance(error, AsymmetryError)
        assert error.pair == (1, 2)
        assert error.error_code == ErrorCode.ASYMMETRY
        assert error.details["forward"] == 0.5

    def test_file_not_found(self):
        """Test the missing file error."""
        error = ErrorFactory.file_not_found("/nowhere/sim.txt")

        assert error.error_code == ErrorCode.FILE_NOT_FOUND
        assert error.details["path"] == "/nowhere/sim.txt"

    def test_validation_error(self):
        """Test the validation error."""
        error = ErrorFactory.validation_error("alpha", 1.5, "must lie in [0, 1)")

        assert error.error_code == ErrorCode.VALIDATION_ERROR
        assert error.details == {"field": "alpha", "value": "1.5", "reason": "must lie in [0, 1)"}
        assert "'alpha'" in error.message


class TestFormatErrorResponse:
    """Test cases for format_error_response."""

    def test_format_linkage_error(self):
        """Test formatting a LinkageError."""
        error = ErrorFactory.k_too_large(5, 3)

        response = format_error_response(error)

        assert response["error_code"] == "K_TOO_LARGE"
        assert response["details"] == {"k": 5, "leaves": 3}

    def test_format_generic_exception(self):
        """Test formatting a generic exception."""
        response = format_error_response(RuntimeError("unexpected"))

        assert response["error_code"] == "INTERNAL_ERROR"
        assert response["severity"] == "high"
        assert response["details"] == {"error_type": "RuntimeError"}
        assert response["cause"] == "unexpected"
