"""
Structured error handling for robust-linkage.

This module provides the error classes raised by the clustering engines,
verifiers, generators and file readers, together with helpful messages,
suggestions and the mapping onto command-line exit statuses.
"""

from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Union

from pydantic import BaseModel


class ErrorCode(str, Enum):
    """Standard error codes for robust-linkage operations."""

    # General errors
    INTERNAL_ERROR = "INTERNAL_ERROR"
    INVALID_INPUT = "INVALID_INPUT"
    VALIDATION_ERROR = "VALIDATION_ERROR"

    # Tree errors
    PRUNING_OVERLAP = "PRUNING_OVERLAP"
    PRUNING_COVERAGE = "PRUNING_COVERAGE"
    K_TOO_LARGE = "K_TOO_LARGE"

    # Algorithm errors
    PARAMS_TOO_LARGE = "PARAMS_TOO_LARGE"
    NO_NON_SINGLETON_BLOB = "NO_NON_SINGLETON_BLOB"

    # Verifier and generator errors
    SUBSET_INVALID = "SUBSET_INVALID"
    CERTIFICATION_FAILED = "CERTIFICATION_FAILED"
    KIND_MISMATCH = "KIND_MISMATCH"

    # File errors
    FILE_NOT_FOUND = "FILE_NOT_FOUND"
    PARSE_ERROR = "PARSE_ERROR"
    ASYMMETRY = "ASYMMETRY"


class ErrorSeverity(str, Enum):
    """Error severity levels."""

    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


# Codes caused by the caller's input; everything else is an internal failure.
VALIDATION_CODES = frozenset(
    {
        ErrorCode.INVALID_INPUT,
        ErrorCode.VALIDATION_ERROR,
        ErrorCode.PRUNING_OVERLAP,
        ErrorCode.PRUNING_COVERAGE,
        ErrorCode.K_TOO_LARGE,
        ErrorCode.PARAMS_TOO_LARGE,
        ErrorCode.SUBSET_INVALID,
        ErrorCode.KIND_MISMATCH,
        ErrorCode.FILE_NOT_FOUND,
        ErrorCode.PARSE_ERROR,
        ErrorCode.ASYMMETRY,
    }
)


class ErrorSuggestion(BaseModel):
    """Suggestion for resolving an error."""

    action: str
    description: str
    example: Optional[str] = None


class LinkageError(Exception):
    """
    Structured error class for robust-linkage operations.

    Provides comprehensive error information including error codes,
    helpful messages, suggestions, and context.
    """

    default_code = ErrorCode.INTERNAL_ERROR

    def __init__(
        self,
        message: str,
        error_code: Optional[ErrorCode] = None,
        severity: ErrorSeverity = ErrorSeverity.MEDIUM,
        details: Optional[Dict[str, Any]] = None,
        suggestions: Optional[List[ErrorSuggestion]] = None,
        context: Optional[Dict[str, Any]] = None,
        cause: Optional[Exception] = None,
    ):
        super().__init__(message)
        self.message = message
        self.error_code = error_code or self.default_code
        self.severity = severity
        self.details = details or {}
        self.suggestions = suggestions or []
        self.context = context or {}
        self.cause = cause

    @property
    def exit_status(self) -> int:
        """Process exit status for this error: 2 for bad input, 1 otherwise."""
        return 2 if self.error_code in VALIDATION_CODES else 1

    def to_dict(self) -> Dict[str, Any]:
        """Convert error to dictionary for reports and logs."""
        return {
            "success": False,
            "error_code": self.error_code.value,
            "message": self.message,
            "severity": self.severity.value,
            "details": self.details,
            "suggestions": [{"action": s.action, "description": s.description, "example": s.example} for s in self.suggestions],
            "context": self.context,
            "cause": str(self.cause) if self.cause else None,
        }


class OverlapError(LinkageError):
    """Two nodes of a proposed pruning share points."""

    default_code = ErrorCode.PRUNING_OVERLAP


class CoverageError(LinkageError):
    """A proposed pruning does not cover every point."""

    default_code = ErrorCode.PRUNING_COVERAGE


class KTooLarge(LinkageError):
    """Requested pruning size exceeds the number of leaves."""

    default_code = ErrorCode.K_TOO_LARGE


class ParamsTooLarge(LinkageError):
    """Noise parameters violate 6(alpha+nu)n + 1 <= n - 1."""

    default_code = ErrorCode.PARAMS_TOO_LARGE


class NoNonSingletonBlob(LinkageError):
    """Singleton attachment was requested while every blob is a singleton."""

    default_code = ErrorCode.NO_NON_SINGLETON_BLOB


class SubsetInvalid(LinkageError):
    """A supplied local subset A_p breaks its preconditions."""

    default_code = ErrorCode.SUBSET_INVALID


class CertificationFailed(LinkageError):
    """A generated instance could not be certified."""

    default_code = ErrorCode.CERTIFICATION_FAILED


class KindMismatch(LinkageError):
    """A noise kind was applied to the wrong data type."""

    default_code = ErrorCode.KIND_MISMATCH


class ParseError(LinkageError):
    """A data file could not be parsed."""

    default_code = ErrorCode.PARSE_ERROR

    def __init__(self, message: str, line: int, column: int = 0, **kwargs: Any):
        super().__init__(message, **kwargs)
        self.line = line
        self.column = column


class AsymmetryError(LinkageError):
    """A similarity file is not symmetric."""

    default_code = ErrorCode.ASYMMETRY

    def __init__(self, message: str, pair: Sequence[int], **kwargs: Any):
        super().__init__(message, **kwargs)
        self.pair = (int(pair[0]), int(pair[1]))


class ErrorFactory:
    """Factory for creating common robust-linkage errors with helpful suggestions."""

    @staticmethod
    def params_too_large(alpha: float, nu: float, n: int, t_init: int) -> ParamsTooLarge:
        """Create an error for noise parameters that leave no room for thresholds."""
        return ParamsTooLarge(
            message=(f"Noise parameters alpha={alpha}, nu={nu} are too large for n={n}: " f"need 6(alpha+nu)n + 1 <= n - 1, got initial threshold {t_init} > {n - 1}"),
            details={"alpha": alpha, "nu": nu, "n": n, "t_init": t_init},
            suggestions=[
                ErrorSuggestion(
                    action="reduce_noise",
                    description="Lower alpha and/or nu so that alpha + nu < 1/6 with room to spare",
                    example="--alpha 0.02 --nu 0.0",
                ),
                ErrorSuggestion(
                    action="increase_n",
                    description="Cluster more points; the bound is relative to n",
                ),
            ],
        )

    @staticmethod
    def pruning_overlap(first: int, second: int, shared: Sequence[int]) -> OverlapError:
        """Create an error for a pruning whose nodes overlap."""
        return OverlapError(
            message=f"Pruning nodes {first} and {second} share {len(shared)} point(s)",
            details={"nodes": [first, second], "shared_points": list(shared)[:10]},
            suggestions=[
                ErrorSuggestion(
                    action="use_antichain",
                    description="Choose nodes none of which is an ancestor of another",
                )
            ],
        )

    @staticmethod
    def pruning_coverage(missing: Sequence[int]) -> CoverageError:
        """Create an error for a pruning that misses points."""
        return CoverageError(
            message=f"Pruning does not cover {len(missing)} point(s)",
            details={"missing_points": list(missing)[:10]},
            suggestions=[
                ErrorSuggestion(
                    action="add_nodes",
                    description="Add tree nodes until every leaf lies under some pruning node",
                )
            ],
        )

    @staticmethod
    def k_too_large(k: int, leaves: int) -> KTooLarge:
        """Create an error for an impossible pruning size."""
        return KTooLarge(
            message=f"Cannot prune a tree with {leaves} leaves into k={k} clusters",
            details={"k": k, "leaves": leaves},
            suggestions=[ErrorSuggestion(action="lower_k", description="Use 1 <= k <= number of leaves")],
        )

    @staticmethod
    def subset_invalid(point: int, reason: str) -> SubsetInvalid:
        """Create an error for a bad local subset."""
        return SubsetInvalid(
            message=f"Subset A_p for point {point} is invalid: {reason}",
            details={"point": point, "reason": reason},
            suggestions=[
                ErrorSuggestion(
                    action="check_subset",
                    description="A_p must contain p, lie inside C(p) minus the bad set, and exceed 6(alpha+nu)n points",
                )
            ],
        )

    @staticmethod
    def certification_failed(attempts: int, minimal_alpha: float) -> CertificationFailed:
        """Create an error for a planted instance that never certified."""
        return CertificationFailed(
            message=f"Planted instance failed certification after {attempts} attempts (last minimal alpha {minimal_alpha:.4f})",
            severity=ErrorSeverity.HIGH,
            details={"attempts": attempts, "minimal_alpha": minimal_alpha},
            suggestions=[
                ErrorSuggestion(
                    action="relax_parameters",
                    description="Use larger clusters or a smaller alpha",
                )
            ],
        )

    @staticmethod
    def kind_mismatch(kind: str, data_type: str) -> KindMismatch:
        """Create an error for a noise kind applied to the wrong data."""
        return KindMismatch(
            message=f"Noise kind '{kind}' cannot be applied to {data_type}",
            details={"kind": kind, "data_type": data_type},
            suggestions=[
                ErrorSuggestion(
                    action="match_kind",
                    description="attr_corrupt and attr_gauss need an attribute table; sim_corrupt needs a similarity matrix",
                )
            ],
        )

    @staticmethod
    def parse_error(path: str, line: int, column: int, reason: str) -> ParseError:
        """Create a parse error pointing at the offending location."""
        return ParseError(
            message=f"{path}:{line}:{column}: {reason}",
            line=line,
            column=column,
            details={"path": path, "line": line, "column": column, "reason": reason},
        )

    @staticmethod
    def asymmetry(i: int, j: int, forward: float, backward: float) -> AsymmetryError:
        """Create an error for the first asymmetric pair."""
        return AsymmetryError(
            message=f"Matrix is not symmetric: values[{i}][{j}]={forward!r} but values[{j}][{i}]={backward!r}",
            pair=(i, j),
            details={"pair": [i, j], "forward": forward, "backward": backward},
        )

    @staticmethod
    def file_not_found(path: str) -> LinkageError:
        """Create a missing-file error."""
        return LinkageError(
            message=f"File not found: {path}",
            error_code=ErrorCode.FILE_NOT_FOUND,
            details={"path": path},
        )

    @staticmethod
    def validation_error(field: str, value: Any, reason: str) -> LinkageError:
        """Create a validation error with suggestions."""
        return LinkageError(
            message=f"Validation error for field '{field}': {reason}",
            error_code=ErrorCode.VALIDATION_ERROR,
            severity=ErrorSeverity.MEDIUM,
            details={"field": field, "value": str(value), "reason": reason},
            suggestions=[
                ErrorSuggestion(
                    action="check_constraints",
                    description="Ensure the value meets all documented constraints",
                ),
            ],
        )


def format_error_response(error: Union[LinkageError, Exception]) -> Dict[str, Any]:
    """
    Format an error for reporting.

    Args:
        error: The error to format

    Returns:
        Formatted error response dictionary
    """
    if isinstance(error, LinkageError):
        return error.to_dict()
    else:
        return LinkageError(
            message=str(error),
            error_code=ErrorCode.INTERNAL_ERROR,
            severity=ErrorSeverity.HIGH,
            details={"error_type": type(error).__name__},
            cause=error,
        ).to_dict()
