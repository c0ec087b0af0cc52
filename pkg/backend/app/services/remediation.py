"""Remediation service for user-facing error messages, recovery actions and exit codes."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from ..models.errors import RenormError


class ErrorCode(Enum):
    """Error classification codes."""

    SPEC = "spec_error"
    HYPOTHESIS = "hypothesis_violation"
    NUMERICAL = "numerical_failure"
    UNKNOWN = "unknown_error"


@dataclass(slots=True)
class RemediationAdvice:
    """Structured remediation advice for errors."""

    error_code: ErrorCode
    message: str
    action: str
    severity: str  # "info", "warning", "error"
    exit_code: int


class RemediationService:
    """Generate remediation advice for toolkit failures."""

    _ERROR_MESSAGES = {
        ErrorCode.SPEC: {
            "message": "The equation spec or an input file is invalid",
            "action": "Check the spec against the documented schema and the tree grammar",
            "severity": "error",
            "exit_code": 2,
        },
        ErrorCode.HYPOTHESIS: {
            "message": "A structural hypothesis of the renormalisation does not hold",
            "action": "Restrict the character to B⁻ and keep planted trees fixed by the preparation map",
            "severity": "error",
            "exit_code": 3,
        },
        ErrorCode.NUMERICAL: {
            "message": "A numerical evaluation failed",
            "action": "Use positive times, more Fourier modes or a finer grid and try again",
            "severity": "error",
            "exit_code": 4,
        },
        ErrorCode.UNKNOWN: {
            "message": "An unexpected error occurred",
            "action": "Check logs and try again",
            "severity": "error",
            "exit_code": 1,
        },
    }

    @classmethod
    def get_advice(cls, error_code: ErrorCode) -> RemediationAdvice:
        """Get remediation advice for an error code."""
        info = cls._ERROR_MESSAGES.get(error_code, cls._ERROR_MESSAGES[ErrorCode.UNKNOWN])
        return RemediationAdvice(
            error_code=error_code,
            message=str(info["message"]),
            action=str(info["action"]),
            severity=str(info["severity"]),
            exit_code=int(info["exit_code"]),
        )

    @classmethod
    def message_from_exception(cls, exc: Exception) -> RemediationAdvice:
        """Classify an exception by its ``error_code`` and return remediation advice."""
        if isinstance(exc, RenormError):
            try:
                code = ErrorCode(exc.error_code)
            except ValueError:
                code = ErrorCode.UNKNOWN
        elif isinstance(exc, (FloatingPointError, ZeroDivisionError, OverflowError)):
            code = ErrorCode.NUMERICAL
        else:
            code = ErrorCode.UNKNOWN
        return cls.get_advice(code)
