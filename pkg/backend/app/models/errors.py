"""Exception hierarchy shared by every layer.

Each exception carries an ``error_code`` string matching
``backend.app.services.remediation.ErrorCode`` so the CLI can map failures to
advice and exit codes without inspecting messages.
"""

from __future__ import annotations


class RenormError(Exception):
    """Base class for toolkit failures."""

    error_code = "unknown_error"


class SpecError(RenormError, ValueError):
    """Malformed equation spec, unknown noise index or invalid input file."""

    error_code = "spec_error"


class TreeSyntaxError(SpecError):
    """Tree text does not follow the tree grammar.

    屬性:
        position: 出錯字元在輸入字串中的位置（從 0 起算）
    """

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} at position {position}")
        self.position = position  # 出錯位置


class HypothesisViolation(RenormError):
    """A preparation map or character breaks a structural hypothesis."""

    error_code = "hypothesis_violation"


class NumericalFailure(RenormError):
    """Quadrature, extrapolation or kernel evaluation failed."""

    error_code = "numerical_failure"
