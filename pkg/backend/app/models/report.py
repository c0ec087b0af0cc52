"""Report records shared by validation, kernel checks and model checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True, slots=True)
class Diagnostic:
    """One check outcome.

    屬性:
        check: 檢查名稱（ellipticity、subcriticality、cutoff ...）
        passed: 是否通過
        message: 人類可讀說明
        severity: "info"、"warning" 或 "error"
    """

    check: str  # 檢查名稱
    passed: bool  # 是否通過
    message: str  # 說明
    severity: str = "error"  # 失敗時的嚴重程度

    def as_dict(self) -> dict[str, Any]:
        return {"check": self.check, "passed": self.passed, "message": self.message, "severity": self.severity}


@dataclass(frozen=True, slots=True)
class SlopeFit:
    """Least-squares slope of log(value) against log(scale).

    屬性:
        label: 被檢查的量
        slope: 擬合斜率
        expected: 理論斜率
        tolerance: 容許誤差
        scales: 取樣尺度
        values: 對應的量測值
    """

    label: str  # 名稱
    slope: float  # 擬合斜率
    expected: float  # 理論值
    tolerance: float  # 容許誤差
    scales: tuple[float, ...] = field(default_factory=tuple)  # 尺度
    values: tuple[float, ...] = field(default_factory=tuple)  # 量測值

    @property
    def passed(self) -> bool:
        return abs(self.slope - self.expected) <= self.tolerance

    def as_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "slope": self.slope,
            "expected": self.expected,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "scales": list(self.scales),
            "values": list(self.values),
        }


@dataclass(frozen=True, slots=True)
class CheckResult:
    """Outcome of an identity check with its first witness."""

    name: str
    passed: bool
    max_error: float = 0.0  # 最大誤差
    witness: str | None = None  # 第一個違反的例子

    def as_dict(self) -> dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "maxError": self.max_error, "witness": self.witness}
