"""Equation specification for systems

    (∂₀ − L^i) u_i = Σ_l f^i_l(u) ξ_l + g^i(u, ∂₁u),   L^i = a^i(x1) ∂₁² + b^i(x1) ∂₁

on [0, T) × 𝕋. Specs are JSON or TOML files validated with pydantic.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import SpecError
from .tree import DegreeAssignment


def _as_fraction_text(value: Any) -> str:
    try:
        return str(Fraction(str(value)))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"{value!r} is not a rational number") from exc


class NoiseSpec(BaseModel):
    """One driving noise ξ_l and its regularity α_l (before the κ shift)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    alpha: str  # 有理數字串，例如 "-3/2"
    name: str | None = None

    @field_validator("alpha", mode="before")
    @classmethod
    def _normalise(cls, value: Any) -> str:
        return _as_fraction_text(value)


class ComponentSpec(BaseModel):
    """One equation of the system.

    屬性:
        a: 擴散係數 a(x1)
        b: 漂移係數 b(x1)
        f: 噪聲索引 → f_l(u) 表達式
        g: 無噪聲項 g(u, ∂₁u)
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    a: str = "1"  # 擴散係數
    b: str = "0"  # 漂移係數
    f: dict[int, str] = Field(default_factory=dict)  # 噪聲係數
    g: str = "0"  # 漂移非線性

    @field_validator("f")
    @classmethod
    def _noise_indices_positive(cls, value: dict[int, str]) -> dict[int, str]:
        if any(index < 1 for index in value):
            raise ValueError("noise indices in f start at 1")
        return value


class EquationSpec(BaseModel):
    """Full system specification with degree cutoff and basis knobs."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str = "equation"
    components: list[ComponentSpec] = Field(min_length=1)
    noises: list[NoiseSpec] = Field(default_factory=list)
    cutoff: str  # 度數截斷 γ
    kappa: str = "0"  # κ 偏移
    max_poly_degree: int = Field(default=2, ge=0)  # |k|_s 上限
    max_fan_in: int | None = Field(default=None, ge=1)
    derivative_cap: int = Field(default=1, ge=0, le=1)

    @field_validator("cutoff", "kappa", mode="before")
    @classmethod
    def _rationals(cls, value: Any) -> str:
        return _as_fraction_text(value)

    @model_validator(mode="after")
    def _check_consistency(self) -> EquationSpec:
        for index, component in enumerate(self.components, start=1):
            unknown = [noise for noise in component.f if noise > len(self.noises)]
            if unknown:
                raise ValueError(f"component {index} refers to undeclared noises {unknown}")
        if Fraction(self.cutoff) <= 0:
            raise ValueError("cutoff must be positive")
        return self

    @property
    def component_count(self) -> int:
        return len(self.components)

    @property
    def noise_count(self) -> int:
        return len(self.noises)

    @property
    def cutoff_value(self) -> Fraction:
        return Fraction(self.cutoff)

    def degree_assignment(self) -> DegreeAssignment:
        """α_l − κ for every declared noise, β = 2."""
        kappa = Fraction(self.kappa)
        return DegreeAssignment(tuple(Fraction(noise.alpha) - kappa for noise in self.noises))

    @classmethod
    def from_payload(cls, payload: dict[str, Any]) -> EquationSpec:
        try:
            return cls.model_validate(payload)
        except ValidationError as exc:
            raise SpecError(f"invalid equation spec: {exc}") from exc

    @classmethod
    def from_file(cls, path: Path | str) -> EquationSpec:
        """Load a JSON (or, with tomllib available, TOML) spec file."""
        path = Path(path)
        if not path.is_file():
            raise SpecError(f"spec file not found: {path}")
        text = path.read_text(encoding="utf-8")
        if path.suffix.lower() == ".toml":
            try:
                import tomllib
            except ModuleNotFoundError as exc:  # Python 3.10
                raise SpecError("TOML specs need Python 3.11 or newer") from exc
            try:
                payload = tomllib.loads(text)
            except tomllib.TOMLDecodeError as exc:
                raise SpecError(f"invalid TOML in {path}: {exc}") from exc
        else:
            try:
                payload = json.loads(text)
            except json.JSONDecodeError as exc:
                raise SpecError(f"invalid JSON in {path}: {exc}") from exc
        if not isinstance(payload, dict):
            raise SpecError(f"spec file {path} must hold an object")
        return cls.from_payload(payload)
