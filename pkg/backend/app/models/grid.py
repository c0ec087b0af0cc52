"""Periodic space-time grids and the functions that live on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Any, Iterator

import numpy as np

from .kernel import TWO_PI, TorusGrid, wrap
from .tree import ZERO, MultiIndex


@dataclass(frozen=True, slots=True)
class SpacetimeGrid:
    """[0, T) × 𝕋, periodic in both directions.

    屬性:
        nt: 時間方向格點數
        nx: 空間方向格點數
        horizon: 時間週期 T
    """

    nt: int  # 時間格點數
    nx: int  # 空間格點數
    horizon: float = 1.0  # 時間週期 T
    space: TorusGrid = field(init=False, repr=False)
    t_points: np.ndarray = field(init=False, repr=False)
    frequencies: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.nt < 4:
            raise ValueError("space-time grid needs at least 4 time points")
        if not self.horizon > 0:
            raise ValueError("time horizon must be positive")
        object.__setattr__(self, "space", TorusGrid(self.nx))
        object.__setattr__(self, "t_points", np.arange(self.nt) * self.horizon / self.nt)
        object.__setattr__(self, "frequencies", TWO_PI * np.fft.fftfreq(self.nt, d=self.horizon / self.nt))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nt, self.nx)

    @property
    def x_points(self) -> np.ndarray:
        return self.space.points

    @property
    def dt(self) -> float:
        return self.horizon / self.nt

    @property
    def dx(self) -> float:
        return self.space.step

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.t_points, self.x_points, indexing="ij")

    def point(self, index: tuple[int, int]) -> tuple[float, float]:
        return float(self.t_points[index[0]]), float(self.x_points[index[1]])

    def unwrapped(self, index: tuple[int, int], around: tuple[int, int]) -> tuple[float, float]:
        """Coordinates of ``index`` in the period nearest to ``around``."""
        y0, y1 = self.point(index)
        x0, x1 = self.point(around)
        return x0 + float(wrap(y0 - x0, self.horizon)), x1 + float(wrap(y1 - x1))

    def centred_mesh(self, index: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
        """Grid coordinates unwrapped around a grid point."""
        x0, x1 = self.point(index)
        t_mesh, x_mesh = self.mesh()
        return x0 + wrap(t_mesh - x0, self.horizon), x1 + wrap(x_mesh - x1)

    def distance_from(self, index: tuple[int, int]) -> np.ndarray:
        """Parabolic distance √|y₀ − x₀| + |y₁ − x₁| to every grid point."""
        x0, x1 = self.point(index)
        t_mesh, x_mesh = self.mesh()
        return np.sqrt(np.abs(wrap(t_mesh - x0, self.horizon))) + np.abs(wrap(x_mesh - x1))

    def d_time(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        """Spectral ∂₀^order."""
        if order == 0:
            return values
        multiplier = (1j * self.frequencies) ** order
        if order % 2 == 1:
            multiplier[self.nt // 2] = 0.0
        return np.real(np.fft.ifft(multiplier[:, None] * np.fft.fft(values, axis=0), axis=0))

    def d_space(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        """Spectral ∂₁^order."""
        if order == 0:
            return values
        multiplier = (1j * self.space.wavenumbers) ** order
        if order % 2 == 1:
            multiplier[self.nx // 2] = 0.0
        return np.real(np.fft.ifft(multiplier[None, :] * np.fft.fft(values, axis=1), axis=1))

    def derivative(self, values: np.ndarray, k: MultiIndex) -> np.ndarray:
        return self.d_space(self.d_time(values, k[0]), k[1])

    def as_dict(self) -> dict[str, Any]:
        return {"nt": self.nt, "nx": self.nx, "horizon": self.horizon}


@dataclass(frozen=True, slots=True)
class GridFunction:
    """Samples on a space-time grid with a label for dumps and reports."""

    grid: SpacetimeGrid
    values: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        if self.values.shape != self.grid.shape:
            raise ValueError(f"{self.label or 'grid function'}: shape {self.values.shape} != {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"{self.label or 'grid function'}: non-finite values")

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def as_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "sup": self.sup(),
            "mean": float(np.mean(self.values)),
            "l2": float(np.sqrt(np.mean(self.values**2))),
        }


def _monomial(t: np.ndarray, x: np.ndarray, k: MultiIndex) -> np.ndarray:
    return t ** k[0] * x ** k[1]


class PolyField:
    """Σ_k y^k h_k(y) with periodic coefficients h_k on the grid.

    Polynomial factors stay symbolic so that non-periodic functions such as
    Π(X^k ξ) can be convolved and recentred without wrap-around artefacts.
    """

    __slots__ = ("grid", "parts")

    def __init__(self, grid: SpacetimeGrid, parts: dict[MultiIndex, np.ndarray] | None = None) -> None:
        self.grid = grid
        self.parts: dict[MultiIndex, np.ndarray] = {}
        for k, values in (parts or {}).items():
            self._add(k, values)

    @classmethod
    def constant(cls, grid: SpacetimeGrid, values: Any = 1.0) -> PolyField:
        return cls(grid, {ZERO: np.broadcast_to(np.asarray(values, dtype=float), grid.shape).copy()})

    @classmethod
    def monomial(cls, grid: SpacetimeGrid, k: MultiIndex) -> PolyField:
        return cls(grid, {k: np.ones(grid.shape)})

    @classmethod
    def centred_monomial(cls, grid: SpacetimeGrid, k: MultiIndex, centre: tuple[float, float]) -> PolyField:
        """(y − x)^k = Σ_j binom(k, j) y^j (−x)^{k−j}."""
        field_ = cls(grid)
        for j0 in range(k[0] + 1):
            for j1 in range(k[1] + 1):
                weight = comb(k[0], j0) * comb(k[1], j1) * (-centre[0]) ** (k[0] - j0) * (-centre[1]) ** (k[1] - j1)
                field_._add((j0, j1), np.full(grid.shape, float(weight)))
        return field_

    def _add(self, k: MultiIndex, values: np.ndarray) -> None:
        if k in self.parts:
            self.parts[k] = self.parts[k] + values
        else:
            self.parts[k] = np.array(values, dtype=float, copy=True)

    def __iter__(self) -> Iterator[tuple[MultiIndex, np.ndarray]]:
        return iter(self.parts.items())

    def __bool__(self) -> bool:
        return any(np.any(values) for values in self.parts.values())

    def __add__(self, other: PolyField) -> PolyField:
        result = PolyField(self.grid, self.parts)
        for k, values in other.parts.items():
            result._add(k, values)
        return result

    def __sub__(self, other: PolyField) -> PolyField:
        return self + other.scale(-1.0)

    def scale(self, factor: Any) -> PolyField:
        """Pointwise multiplication by a scalar or a grid array."""
        factor = np.asarray(factor, dtype=float)
        return PolyField(self.grid, {k: values * factor for k, values in self.parts.items()})

    def __mul__(self, other: PolyField) -> PolyField:
        result = PolyField(self.grid)
        for k, first in self.parts.items():
            for m, second in other.parts.items():
                result._add((k[0] + m[0], k[1] + m[1]), first * second)
        return result

    def evaluate(self, centre: tuple[int, int] | None = None) -> np.ndarray:
        """Values on the grid, polynomials read in coordinates unwrapped around ``centre``."""
        t_mesh, x_mesh = self.grid.mesh() if centre is None else self.grid.centred_mesh(centre)
        total = np.zeros(self.grid.shape)
        for k, values in self.parts.items():
            total = total + (values if k == ZERO else _monomial(t_mesh, x_mesh, k) * values)
        return total

    def value_at(self, index: tuple[int, int], coords: tuple[float, float] | None = None) -> float:
        """Value at a grid point, polynomials read at ``coords`` when given."""
        x0, x1 = self.grid.point(index) if coords is None else coords
        return float(sum(x0 ** k[0] * x1 ** k[1] * values[index] for k, values in self.parts.items()))
