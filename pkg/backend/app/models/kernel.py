"""Parabolic geometry, the spatial torus grid and kernel leading terms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .tree import SCALING, MultiIndex, scaled_norm

TWO_PI = 2.0 * np.pi


class ScalingGeometry:
    """Parabolic scaling on ℝ × 𝕋: 𝔰_λ(x) = (λ²x₀, λx₁)."""

    scaling = SCALING

    @staticmethod
    def distance(x: Any, xp: Any) -> np.ndarray:
        """d(x, x′) = √|x₀ − x₀′| + |x₁ − x₁′|, broadcasting over the leading axis pairs."""
        x = np.asarray(x, dtype=float)
        xp = np.asarray(xp, dtype=float)
        return np.sqrt(np.abs(x[..., 0] - xp[..., 0])) + np.abs(x[..., 1] - xp[..., 1])

    @staticmethod
    def scale(lam: float, x: Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.stack([lam**2 * x[..., 0], lam * x[..., 1]], axis=-1)

    @staticmethod
    def scaled_norm(k: MultiIndex) -> int:
        return scaled_norm(k)


def wrap(delta: np.ndarray, period: float = TWO_PI) -> np.ndarray:
    """Representative of a periodic difference in [−period/2, period/2)."""
    return (np.asarray(delta) + period / 2.0) % period - period / 2.0


@dataclass(frozen=True, slots=True)
class TorusGrid:
    """Uniform grid on 𝕋 = [0, 2π).

    屬性:
        nx: 格點數（2 的冪次）
    """

    nx: int  # 格點數
    points: np.ndarray = field(init=False, repr=False)
    step: float = field(init=False)
    wavenumbers: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.nx < 4:
            raise ValueError("torus grid needs at least 4 points")
        object.__setattr__(self, "points", np.arange(self.nx) * TWO_PI / self.nx)
        object.__setattr__(self, "step", TWO_PI / self.nx)
        object.__setattr__(self, "wavenumbers", np.fft.fftfreq(self.nx, d=1.0 / self.nx))

    def offsets(self) -> np.ndarray:
        """wrap(x_i − x_j) as an (nx, nx) matrix."""
        return wrap(self.points[:, None] - self.points[None, :])

    def derivative_matrix(self, order: int = 1) -> np.ndarray:
        """Spectral differentiation matrix ∂₁^order (Nyquist mode zeroed for odd orders)."""
        k = self.wavenumbers.astype(complex)
        multiplier = (1j * k) ** order
        if order % 2 == 1:
            multiplier[self.nx // 2] = 0.0
        identity = np.eye(self.nx)
        return np.real(np.fft.ifft(multiplier[:, None] * np.fft.fft(identity, axis=0), axis=0))

    def interpolate(self, values: np.ndarray, at: np.ndarray) -> np.ndarray:
        """Trigonometric interpolation of periodic samples (last axis) at arbitrary points."""
        coefficients = np.fft.fft(values, axis=-1) / self.nx
        at = np.asarray(at, dtype=float)
        phases = np.exp(1j * np.multiply.outer(at, self.wavenumbers))
        # Nyquist mode as a cosine keeps real samples real.
        phases[..., self.nx // 2] = np.cos(at * (self.nx // 2))
        return np.real(np.tensordot(phases, coefficients, axes=([-1], [-1])))


@dataclass(frozen=True, slots=True)
class LeadingTerm:
    """𝖪(z, x₁′) = K̃(0, z, x₁′) on a z-window.

    Every kernel here factors as g(z₀)·p(z₁) with g the unit-time Gaussian,
    so only the z₁ profile is stored.

    屬性:
        z0: 時間方向的 z 取樣
        z1: 空間方向的 z 取樣（等距）
        profile: z₁ 方向的剖面
        x1p: 凍結點 x₁′
        alpha: 類別指數 α
    """

    z0: np.ndarray  # z₀ 取樣
    z1: np.ndarray  # z₁ 取樣
    profile: np.ndarray  # 剖面
    x1p: float  # x₁′
    alpha: float  # α

    @property
    def values(self) -> np.ndarray:
        gaussian = np.exp(-self.z0**2 / 4.0) / np.sqrt(4.0 * np.pi)
        return np.outer(gaussian, self.profile)

    @property
    def z1_step(self) -> float:
        return float(self.z1[1] - self.z1[0])

    def mass(self) -> float:
        """∫𝖪(z, x₁′)dz; the Gaussian factor has unit mass."""
        return float(np.sum(self.profile) * self.z1_step)

    def sup(self) -> float:
        return float(np.max(np.abs(self.profile)) / np.sqrt(4.0 * np.pi))

    def as_dict(self) -> dict[str, Any]:
        return {"x1p": self.x1p, "alpha": self.alpha, "sup": self.sup(), "mass": self.mass()}
