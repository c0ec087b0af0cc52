"""Green operators (∂₀ − L)⁻¹ built from the G-heat kernel.

K = −∫₀¹ (∂₀ + L) e^{tG} dt satisfies (∂₀ − L)K f = f − e^{G} f, so the
singular part of the inverse comes from the parametrix and the smooth
remainder e^{G} is dropped. On the periodic space-time grid the x₀ direction
is handled in Fourier space and the x₁ direction by the kernel matrices.
"""

from __future__ import annotations

import logging
from math import comb, factorial
from typing import Sequence

import numpy as np
import scipy.linalg
from numpy.polynomial import hermite
from scipy.special import roots_legendre
from tqdm import tqdm

from ..models.equation_spec import EquationSpec
from ..models.grid import PolyField, SpacetimeGrid
from ..models.tree import ZERO, MultiIndex
from .parametrix import OperatorCoefficients, Parametrix

logger = logging.getLogger(__name__)

TIME_NODES = 24
SHORT_TIME_FACTOR = 3.0


def omega_factor(omega: np.ndarray, t: float, power: int, moment: int) -> np.ndarray:
    """(−i d/dω)^moment [(iω)^power e^{−tω²}]."""
    omega = np.asarray(omega, dtype=float)
    root = np.sqrt(t)
    gaussian = np.exp(-t * omega**2)
    total = np.zeros(omega.shape, dtype=complex)
    for r in range(min(moment, power) + 1):
        m = moment - r
        polynomial = (1j**power) * factorial(power) / factorial(power - r) * omega ** (power - r)
        series = np.zeros(m + 1)
        series[m] = 1.0
        gaussian_derivative = (-root) ** m * hermite.hermval(root * omega, series) * gaussian
        total = total + comb(moment, r) * polynomial * gaussian_derivative
    return (-1j) ** moment * total


def fourier_green_symbol(a: float, b: float, omega: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Symbol (1 − e^{−(ω² + ℓ²)})/(iω − ℓ) of K for constant coefficients, ℓ = −ak² + ibk."""
    omega, k = np.broadcast_arrays(np.asarray(omega, dtype=float), np.asarray(k, dtype=float))
    ell = -a * k**2 + 1j * b * k
    denominator = 1j * omega - ell
    numerator = 1.0 - np.exp(-(omega**2 + ell**2))
    zero = np.abs(denominator) < 1e-14
    return np.where(zero, 0.0, numerator / np.where(zero, 1.0, denominator))


class GreenKernel:
    """K^{(𝔱)} for one sort on a periodic space-time grid.

    Heat operators e^{−tL²} come from the Volterra parametrix above the
    resolution limit t = (3h)⁴ and from a matrix exponential below it.
    """

    def __init__(
        self,
        coefficients: OperatorCoefficients,
        grid: SpacetimeGrid,
        n_terms: int = 1,
        modes: int = 64,
        time_nodes: int = TIME_NODES,
        sort: int = 1,
        show_progress: bool = False,
    ) -> None:
        self.coefficients = coefficients
        self.grid = grid
        self.sort = sort
        space = grid.space
        coefficients.require_elliptic(space)
        self.operator = coefficients.operator_matrix(space)
        squared = self.operator @ self.operator
        u, w = roots_legendre(time_nodes)
        u = (u + 1) / 2
        self.times = u**4
        self.weights = w / 2 * 4 * u**3
        split = (SHORT_TIME_FACTOR * space.step) ** 4
        kernel = Parametrix(coefficients, space, modes).volterra(n_terms)
        self.heat: list[np.ndarray] = []
        for t in tqdm(self.times, desc=f"green kernel {sort}", unit="t", leave=False, disable=not show_progress):
            if t < split:
                self.heat.append(scipy.linalg.expm(-t * squared))
            else:
                self.heat.append(kernel.matrix(float(t)) * space.step)
        self.unit_time = kernel.matrix(1.0) * space.step
        self._tables: dict[tuple[int, int], list[tuple[np.ndarray, np.ndarray]]] = {}
        logger.info("green kernel for sort %d: %d time nodes, %d Volterra terms", sort, time_nodes, n_terms)

    def _spatial_tables(self, derivative: int, moment: int) -> list[tuple[np.ndarray, np.ndarray]]:
        """(∂₁^d P_q ∘ (−Δx₁)^m, ∂₁^d L P_q ∘ (−Δx₁)^m) per time node."""
        key = (derivative, moment)
        if key not in self._tables:
            space = self.grid.space
            lift = space.derivative_matrix(derivative) if derivative else np.eye(space.nx)
            weight = (-space.offsets()) ** moment if moment else 1.0
            self._tables[key] = [((lift @ heat) * weight, (lift @ self.operator @ heat) * weight) for heat in self.heat]
        return self._tables[key]

    def apply(self, values: np.ndarray, derivative: MultiIndex = ZERO, moment: MultiIndex = ZERO) -> np.ndarray:
        """x ↦ ∫ D^a K(x, y) (−(x − y))^m h(y) dy on the grid."""
        spectrum = np.fft.fft(values, axis=0)
        omega = self.grid.frequencies
        result = np.zeros(spectrum.shape, dtype=complex)
        for t, weight, (heat, lifted) in zip(self.times, self.weights, self._spatial_tables(derivative[1], moment[1])):
            time_part = omega_factor(omega, t, derivative[0] + 1, moment[0])
            operator_part = omega_factor(omega, t, derivative[0], moment[0])
            result -= weight * (time_part[:, None] * (spectrum @ heat.T) + operator_part[:, None] * (spectrum @ lifted.T))
        return np.real(np.fft.ifft(result, axis=0))

    def remainder(self, values: np.ndarray) -> np.ndarray:
        """e^{G} f, the smooth part dropped from the inverse."""
        spectrum = np.fft.fft(values, axis=0)
        damped = np.exp(-self.grid.frequencies**2)[:, None] * (spectrum @ self.unit_time.T)
        return np.real(np.fft.ifft(damped, axis=0))

    def convolve(self, field: PolyField, derivative: MultiIndex = ZERO) -> PolyField:
        """D^a K * (Σ_k y^k h_k) = Σ_k Σ_{j≤k} binom(k, j) x^{k−j} apply(h_k, a, j)."""
        result = PolyField(self.grid)
        for k, values in field:
            for j0 in range(k[0] + 1):
                for j1 in range(k[1] + 1):
                    weight = comb(k[0], j0) * comb(k[1], j1)
                    image = self.apply(values, derivative, (j0, j1))
                    result = result + PolyField(self.grid, {(k[0] - j0, k[1] - j1): weight * image})
        return result

    def parabolic_operator(self, values: np.ndarray) -> np.ndarray:
        """(∂₀ − L)u with spectral derivatives."""
        return self.grid.d_time(values) - values @ self.operator.T


def green_kernels(
    spec: EquationSpec,
    grid: SpacetimeGrid,
    n_terms: int = 1,
    modes: int = 64,
    show_progress: bool = False,
) -> dict[int, GreenKernel]:
    """One Green kernel per component of a spec."""
    kernels = {}
    for index, component in enumerate(spec.components, start=1):
        coefficients = OperatorCoefficients.from_expressions(component.a, component.b)
        kernels[index] = GreenKernel(coefficients, grid, n_terms, modes, sort=index, show_progress=show_progress)
    return kernels


def fourier_mode(grid: SpacetimeGrid, frequency_index: int, wavenumber: int) -> np.ndarray:
    """e^{i(ω x₀ + k x₁)} sampled on the grid (complex)."""
    t_mesh, x_mesh = grid.mesh()
    return np.exp(1j * (grid.frequencies[frequency_index] * t_mesh + wavenumber * x_mesh))


def symbol_error(kernel: GreenKernel, modes: Sequence[tuple[int, int]]) -> float:
    """Max relative error of K on Fourier modes against the constant-coefficient symbol."""
    a = float(kernel.coefficients.a_expr)
    b = float(kernel.coefficients.b_expr)
    worst = 0.0
    for frequency_index, wavenumber in modes:
        mode = fourier_mode(kernel.grid, frequency_index, wavenumber)
        image = kernel.apply(mode.real) + 1j * kernel.apply(mode.imag)
        expected = fourier_green_symbol(a, b, kernel.grid.frequencies[frequency_index], wavenumber) * mode
        scale = max(float(np.max(np.abs(expected))), 1e-12)
        worst = max(worst, float(np.max(np.abs(image - expected))) / scale)
    return worst
