"""Parametrix of G = ∂²_{x₀} − L² on ℝ × 𝕋 and its Volterra correction.

Every kernel handled here factors as

    K(t, x, x′) = g_t(x₀ − x₀′) · P(t)(x₁, x₁′),

with g_t the heat kernel of ∂²_{x₀}. The Gaussians form a semigroup, so a
space-time convolution reduces to ∫₀ᵗ P_A(t−s)·h·P_B(s) ds on the torus grid
(h the grid step). Kernels carry a class exponent α: K ∈ S_α behaves like
t^{−7/4+α} at the diagonal.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import sympy
from numpy.polynomial import hermite
from scipy.special import roots_jacobi

from ..models.errors import NumericalFailure, SpecError
from ..models.kernel import TWO_PI, LeadingTerm, TorusGrid, wrap
from .expressions import X1, lambdify, parse_expression

logger = logging.getLogger(__name__)

LINE_IMAGES = 3
QUARTIC_CUTOFF = 37.0  # e^{−ν⁴} < 10⁻¹⁶ beyond ν⁴ = 37
LINE_DECAY = 40.0  # Q_1(z; 1) is below double precision past |z| = 40
TIME_NODES = 8
CACHE_LIMIT = 512
EXTRAPOLATION_SCALES = (0.12, 0.16, 0.2, 0.24)


def _check_time(t: float) -> None:
    if not t > 0:
        raise NumericalFailure(f"kernel time must be positive, got {t}")


def _as_expression(value: str | sympy.Expr) -> sympy.Expr:
    return value if isinstance(value, sympy.Expr) else parse_expression(str(value), ["x1"])


@dataclass(frozen=True, slots=True)
class OperatorCoefficients:
    """a(x₁), b(x₁) of L = a∂²₁ + b∂₁ and the L² expansion coefficients.

    L² = c₄∂⁴ + c₃∂³ + c₂∂² + c₁∂ with c₄ = a², c₃ = 2aa′ + 2ab,
    c₂ = aa″ + 2ab′ + a′b + b², c₁ = ab″ + bb′.

    屬性:
        a_expr: 擴散係數 a(x₁)
        b_expr: 漂移係數 b(x₁)
    """

    a_expr: sympy.Expr  # a(x₁)
    b_expr: sympy.Expr  # b(x₁)

    @classmethod
    def from_expressions(cls, a: str | sympy.Expr = "1", b: str | sympy.Expr = "0") -> OperatorCoefficients:
        return cls(_as_expression(a), _as_expression(b))

    @property
    def is_constant(self) -> bool:
        return X1 not in self.a_expr.free_symbols and X1 not in self.b_expr.free_symbols

    def _sample(self, expression: sympy.Expr, x1: np.ndarray, order: int = 0) -> np.ndarray:
        return lambdify(sympy.diff(expression, X1, order), [X1])(np.asarray(x1, dtype=float))

    def a(self, x1: np.ndarray, order: int = 0) -> np.ndarray:
        return self._sample(self.a_expr, x1, order)

    def b(self, x1: np.ndarray, order: int = 0) -> np.ndarray:
        return self._sample(self.b_expr, x1, order)

    def squared_coefficients(self, x1: np.ndarray) -> dict[int, np.ndarray]:
        """{n: c_n(x₁)} for L² = Σ_n c_n ∂ⁿ."""
        a, da, dda = self.a(x1), self.a(x1, 1), self.a(x1, 2)
        b, db, ddb = self.b(x1), self.b(x1, 1), self.b(x1, 2)
        return {
            4: a * a,
            3: 2 * a * da + 2 * a * b,
            2: a * dda + 2 * a * db + da * b + b * b,
            1: a * ddb + b * db,
        }

    def division_function(self, x1: np.ndarray, x1p: np.ndarray) -> np.ndarray:
        """a̅(x₁, x₁′) = (a(x₁′)² − a(x₁)²)/(x₁′ − x₁), equal to 2aa′ on the diagonal."""
        x1, x1p = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x1p, dtype=float))
        delta = x1p - x1
        diagonal = np.abs(delta) < 1e-12
        safe = np.where(diagonal, 1.0, delta)
        quotient = (self.a(x1p) ** 2 - self.a(x1) ** 2) / safe
        return np.where(diagonal, 2 * self.a(x1) * self.a(x1, 1), quotient)

    def require_elliptic(self, grid: TorusGrid) -> None:
        if float(np.min(self.a(grid.points))) <= 0:
            raise SpecError("diffusion coefficient a must be positive on the torus")

    def operator_matrix(self, grid: TorusGrid) -> np.ndarray:
        """Spectral L_h = diag(a)D² + diag(b)D."""
        return self.a(grid.points)[:, None] * grid.derivative_matrix(2) + self.b(grid.points)[:, None] * grid.derivative_matrix(1)


def gaussian(t: float, y0: np.ndarray, order: int = 0) -> np.ndarray:
    """∂^order of g_t(y) = (4πt)^{−1/2} e^{−y²/(4t)} via Hermite polynomials."""
    _check_time(t)
    y0 = np.asarray(y0, dtype=float)
    scale = 2.0 * np.sqrt(t)
    argument = y0 / scale
    series = np.zeros(order + 1)
    series[order] = 1.0
    base = np.exp(-(argument**2)) / np.sqrt(4.0 * np.pi * t)
    return base * (-1.0 / scale) ** order * hermite.hermval(argument, series)


class QuarticLineKernel:
    """Q_1^{(n)}(z; a) = (1/π)∫₀^∞ Re[(iμ)ⁿ e^{iμz}] e^{−a²μ⁴} dμ on the line.

    Scaling μ = ν/√a gives Q_1^{(n)}(z; a) = a^{−(1+n)/2} q^{(n)}(z/√a) with
    q the a = 1 profile. The ν-integrand is even and Schwartz, so the trapezoid
    rule on [0, 37^{1/4}] with a half weight at ν = 0 is spectrally accurate.
    """

    def __init__(self, modes: int = 64) -> None:
        if modes < 8:
            raise ValueError("at least 8 Fourier quadrature nodes are required")
        self.nodes = np.linspace(0.0, QUARTIC_CUTOFF**0.25, modes)
        weights = np.full(modes, self.nodes[1])
        weights[0] /= 2
        self.weights = weights * np.exp(-(self.nodes**4))

    def unit(self, w: np.ndarray, order: int = 0) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        phase = np.multiply.outer(w, self.nodes)
        trig = {0: np.cos(phase), 1: -np.sin(phase), 2: -np.cos(phase), 3: np.sin(phase)}[order % 4]
        values = (trig * self.nodes**order) @ self.weights / np.pi
        return np.where(np.abs(w) > LINE_DECAY, 0.0, values)

    def __call__(self, z: np.ndarray, a: np.ndarray, order: int = 0) -> np.ndarray:
        z, a = np.broadcast_arrays(np.asarray(z, dtype=float), np.asarray(a, dtype=float))
        root = np.sqrt(a)
        return self.unit(z / root, order) / root ** (1 + order)

    def at_time(self, t: float, y: np.ndarray, a: np.ndarray, order: int = 0) -> np.ndarray:
        """Periodised Q_t^{(n)}(y; a) = t^{−(1+n)/4} Q_1^{(n)}(t^{−1/4}y; a)."""
        _check_time(t)
        scale = t**0.25
        total = np.zeros(np.broadcast(np.asarray(y), np.asarray(a)).shape)
        for image in range(-LINE_IMAGES, LINE_IMAGES + 1):
            total = total + self((np.asarray(y) + TWO_PI * image) / scale, a, order)
        return total / scale ** (1 + order)


def _time_rule(left: float, right: float, nodes: int = TIME_NODES) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and plain weights on [0, 1] absorbing a^{left} near 0 and (1−a)^{right} near 1."""
    x, w = roots_jacobi(nodes, 0.0, left)
    near_zero = (1 + x) / 4
    weights_zero = w * (1 + x) ** (-left) / 4
    x, w = roots_jacobi(nodes, right, 0.0)
    near_one = (3 + x) / 4
    weights_one = w * (1 - x) ** (-right) / 4
    return np.concatenate([near_zero, near_one]), np.concatenate([weights_zero, weights_one])


class ScaledKernel:
    """K(t, x, x′) = g_t(x₀ − x₀′) P(t)(x₁, x₁′) of class S_α.

    Subclasses provide ``_base_matrix(t)``, the density P(t)(x_i, x_j) on the
    torus grid; ∂₁ⁿ on the first argument is applied spectrally unless a
    subclass has a closed form.
    """

    def __init__(self, grid: TorusGrid, alpha: float, label: str) -> None:
        self.grid = grid
        self.alpha = float(alpha)
        self.label = label
        self._cache: dict[tuple[float, int], np.ndarray] = {}

    def _base_matrix(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def _matrix(self, t: float, order: int) -> np.ndarray:
        base = self.matrix(t)
        return self.grid.derivative_matrix(order) @ base if order else base

    def matrix(self, t: float, order: int = 0) -> np.ndarray:
        _check_time(t)
        key = (float(t), order)
        if key not in self._cache:
            value = self._base_matrix(t) if order == 0 else self._matrix(t, order)
            if not np.all(np.isfinite(value)):
                raise NumericalFailure(f"{self.label}: non-finite kernel values at t = {t:.3g}")
            if len(self._cache) >= CACHE_LIMIT:
                self._cache.clear()
            self._cache[key] = value
        return self._cache[key]

    def column_index(self, x1p: float) -> int:
        index = int(round(float(x1p) / self.grid.step)) % self.grid.nx
        if abs(wrap(self.grid.points[index] - x1p)) > 1e-9:
            raise NumericalFailure(f"{self.label}: x1′ = {x1p} is not a grid point")
        return index

    def profile(self, t: float, x1: np.ndarray, x1p: float, order: int = 0) -> np.ndarray:
        """P⁽ⁿ⁾(t)(x₁, x₁′) at arbitrary x₁ by trigonometric interpolation of a grid column."""
        column = self.matrix(t, order)[:, self.column_index(x1p)]
        return self.grid.interpolate(column, np.asarray(x1, dtype=float))

    def line_profile(self, t: float, y: np.ndarray, x1p: float, order: int = 0) -> np.ndarray:
        """P⁽ⁿ⁾(t)(x₁′ + y, x₁′) for y on the line; zero past the torus half-width."""
        y = np.asarray(y, dtype=float)
        inside = np.abs(y) < np.pi
        values = np.zeros_like(y)
        values[inside] = self.profile(t, x1p + y[inside], x1p, order)
        return values

    def line_half_width(self, t: float, x1p: float) -> float:
        """Half-width of the window outside which ``line_profile`` is negligible."""
        return float(np.pi)

    def __call__(self, t: float, x: Sequence[float], xp: Sequence[float], order: tuple[int, int] = (0, 0)) -> float:
        factor = gaussian(t, x[0] - xp[0], order[0])
        return float(factor * self.profile(t, np.array([x[1]]), xp[1], order[1])[0])

    def sup_norm(self, t: float) -> float:
        """sup over x, x′ of |K(t, x, x′)|, attained at x₀ = x₀′."""
        return float(gaussian(t, 0.0) * np.max(np.abs(self.matrix(t))))

    def rescaled(self, t: float, z1: np.ndarray, x1p: float, alpha: float | None = None) -> np.ndarray:
        """z₁ profile of K̃(t, z, x₁′) = t^{7/4−α}K(t, x′ + 𝔰_{t^{1/4}}z, x′); the z₀ factor is g_1(z₀)."""
        alpha = self.alpha if alpha is None else alpha
        return t ** (1.25 - alpha) * self.line_profile(t, t**0.25 * np.asarray(z1, dtype=float), x1p)


class FrozenHeatKernel(ScaledKernel):
    """K₁: heat kernel of G^{x′} = ∂²₀ − a(x₁′)²∂⁴₁, frozen at the source point.

    Grid matrices use the band-limited torus series so that products stay
    exact semigroup steps at short times; off-grid profiles use the line
    kernel with images.
    """

    def __init__(self, coefficients: OperatorCoefficients, grid: TorusGrid, modes: int = 64) -> None:
        super().__init__(grid, 1.0, "K1")
        coefficients.require_elliptic(grid)
        self.coefficients = coefficients
        self.line = QuarticLineKernel(modes)
        self.frozen = coefficients.a(grid.points)

    def _matrix(self, t: float, order: int) -> np.ndarray:
        k = self.grid.wavenumbers
        multiplier = (1j * k) ** order
        if order % 2 == 1:
            multiplier[self.grid.nx // 2] = 0.0
        weights = multiplier[:, None] * np.exp(-t * np.outer(k**4, self.frozen**2))
        table = np.fft.ifft(weights, axis=0) * self.grid.nx / TWO_PI
        rows = (np.arange(self.grid.nx)[:, None] - np.arange(self.grid.nx)[None, :]) % self.grid.nx
        return np.real(table[rows, np.arange(self.grid.nx)[None, :]])

    def _base_matrix(self, t: float) -> np.ndarray:
        return self._matrix(t, 0)

    def profile(self, t: float, x1: np.ndarray, x1p: float, order: int = 0) -> np.ndarray:
        a = self.coefficients.a(np.asarray(x1p, dtype=float))
        return self.line.at_time(t, np.asarray(x1, dtype=float) - x1p, a, order)

    def line_profile(self, t: float, y: np.ndarray, x1p: float, order: int = 0) -> np.ndarray:
        _check_time(t)
        scale = t**0.25
        a = self.coefficients.a(np.asarray(x1p, dtype=float))
        return self.line(np.asarray(y, dtype=float) / scale, a, order) / scale ** (1 + order)

    def line_half_width(self, t: float, x1p: float) -> float:
        a = float(self.coefficients.a(np.asarray(x1p, dtype=float)))
        return max(float(np.pi), LINE_DECAY * np.sqrt(a) * t**0.25)

    def rescaled(self, t: float, z1: np.ndarray, x1p: float, alpha: float | None = None) -> np.ndarray:
        alpha = self.alpha if alpha is None else alpha
        a = self.coefficients.a(np.asarray(x1p, dtype=float))
        return t ** (1.0 - alpha) * self.line(np.asarray(z1, dtype=float), a)


class ErrorKernel(ScaledKernel):
    """E₁ = (∂_t − G)K₁ = (G^{x′} − G)K₁, of class S_{1/4}.

    In x₁: (L² − a(x₁′)²∂⁴)Q = (a(x₁)² − a(x₁′)²)Q⁗ + c₃Q‴ + c₂Q″ + c₁Q′.
    """

    def __init__(self, frozen: FrozenHeatKernel) -> None:
        super().__init__(frozen.grid, 0.25, "E1")
        self.frozen = frozen
        self.coefficients = frozen.coefficients
        points = frozen.grid.points
        self._grid_coefficients = self.coefficients.squared_coefficients(points)
        self._jump = self._grid_coefficients[4][:, None] - (frozen.frozen**2)[None, :]

    def _base_matrix(self, t: float) -> np.ndarray:
        values = self._jump * self.frozen.matrix(t, 4)
        for order in (3, 2, 1):
            values = values + self._grid_coefficients[order][:, None] * self.frozen.matrix(t, order)
        return values

    def _combine(self, x1: np.ndarray, x1p: float, frozen_profile: Callable[[int], np.ndarray]) -> np.ndarray:
        coefficients = self.coefficients.squared_coefficients(x1)
        frozen_square = self.coefficients.a(np.asarray(x1p, dtype=float)) ** 2
        values = (coefficients[4] - frozen_square) * frozen_profile(4)
        for derivative in (3, 2, 1):
            values = values + coefficients[derivative] * frozen_profile(derivative)
        return values

    def profile(self, t: float, x1: np.ndarray, x1p: float, order: int = 0) -> np.ndarray:
        if order:
            return super().profile(t, x1, x1p, order)
        x1 = np.asarray(x1, dtype=float)
        return self._combine(x1, x1p, lambda derivative: self.frozen.profile(t, x1, x1p, derivative))

    def line_profile(self, t: float, y: np.ndarray, x1p: float, order: int = 0) -> np.ndarray:
        if order:
            return super().line_profile(t, y, x1p, order)
        y = np.asarray(y, dtype=float)
        return self._combine(x1p + y, x1p, lambda derivative: self.frozen.line_profile(t, y, x1p, derivative))

    def line_half_width(self, t: float, x1p: float) -> float:
        return self.frozen.line_half_width(t, x1p)


class ConvolvedKernel(ScaledKernel):
    """(A*B)(t) = ∫₀ᵗ P_A(t−s)·h·P_B(s) ds ∈ S_{α_A+α_B}.

    With s = at the integral is split at a = 1/2; Gauss–Jacobi nodes absorb
    the integrable endpoint behaviour a^{α_B−1} and (1−a)^{α_A−1}.
    """

    def __init__(self, left: ScaledKernel, right: ScaledKernel, nodes: int = TIME_NODES) -> None:
        if left.alpha <= 0 or right.alpha <= 0:
            raise NumericalFailure("convolution needs positive class exponents on both factors")
        super().__init__(left.grid, left.alpha + right.alpha, f"({left.label}*{right.label})")
        self.left = left
        self.right = right
        self.nodes, self.weights = _time_rule(min(0.0, right.alpha - 1), min(0.0, left.alpha - 1), nodes)

    def _base_matrix(self, t: float) -> np.ndarray:
        step = self.grid.step
        total = np.zeros((self.grid.nx, self.grid.nx))
        for node, weight in zip(self.nodes, self.weights):
            total += weight * (self.left.matrix(t * (1 - node)) @ self.right.matrix(t * node))
        return t * step * total


class KernelSum(ScaledKernel):
    """Σ c_i K_i, of class min α_i."""

    def __init__(self, terms: Sequence[tuple[float, ScaledKernel]], label: str = "sum") -> None:
        if not terms:
            raise ValueError("kernel sum needs at least one term")
        super().__init__(terms[0][1].grid, min(kernel.alpha for _, kernel in terms), label)
        self.terms = list(terms)

    def _base_matrix(self, t: float) -> np.ndarray:
        return sum(weight * kernel.matrix(t) for weight, kernel in self.terms)

    def _matrix(self, t: float, order: int) -> np.ndarray:
        return sum(weight * kernel.matrix(t, order) for weight, kernel in self.terms)

    def profile(self, t: float, x1: np.ndarray, x1p: float, order: int = 0) -> np.ndarray:
        return sum(weight * kernel.profile(t, x1, x1p, order) for weight, kernel in self.terms)

    def line_profile(self, t: float, y: np.ndarray, x1p: float, order: int = 0) -> np.ndarray:
        return sum(weight * kernel.line_profile(t, y, x1p, order) for weight, kernel in self.terms)

    def line_half_width(self, t: float, x1p: float) -> float:
        return max(kernel.line_half_width(t, x1p) for _, kernel in self.terms)


class ReferenceHeatKernel(ScaledKernel):
    """Exact heat kernel of G for constant a, b: x₁-symbol e^{−t(a²k⁴ − 2iabk³ − b²k²)}."""

    def __init__(self, coefficients: OperatorCoefficients, grid: TorusGrid) -> None:
        if not coefficients.is_constant:
            raise SpecError("the Fourier reference kernel needs constant coefficients")
        super().__init__(grid, 1.0, "reference")
        self.a_value = float(coefficients.a_expr)
        self.b_value = float(coefficients.b_expr)
        if self.a_value <= 0:
            raise SpecError("diffusion coefficient a must be positive")

    def _symbol(self, t: float, k: np.ndarray, order: int) -> np.ndarray:
        a, b = self.a_value, self.b_value
        return (1j * k) ** order * np.exp(-t * (a * a * k**4 - 2j * a * b * k**3 - b * b * k**2))

    def _matrix(self, t: float, order: int) -> np.ndarray:
        symbol = self._symbol(t, self.grid.wavenumbers, order)
        if order % 2 == 1:
            symbol[self.grid.nx // 2] = 0.0
        circulant = np.real(np.fft.ifft(symbol)) * self.grid.nx / TWO_PI
        rows = (np.arange(self.grid.nx)[:, None] - np.arange(self.grid.nx)[None, :]) % self.grid.nx
        return circulant[rows]

    def _base_matrix(self, t: float) -> np.ndarray:
        return self._matrix(t, 0)


def heat_reference(coefficients: OperatorCoefficients, grid: TorusGrid, t: float, x: Sequence[float], xp: Sequence[float]) -> float:
    """Fourier-exact K(t, x, x′) of G for constant coefficients."""
    return ReferenceHeatKernel(coefficients, grid)(t, x, xp)


def spectral_heat_matrix(coefficients: OperatorCoefficients, grid: TorusGrid, t: float) -> np.ndarray:
    """Density of e^{−tL_h²} with L_h the spectral operator; an independent PDE-solver oracle."""
    _check_time(t)
    operator = coefficients.operator_matrix(grid)
    return scipy.linalg.expm(-t * operator @ operator) / grid.step


class Parametrix:
    """K₁, E₁, the convolution powers E₁^{*n} and the Volterra partial sums.

    Powers and partial sums are built once and shared, so nested
    convolutions reuse each other's time-node caches.
    """

    def __init__(self, coefficients: OperatorCoefficients, grid: TorusGrid, modes: int = 64, nodes: int = TIME_NODES) -> None:
        self.coefficients = coefficients
        self.grid = grid
        self.nodes = nodes
        self.k1 = FrozenHeatKernel(coefficients, grid, modes)
        self.e1 = ErrorKernel(self.k1)
        self._powers: dict[int, ScaledKernel] = {1: self.e1}
        self._corrections: dict[int, ScaledKernel] = {}

    def power(self, n: int) -> ScaledKernel:
        """E₁^{*n}."""
        if n < 1:
            raise ValueError("convolution powers start at 1")
        if n not in self._powers:
            self._powers[n] = ConvolvedKernel(self.power(n - 1), self.e1, self.nodes)
        return self._powers[n]

    def correction(self, n: int) -> ScaledKernel:
        """K₁ * E₁^{*n}."""
        if n not in self._corrections:
            self._corrections[n] = ConvolvedKernel(self.k1, self.power(n), self.nodes)
        return self._corrections[n]

    def volterra(self, n_terms: int) -> ScaledKernel:
        """K^{(N)} = K₁ + Σ_{n=1}^{N} (−1)ⁿ K₁*E₁^{*n}."""
        if n_terms < 0:
            raise ValueError("n_terms must be non-negative")
        terms: list[tuple[float, ScaledKernel]] = [(1.0, self.k1)]
        terms.extend(((-1.0) ** n, self.correction(n)) for n in range(1, n_terms + 1))
        logger.debug("Volterra kernel with %d correction terms", n_terms)
        return KernelSum(terms, f"K^({n_terms})")

    def residual(self, n_terms: int) -> ScaledKernel:
        """(∂_t − G)K^{(N)} = (−1)^N E₁^{*(N+1)}."""
        return KernelSum([((-1.0) ** n_terms, self.power(n_terms + 1))], f"residual^({n_terms})")


def convolve(left: ScaledKernel, right: ScaledKernel, nodes: int = TIME_NODES) -> ScaledKernel:
    return ConvolvedKernel(left, right, nodes)


def volterra(parametrix: Parametrix, n_terms: int) -> ScaledKernel:
    return parametrix.volterra(n_terms)


def _z_window(half_width: float, points: int) -> np.ndarray:
    return np.linspace(-half_width, half_width, points)


def leading_term_of(
    kernel: ScaledKernel,
    x1p: float,
    alpha: float | None = None,
    z1: np.ndarray | None = None,
    z0: np.ndarray | None = None,
    scales: Sequence[float] = EXTRAPOLATION_SCALES,
) -> LeadingTerm:
    """Extrapolate K̃(t, z, x₁′) to t = 0 with a quadratic in s = t^{1/4}."""
    alpha = kernel.alpha if alpha is None else alpha
    z1 = _z_window(8.0, 161) if z1 is None else np.asarray(z1, dtype=float)
    z0 = _z_window(8.0, 81) if z0 is None else np.asarray(z0, dtype=float)
    scales = np.asarray(scales, dtype=float)
    samples = np.array([kernel.rescaled(s**4, z1, x1p, alpha) for s in scales])
    fit = np.polyfit(scales, samples, 2)
    profile = fit[-1]
    if not np.all(np.isfinite(profile)):
        raise NumericalFailure(f"{kernel.label}: leading-term extrapolation diverged")
    return LeadingTerm(z0, z1, profile, float(x1p), alpha)


def leading_convolve(first: LeadingTerm, second: LeadingTerm, nodes: int = 16) -> LeadingTerm:
    """Leading term of A*B from those of A ∈ S_α and B ∈ S_β.

    𝖢(z) = ∫₀¹ (1−a)^{−7/4+α} a^{−7/4+β} ∫ 𝖠(𝔰_{(1−a)^{−1/4}}(z−v)) 𝖡(𝔰_{a^{−1/4}}v) dv da.
    The z₀ integral is a Gaussian semigroup step giving √(a(1−a))g₁(z₀); in z₁
    the substitution v′ = a^{−1/4}v is used on [0, 1/2] and its mirror on [1/2, 1].
    """
    alpha, beta = first.alpha, second.alpha
    if alpha <= 0 or beta <= 0:
        raise NumericalFailure("leading-term convolution diverges unless both classes are positive")
    z1 = first.z1
    step_first, step_second = first.z1_step, second.z1_step

    def sample(term: LeadingTerm, points: np.ndarray) -> np.ndarray:
        return np.interp(points, term.z1, term.profile, left=0.0, right=0.0)

    x, w = roots_jacobi(nodes, 0.0, beta - 1.0)
    profile = np.zeros_like(z1)
    for node, weight in zip(x, w):
        a = (1 + node) / 4
        inner = a**0.25 * (sample(first, (1 - a) ** -0.25 * (z1[:, None] - a**0.25 * second.z1[None, :])) @ second.profile) * step_second
        factor = (1 - a) ** (-1.75 + alpha) * a ** (-1.75 + beta) * np.sqrt(a * (1 - a))
        profile += weight * (1 + node) ** (1.0 - beta) / 4 * factor * inner
    x, w = roots_jacobi(nodes, alpha - 1.0, 0.0)
    for node, weight in zip(x, w):
        a = (3 + node) / 4
        inner = (1 - a) ** 0.25 * (sample(second, a**-0.25 * (z1[:, None] - (1 - a) ** 0.25 * first.z1[None, :])) @ first.profile) * step_first
        factor = (1 - a) ** (-1.75 + alpha) * a ** (-1.75 + beta) * np.sqrt(a * (1 - a))
        profile += weight * (1 - node) ** (1.0 - alpha) / 4 * factor * inner
    return LeadingTerm(first.z0, z1, profile, first.x1p, alpha + beta)


def null_leading_residual(coefficients: OperatorCoefficients, x1p: float, modes: int = 64, z0: np.ndarray | None = None, z1: np.ndarray | None = None) -> float:
    """sup |(−3/4 − ¼(2z₀∂_{z₀} + z₁∂_{z₁}) − ∂²_{z₀} + a(x₁′)²∂⁴_{z₁})𝖪₁| on a z-window."""
    z0 = _z_window(6.0, 61) if z0 is None else z0
    z1 = _z_window(6.0, 121) if z1 is None else z1
    line = QuarticLineKernel(modes)
    a = float(coefficients.a(np.asarray(x1p, dtype=float)))
    g = [gaussian(1.0, z0, order) for order in range(3)]
    q = {order: line(z1, a, order) for order in (0, 1, 4)}
    residual = (
        -0.75 * np.outer(g[0], q[0])
        - 0.25 * (2 * np.outer(z0 * g[1], q[0]) + np.outer(g[0], z1 * q[1]))
        - np.outer(g[2], q[0])
        + a * a * np.outer(g[0], q[4])
    )
    return float(np.max(np.abs(residual)))


def initial_value(kernel: ScaledKernel, f: Callable[[np.ndarray], np.ndarray], scales: Sequence[float] = EXTRAPOLATION_SCALES) -> np.ndarray:
    """(Kf)(0, x₁) extrapolated from t = s⁴ > 0, for f depending on x₁ only."""
    values = f(kernel.grid.points)
    scales = np.asarray(scales, dtype=float)
    samples = np.array([kernel.matrix(s**4) @ values * kernel.grid.step for s in scales])
    return np.polyfit(scales, samples, 2)[-1]
