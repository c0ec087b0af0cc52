"""Tests for the parametrix kernels and the scaling checks."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.special import gamma

from backend.app.models.errors import NumericalFailure, SpecError
from backend.app.models.kernel import TorusGrid
from backend.app.services.kernel_checks import (
    check_class,
    class_slope,
    fit_slope,
    kernel_report,
    mass_defect,
    spectral_agreement,
    verify_scaling_estimate,
    volterra_residual,
)
from backend.app.services.parametrix import (
    OperatorCoefficients,
    Parametrix,
    QuarticLineKernel,
    ReferenceHeatKernel,
    convolve,
    gaussian,
    initial_value,
    leading_convolve,
    leading_term_of,
    null_leading_residual,
)

HEAT = OperatorCoefficients.from_expressions("1", "0")
VARIABLE = OperatorCoefficients.from_expressions("2 + sin(x1)/2", "3*cos(x1)/10")


@pytest.fixture(scope="module")
def variable_parametrix() -> Parametrix:
    """a = 2 + sin(x₁)/2, b = 3cos(x₁)/10 on 256 points with 64 line-kernel nodes."""
    return Parametrix(VARIABLE, TorusGrid(256), modes=64)


def test_squared_coefficients_of_constant_operator() -> None:
    """L = ∂² + b∂ gives L² = ∂⁴ + 2b∂³ + b²∂²."""
    coefficients = OperatorCoefficients.from_expressions("1", "1/2")
    values = coefficients.squared_coefficients(np.array([0.0, 1.0]))
    assert np.allclose(values[4], 1.0)
    assert np.allclose(values[3], 1.0)
    assert np.allclose(values[2], 0.25)
    assert np.allclose(values[1], 0.0)
    assert coefficients.is_constant


def test_division_function_on_diagonal() -> None:
    """ā(x, x) = 2aa′."""
    coefficients = OperatorCoefficients.from_expressions("2 + sin(x1)")
    x = np.array([0.3, 1.1])
    expected = 2 * (2 + np.sin(x)) * np.cos(x)
    assert np.allclose(coefficients.division_function(x, x), expected)
    assert np.allclose(coefficients.division_function(x, x + 1e-6), expected, atol=1e-4)


def test_non_elliptic_coefficients_rejected() -> None:
    with pytest.raises(SpecError, match="positive"):
        OperatorCoefficients.from_expressions("cos(x1)").require_elliptic(TorusGrid(16))


def test_gaussian_is_normalised() -> None:
    y = np.linspace(-5, 5, 2001)
    assert np.sum(gaussian(0.3, y)) * (y[1] - y[0]) == pytest.approx(1.0, abs=1e-6)


def test_gaussian_rejects_non_positive_time() -> None:
    with pytest.raises(NumericalFailure, match="positive"):
        gaussian(0.0, np.zeros(3))


def test_quartic_line_kernel_is_normalised() -> None:
    z = np.linspace(-30, 30, 3001)
    line = QuarticLineKernel(64)
    assert np.sum(line(z, np.ones_like(z))) * (z[1] - z[0]) == pytest.approx(1.0, abs=1e-6)


def test_quartic_line_kernel_at_origin() -> None:
    """q(0) = Γ(5/4)/π and q″(0) = −Γ(3/4)/(4π) from the trapezoid rule."""
    line = QuarticLineKernel(64)
    assert line.unit(np.zeros(1))[0] == pytest.approx(gamma(1.25) / np.pi, rel=1e-12)
    assert line.unit(np.zeros(1), 2)[0] == pytest.approx(-gamma(0.75) / (4 * np.pi), rel=1e-12)


def test_quartic_line_kernel_needs_nodes() -> None:
    with pytest.raises(ValueError, match="8 Fourier"):
        QuarticLineKernel(4)


def test_null_leading_residual_vanishes() -> None:
    """The frozen leading term solves the rescaled heat equation."""
    assert null_leading_residual(HEAT, 0.0) < 1e-6
    variable = OperatorCoefficients.from_expressions("2 + sin(x1)")
    assert null_leading_residual(variable, 1.0) < 1e-6


def test_frozen_kernel_matches_reference_for_constant_coefficients() -> None:
    grid = TorusGrid(32)
    parametrix = Parametrix(HEAT, grid)
    reference = ReferenceHeatKernel(HEAT, grid)
    for t in (0.01, 0.3):
        assert np.allclose(parametrix.volterra(0).matrix(t), reference.matrix(t), atol=1e-10)


def test_reference_needs_constant_coefficients() -> None:
    with pytest.raises(SpecError, match="constant"):
        ReferenceHeatKernel(OperatorCoefficients.from_expressions("2 + sin(x1)"), TorusGrid(16))


def test_frozen_kernel_conserves_mass() -> None:
    parametrix = Parametrix(HEAT, TorusGrid(32))
    assert mass_defect(parametrix.k1, 0.1) < 1e-10


def test_volterra_rejects_negative_terms() -> None:
    with pytest.raises(ValueError, match="non-negative"):
        Parametrix(HEAT, TorusGrid(16)).volterra(-1)


def test_leading_term_of_frozen_kernel_is_line_profile() -> None:
    parametrix = Parametrix(HEAT, TorusGrid(32))
    leading = leading_term_of(parametrix.k1, 0.0)
    assert np.allclose(leading.profile, QuarticLineKernel(64)(leading.z1, 1.0), atol=1e-8)


def test_initial_value_reproduces_data() -> None:
    """(Kf)(0) = f."""
    parametrix = Parametrix(HEAT, TorusGrid(32))
    values = initial_value(parametrix.k1, np.cos)
    assert np.allclose(values, np.cos(parametrix.grid.points), atol=1e-3)


def test_fit_slope_on_exact_power() -> None:
    times = np.geomspace(1e-3, 1e-1, 5)
    fit = fit_slope("power", times, times**0.5, 0.5, 0.05)
    assert fit.slope == pytest.approx(0.5)
    assert fit.passed


def test_fit_slope_rejects_zero_values() -> None:
    with pytest.raises(NumericalFailure, match="non-positive"):
        fit_slope("zero", [1.0, 2.0], [0.0, 1.0], 0.0, 0.1)


def test_frozen_kernel_class_slope() -> None:
    """sup|K₁(t)| ≈ t^{−3/4}."""
    parametrix = Parametrix(HEAT, TorusGrid(64))
    assert class_slope(parametrix.k1).passed


@pytest.mark.slow
def test_volterra_terms_improve_agreement() -> None:
    """Adding correction terms moves K^{(N)} toward the spectral solution."""
    parametrix = Parametrix(OperatorCoefficients.from_expressions("1", "1/2"), TorusGrid(32))
    assert spectral_agreement(parametrix, 2, 0.05) < spectral_agreement(parametrix, 0, 0.05)
    residual = volterra_residual(parametrix, 2, 0.05)
    assert len(residual["norms"]) == 3




def test_leading_term_of_semigroup_convolution() -> None:
    """K₁*K₁ = tK₁ for constant coefficients, so its leading term at class 2 is 𝖪₁ again."""
    parametrix = Parametrix(HEAT, TorusGrid(256))
    leading = leading_term_of(parametrix.k1, 0.0)
    combined = leading_convolve(leading, leading)
    assert combined.alpha == pytest.approx(2.0)
    assert np.allclose(combined.profile, leading.profile, atol=5e-3)
    extrapolated = leading_term_of(convolve(parametrix.k1, parametrix.k1), 0.0)
    assert np.allclose(combined.profile, extrapolated.profile, atol=5e-3)


@pytest.mark.slow
@pytest.mark.parametrize(
    ("n", "c", "expected"),
    [((0, 0), 0, 0.0), ((0, 1), 0, -0.25), ((0, 0), 2, 0.5), ((0, 2), 0, -0.5)],
)
def test_scaling_estimates_of_volterra_kernel(variable_parametrix: Parametrix, n, c, expected) -> None:
    """∫|∂ⁿK^{(1)}| d^c dx ≈ t^{(c − |n|)/4} over t ∈ [10⁻³, 10⁻¹]."""
    fit = verify_scaling_estimate(variable_parametrix.volterra(1), n, c)
    assert fit.expected == pytest.approx(expected)
    assert fit.passed, fit.slope


@pytest.mark.slow
def test_error_kernel_and_first_correction_classes(variable_parametrix: Parametrix) -> None:
    """E₁ ∈ S_{1/4} and K₁*E₁ ∈ S_{5/4}."""
    for kernel, alpha in ((variable_parametrix.e1, 0.25), (variable_parametrix.correction(1), 1.25)):
        slope, decay = check_class(kernel, alpha)
        assert slope.passed, slope.slope
        assert decay.passed, decay.max_error


@pytest.mark.slow
def test_volterra_terms_shrink_by_a_factor(variable_parametrix: Parametrix) -> None:
    """Going from N = 1 to N = 3 cuts both the spectral error and the residual by at least 3."""
    assert spectral_agreement(variable_parametrix, 1, 0.05) >= 3 * spectral_agreement(variable_parametrix, 3, 0.05)
    norms = volterra_residual(variable_parametrix, 3, 0.05)["norms"]
    assert norms[1] >= 3 * norms[3]


@pytest.mark.slow
def test_kernel_report_passes(variable_parametrix: Parametrix) -> None:
    report = kernel_report(variable_parametrix, 1)
    assert report["nTerms"] == 1
    assert len(report["fits"]) == 6
    assert report["passed"] is True
