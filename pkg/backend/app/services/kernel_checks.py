"""Numerical verification of kernel scaling estimates.

Every check sweeps log-spaced times, fits a log-log slope with
``numpy.polyfit`` and compares it with the exponent the class predicts.
"""

from __future__ import annotations

import logging
import math
from typing import Callable, Sequence

import numpy as np
from tqdm import tqdm

from ..models.errors import NumericalFailure
from ..models.kernel import wrap
from ..models.report import CheckResult, SlopeFit
from ..models.tree import scaled_norm
from .parametrix import Parametrix, ScaledKernel, gaussian, leading_term_of, spectral_heat_matrix

logger = logging.getLogger(__name__)

DEFAULT_TIMES = (1e-3, 1e-1)
SWEEP_POINTS = 7
Z0_WINDOW = 12.0
Z0_POINTS = 241
DECAY_SLOPE = 3.0
DECAY_FLOOR = 1e-14
Z1_RADIUS = 32.0
Z1_POINTS = 1281


def log_times(bounds: tuple[float, float] = DEFAULT_TIMES, count: int = SWEEP_POINTS) -> np.ndarray:
    return np.geomspace(bounds[0], bounds[1], count)


def fit_slope(label: str, scales: Sequence[float], values: Sequence[float], expected: float, tolerance: float) -> SlopeFit:
    """Least-squares slope of log|value| against log scale."""
    scales = np.asarray(scales, dtype=float)
    values = np.abs(np.asarray(values, dtype=float))
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise NumericalFailure(f"{label}: cannot fit a slope through non-positive values")
    slope = float(np.polyfit(np.log(scales), np.log(values), 1)[0])
    fit = SlopeFit(label, slope, float(expected), float(tolerance), tuple(map(float, scales)), tuple(map(float, values)))
    log = logger.info if fit.passed else logger.warning
    log("%s: slope %.3f (expected %.3f ± %.2f)", label, slope, expected, tolerance)
    return fit


def _sweep(times: np.ndarray, evaluate: Callable[[float], float], label: str, show_progress: bool) -> list[float]:
    return [evaluate(float(t)) for t in tqdm(times, desc=label, unit="t", leave=False, disable=not show_progress)]


def scaling_integral(kernel: ScaledKernel, t: float, n: tuple[int, int], c: float, x1p: float) -> float:
    """∫|∂ⁿK(t, x, x′)| d(x, x′)^c dx over ℝ² with x′ = (0, x₁′).

    The x₁ integral runs over the line so that the distance does not saturate
    at the torus half-width once the kernel spreads beyond it.
    """
    z0 = np.linspace(-Z0_WINDOW, Z0_WINDOW, Z0_POINTS)
    y0 = np.sqrt(t) * z0
    half_width = kernel.line_half_width(t, x1p)
    y1 = np.linspace(-half_width, half_width, 2 * math.ceil(half_width / kernel.grid.step) + 1)
    time_factor = gaussian(t, y0, n[0])
    space_factor = kernel.line_profile(t, y1, x1p, n[1])
    distance = np.sqrt(np.abs(y0))[:, None] + np.abs(y1)[None, :]
    integrand = np.abs(np.outer(time_factor, space_factor)) * distance**c
    return float(np.sum(integrand) * (y0[1] - y0[0]) * (y1[1] - y1[0]))


def verify_scaling_estimate(
    kernel: ScaledKernel,
    n: tuple[int, int],
    c: float,
    tolerance: float = 0.1,
    x1p: float = 0.0,
    times: np.ndarray | None = None,
    show_progress: bool = False,
) -> SlopeFit:
    """∫|∂ⁿK| d^c dx ≲ t^{(c − |n|_s)/4} for K ∈ S₁."""
    times = log_times() if times is None else np.asarray(times, dtype=float)
    label = f"{kernel.label} n={n} c={c}"
    values = _sweep(times, lambda t: scaling_integral(kernel, t, n, c, x1p), label, show_progress)
    return fit_slope(label, times, values, (c - scaled_norm(n)) / 4, tolerance)


def class_slope(
    kernel: ScaledKernel,
    alpha: float | None = None,
    tolerance: float = 0.1,
    times: np.ndarray | None = None,
    show_progress: bool = False,
) -> SlopeFit:
    """sup|K(t)| ≈ t^{−7/4+α}."""
    alpha = kernel.alpha if alpha is None else alpha
    times = log_times() if times is None else np.asarray(times, dtype=float)
    label = f"{kernel.label} sup-norm"
    values = _sweep(times, kernel.sup_norm, label, show_progress)
    return fit_slope(label, times, values, -1.75 + alpha, tolerance)


def z_decay(kernel: ScaledKernel, alpha: float, t: float, x1p: float = 0.0, radius: float = Z1_RADIUS) -> CheckResult:
    """K̃(t, ·, x′) is negligible beyond |z₁| = radius compared with its peak.

    The quartic profile only decays like e^{−c|z₁|^{4/3}}, hence the wide window.
    """
    z1 = np.linspace(-2 * radius, 2 * radius, Z1_POINTS)
    values = np.abs(kernel.rescaled(t, z1, x1p, alpha))
    peak = float(np.max(values))
    tail = float(np.max(values[np.abs(z1) >= radius]))
    ratio = tail / peak if peak > 0 else 0.0
    return CheckResult(f"{kernel.label} z-decay", ratio < 1e-3, ratio)


def check_class(
    kernel: ScaledKernel,
    alpha: float,
    tolerance: float = 0.1,
    times: np.ndarray | None = None,
    x1p: float = 0.0,
    show_progress: bool = False,
) -> tuple[SlopeFit, CheckResult]:
    """Small-t exponent within tolerance of −7/4 + α and rapid z-decay of K̃ at the middle time."""
    times = log_times() if times is None else np.asarray(times, dtype=float)
    slope = class_slope(kernel, alpha, tolerance, times, show_progress)
    decay = z_decay(kernel, alpha, float(times[len(times) // 2]), x1p)
    return slope, decay


def off_diagonal_decay(
    kernel: ScaledKernel,
    separations: Sequence[float] = (0.5, 1.0, 1.5),
    times: np.ndarray | None = None,
    x1p: float = 0.0,
) -> list[CheckResult]:
    """sup over d(x, x′) ≥ δ of |K(t, x, x′)| vanishes faster than any power of t.

    Passes when the log-log slope over the smallest times exceeds a large
    threshold or the values already sit below rounding.
    """
    times = log_times((5e-3, 5e-2), 5) if times is None else np.asarray(times, dtype=float)
    offsets = np.abs(wrap(kernel.grid.points - x1p))
    results = []
    for separation in separations:
        values = []
        for t in times:
            column = np.abs(kernel.profile(float(t), kernel.grid.points, x1p))
            spatial = float(np.max(column[offsets >= separation], initial=0.0)) * float(gaussian(float(t), 0.0))
            y0 = separation**2
            temporal = float(np.abs(gaussian(float(t), y0))) * float(np.max(column))
            values.append(max(spatial, temporal))
        values_array = np.asarray(values)
        if np.max(values_array) < DECAY_FLOOR:
            results.append(CheckResult(f"decay δ={separation}", True, float(np.max(values_array))))
            continue
        clipped = np.maximum(values_array, DECAY_FLOOR)
        slope = float(np.polyfit(np.log(times[:3]), np.log(clipped[:3]), 1)[0])
        results.append(CheckResult(f"decay δ={separation}", slope >= DECAY_SLOPE, slope))
    return results


def mass_defect(kernel: ScaledKernel, t: float) -> float:
    """max over x′ of |∫K(t, x, x′)dx − 1|."""
    return float(np.max(np.abs(kernel.matrix(t).sum(axis=0) * kernel.grid.step - 1.0)))


def volterra_residual(parametrix: Parametrix, n_terms: int, t: float) -> dict[str, object]:
    """Sup-norms of (∂_t − G)K^{(N)} = ±E₁^{*(N+1)} for N = 0..n_terms and the factorial fit.

    The fit matches r_N ≈ A (Ct)^N / N! by regressing log(r_N N!) on N.
    """
    norms = [parametrix.power(n + 1).sup_norm(t) for n in range(n_terms + 1)]
    fitted = None
    if n_terms >= 1 and all(value > 0 for value in norms):
        orders = np.arange(n_terms + 1)
        scaled = np.log(np.asarray(norms)) + np.array([math.lgamma(n + 1) for n in orders])
        fitted = float(np.exp(np.polyfit(orders, scaled, 1)[0]) / t)
    logger.info("Volterra residual norms at t=%.3g: %s", t, ", ".join(f"{value:.3e}" for value in norms))
    return {"t": t, "norms": norms, "constant": fitted}


def spectral_agreement(parametrix: Parametrix, n_terms: int, t: float) -> float:
    """Relative sup-error of K^{(N)} against the spectral solution e^{−tL_h²}."""
    reference = spectral_heat_matrix(parametrix.coefficients, parametrix.grid, t)
    approximation = parametrix.volterra(n_terms).matrix(t)
    return float(np.max(np.abs(approximation - reference)) / np.max(np.abs(reference)))


def kernel_report(
    parametrix: Parametrix,
    n_terms: int,
    tolerance: float = 0.1,
    times: np.ndarray | None = None,
    show_progress: bool = False,
) -> dict[str, object]:
    """Every slope fit and identity check of a kernel run."""
    times = log_times() if times is None else np.asarray(times, dtype=float)
    kernel = parametrix.volterra(n_terms)
    fits: list[SlopeFit] = []
    for n, c in (((0, 0), 0), ((0, 1), 0), ((0, 0), 2), ((0, 2), 0)):
        fits.append(verify_scaling_estimate(kernel, n, c, tolerance, times=times, show_progress=show_progress))
    checks: list[CheckResult] = []
    for member in (parametrix.e1, parametrix.correction(1)):
        slope, decay = check_class(member, member.alpha, tolerance, times, show_progress=show_progress)
        fits.append(slope)
        checks.append(decay)
    null_ratio = leading_term_of(parametrix.e1, 0.0, alpha=0.0).sup() / leading_term_of(parametrix.k1, 0.0).sup()
    checks.append(CheckResult("E1 null leading term at class 0", null_ratio < 0.05, null_ratio))
    checks.extend(off_diagonal_decay(kernel))
    return {
        "nTerms": n_terms,
        "fits": [fit.as_dict() for fit in fits],
        "checks": [check.as_dict() for check in checks],
        "volterra": volterra_residual(parametrix, n_terms, 0.05),
        "passed": all(fit.passed for fit in fits) and all(check.passed for check in checks),
    }
