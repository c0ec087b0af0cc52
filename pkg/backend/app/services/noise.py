"""Smooth noise realisations on a space-time grid."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from ..models.errors import SpecError
from ..models.grid import GridFunction, SpacetimeGrid
from .expressions import X0, X1, parse_expression, sample_on_grid

logger = logging.getLogger(__name__)

RANDOM_SOURCE = "random"
FILE_PREFIX = "file:"
EXPRESSION_PREFIX = "expr:"


def noise_from_expression(text: str, grid: SpacetimeGrid, label: str = "xi") -> GridFunction:
    """Closed-form ξ(x₀, x₁)."""
    expression = parse_expression(text, [X0.name, X1.name])
    values = sample_on_grid(expression, grid.t_points, grid.x_points)
    return GridFunction(grid, values, label)


def noise_from_file(path: Path | str, grid: SpacetimeGrid, label: str = "xi") -> GridFunction:
    """A ``.npy`` array of shape (nt, nx)."""
    path = Path(path)
    if not path.is_file():
        raise SpecError(f"noise file not found: {path}")
    try:
        values = np.load(path, allow_pickle=False)
    except ValueError as exc:
        raise SpecError(f"cannot read noise file {path}: {exc}") from exc
    if values.shape != grid.shape:
        raise SpecError(f"noise file {path} has shape {values.shape}, expected {grid.shape}")
    return GridFunction(grid, np.asarray(values, dtype=float), label)


def random_smooth_field(
    grid: SpacetimeGrid,
    seed: int,
    modes: int = 4,
    amplitude: float = 1.0,
    label: str = "xi",
) -> GridFunction:
    """Σ_{|k₀|,|k₁| ≤ modes} (a_k cos + b_k sin)(ω_{k₀}x₀ + k₁x₁) / (1 + k₀² + k₁²) with Gaussian a_k, b_k."""
    rng = np.random.default_rng(seed)
    t_mesh, x_mesh = grid.mesh()
    base = 2.0 * np.pi / grid.horizon
    values = np.zeros(grid.shape)
    for k0 in range(-modes, modes + 1):
        for k1 in range(0, modes + 1):
            if k1 == 0 and k0 <= 0:
                continue
            phase = base * k0 * t_mesh + k1 * x_mesh
            cosine, sine = rng.standard_normal(2)
            values += (cosine * np.cos(phase) + sine * np.sin(phase)) / (1.0 + k0 * k0 + k1 * k1)
    return GridFunction(grid, amplitude * values, label)


def load_noises(source: str, grid: SpacetimeGrid, count: int, seed: int = 0) -> list[GridFunction]:
    """ξ_1..ξ_count from ``random``, ``file:a.npy;b.npy`` or ``expr:cos(x1);sin(x0)``.

    A bare string is read as an expression list.
    """
    if count == 0:
        return []
    if source == RANDOM_SOURCE:
        noises = [random_smooth_field(grid, seed + index, label=f"xi_{index + 1}") for index in range(count)]
    else:
        if source.startswith(FILE_PREFIX):
            entries = source[len(FILE_PREFIX):].split(";")
            loader = noise_from_file
        else:
            entries = source[len(EXPRESSION_PREFIX):].split(";") if source.startswith(EXPRESSION_PREFIX) else source.split(";")
            loader = noise_from_expression
        entries = [entry.strip() for entry in entries if entry.strip()]
        if len(entries) != count:
            raise SpecError(f"noise source lists {len(entries)} noises, the spec declares {count}")
        noises = [loader(entry, grid, f"xi_{index + 1}") for index, entry in enumerate(entries)]
    logger.info("loaded %d noise realisations from %s", len(noises), source)
    return noises


def sample_ensemble(grid: SpacetimeGrid, count: int, samples: int, seed: int = 0) -> list[list[GridFunction]]:
    """Independent seeded realisations for Monte-Carlo expectations."""
    return [load_noises(RANDOM_SOURCE, grid, count, seed + 1000 * sample) for sample in range(samples)]
