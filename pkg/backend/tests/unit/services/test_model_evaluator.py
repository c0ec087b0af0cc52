"""Tests for the grid model (Π^R, g^R)."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from backend.app.models.character import Character
from backend.app.models.errors import HypothesisViolation, SpecError
from backend.app.models.tree import UNIT, DegreeAssignment, EdgeLabel
from backend.app.services import trees
from backend.app.services.model_evaluator import ModelPair, canonical_model, model_bound_report, renormalized_model
from backend.app.services.noise import load_noises
from backend.app.services.preparation import from_character
from backend.app.services.tree_codec import parse_tree

EDGE = EdgeLabel(1)


@pytest.fixture()
def model(heat_greens, she_assignment: DegreeAssignment) -> ModelPair:
    grid = heat_greens[1].grid
    return canonical_model(grid, load_noises("expr:cos(x1) + sin(2*pi*x0)", grid, 1), heat_greens, she_assignment)


def test_noise_is_reproduced(model: ModelPair) -> None:
    """Πζ = ξ for the canonical model."""
    assert np.allclose(model.pi(trees.noise(1)).evaluate(), model.noises[0])


def test_polynomials_and_planted_polynomials(model: ModelPair) -> None:
    _, x_mesh = model.grid.mesh()
    assert np.allclose(model.pi(trees.polynomial((0, 1))).evaluate(), x_mesh)
    assert not model.pi(trees.planted(EDGE, trees.polynomial((0, 1))))


def test_admissibility(model: ModelPair, cherry) -> None:
    """Π(I_aτ) = D^aK * Πτ."""
    assert model.admissibility_error(EDGE, trees.noise(1)) < 1e-12
    assert model.admissibility_error(EdgeLabel(1, (0, 1)), cherry) < 1e-12


def test_product_is_pointwise(model: ModelPair, cherry) -> None:
    """Π̂ is multiplicative: Π(ζ I(ζ)) = ξ · Kξ."""
    expected = model.noises[0] * model.conv(EDGE, trees.noise(1)).evaluate()
    assert np.allclose(model.pi(cherry).evaluate(), expected)


def test_recentred_noise_is_global(model: ModelPair) -> None:
    """Δζ = ζ ⊗ 𝟏, so Π_xζ = Πζ."""
    assert np.allclose(model.recentered(trees.noise(1), (2, 3)), model.noises[0])


def test_recentred_planted_vanishes_at_base_point(model: ModelPair) -> None:
    """Π_x I(ζ) is Kξ minus its value at x."""
    x = (4, 7)
    values = model.recentered(trees.planted(EDGE, trees.noise(1)), x)
    assert abs(values[x]) < 1e-10
    direct = model.recentered_direct(trees.planted(EDGE, trees.noise(1)), x)
    assert np.allclose(values, direct, atol=1e-10)


def test_reexpansion_is_trivial_on_the_diagonal(model: ModelPair) -> None:
    """g_xx is the counit."""
    generator = trees.planted(EDGE, trees.noise(1))
    assert model.g_yx(generator, (3, 5), (3, 5)) == pytest.approx(0.0, abs=1e-10)
    assert model.g_yx(UNIT, (3, 5), (3, 5)) == pytest.approx(1.0)


def test_reexpansion_of_polynomial(model: ModelPair) -> None:
    """ĝ_yx X₁ = X₁ + (x₁ − y₁)𝟏."""
    y, x = (0, 5), (0, 2)
    result = model.reexpansion(trees.polynomial((0, 1)), y, x)
    assert result.coefficient(trees.polynomial((0, 1))) == pytest.approx(1.0)
    assert result.coefficient(UNIT) == pytest.approx(model.grid.x_points[2] - model.grid.x_points[5])


RECURSION_TREES = (
    "z1",
    "X^(0,1) z1",
    "X^(0,2) z1",
    "z1 I[1,(0,0)](z1)",
    "X^(0,1) z1 I[1,(0,0)](z1)",
    "z1 I[1,(0,0)](X^(0,2) z1)",
)


def test_recursive_identity_at_random_points(model: ModelPair) -> None:
    """Holds for any pair of points, including y far from x and polynomial decorations."""
    rng = np.random.default_rng(2024)
    nt, nx = model.grid.shape
    for _ in range(20):
        y = (int(rng.integers(nt)), int(rng.integers(nx)))
        x = (int(rng.integers(nt)), int(rng.integers(nx)))
        text = RECURSION_TREES[int(rng.integers(len(RECURSION_TREES)))]
        residual = model.check_recursive_identity(y, x, EDGE, parse_tree(text))
        assert residual < 1e-4, (text, y, x, residual)


def test_unwrapped_point_is_nearest_image(model: ModelPair) -> None:
    grid = model.grid
    y0, y1 = grid.unwrapped((0, 1), (0, grid.nx - 2))
    assert y0 == pytest.approx(0.0)
    assert y1 == pytest.approx(grid.x_points[1] + 2 * np.pi)


def test_reconstruction_of_noise(model: ModelPair) -> None:
    assert np.allclose(model.reconstruct({trees.noise(1): 1.0}, Fraction(1, 2)), model.noises[0])


def test_reconstruction_needs_positive_regularity(model: ModelPair) -> None:
    with pytest.raises(HypothesisViolation, match="positive regularity"):
        model.reconstruct({trees.noise(1): 1.0}, 0)


def test_noise_count_mismatch(heat_greens, she_assignment: DegreeAssignment) -> None:
    with pytest.raises(SpecError, match="1 noises required"):
        canonical_model(heat_greens[1].grid, [], heat_greens, she_assignment)


def test_missing_green_kernel(model: ModelPair) -> None:
    with pytest.raises(SpecError, match="sort 2"):
        model.conv(EdgeLabel(2), trees.noise(1))


def test_renormalised_noise_is_shifted(heat_greens, she_assignment: DegreeAssignment) -> None:
    """R_ℓζ = ζ + ℓ(ζ)𝟏."""
    grid = heat_greens[1].grid
    noises = load_noises("expr:2 + cos(x1)", grid, 1)
    prep = from_character(Character({trees.noise(1): Fraction(-2)}), she_assignment)
    model = renormalized_model(grid, noises, heat_greens, prep)
    _, x_mesh = grid.mesh()
    assert np.allclose(model.pi(trees.noise(1)).evaluate(), np.cos(x_mesh))


def test_manifest_and_bound_report(model: ModelPair, cherry) -> None:
    rows = model.manifest([trees.noise(1), cherry])
    assert rows[0]["tree"] == "z1"
    assert rows[1]["degree"] == "-6/5"
    results = model_bound_report(model, [trees.noise(1), trees.planted(EDGE, trees.noise(1))], [(4, 8)])
    assert [result.name for result in results] == ["bound " + trees.planted(EDGE, trees.noise(1)).to_text()]
