"""Tests for the BPHZ character extraction."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from backend.app.models.basis import Basis
from backend.app.models.tree import DegreeAssignment
from backend.app.services import trees
from backend.app.services.bphz import bphz_character, empirical_mean, extraction_order, renormalised_means
from backend.app.services.noise import load_noises


@pytest.fixture()
def small_basis(she_assignment: DegreeAssignment, cherry) -> Basis:
    return Basis((trees.noise(1), cherry), she_assignment, Fraction(0))


def test_extraction_order_by_noise_count(small_basis: Basis, cherry) -> None:
    assert extraction_order(small_basis) == [trees.noise(1), cherry]


def test_empirical_mean() -> None:
    assert np.allclose(empirical_mean([np.ones(3), 3 * np.ones(3)]), 2.0)


def test_single_sample_cancels_noise(small_basis: Basis, heat_greens) -> None:
    """With one realisation ℓ(ζ) = −ξ, after which Πζ and the cherry vanish."""
    grid = heat_greens[1].grid
    sample = load_noises("expr:2 + cos(x1)", grid, 1)
    character = bphz_character(small_basis, grid, [sample], heat_greens)
    assert character.support == (trees.noise(1),)
    assert np.allclose(character(trees.noise(1)), -sample[0].values)
    means = renormalised_means(character, small_basis, grid, [sample], heat_greens)
    assert all(value < 1e-10 for value in means.values())


def test_spatial_average_gives_constant(small_basis: Basis, heat_greens) -> None:
    grid = heat_greens[1].grid
    sample = load_noises("expr:2 + cos(x1)", grid, 1)
    character = bphz_character(small_basis, grid, [sample], heat_greens, spatial_average=True)
    assert character(trees.noise(1)) == pytest.approx(-2.0)


def test_zero_noise_gives_empty_character(small_basis: Basis, heat_greens) -> None:
    grid = heat_greens[1].grid
    character = bphz_character(small_basis, grid, [load_noises("expr:0", grid, 1)], heat_greens)
    assert character.values == {}


def test_two_workers_match_one(small_basis: Basis, heat_greens) -> None:
    grid = heat_greens[1].grid
    samples = [load_noises("random", grid, 1, seed) for seed in (1, 2)]
    serial = bphz_character(small_basis, grid, samples, heat_greens, max_workers=1)
    parallel = bphz_character(small_basis, grid, samples, heat_greens, max_workers=2)
    for tree in serial.support:
        assert np.allclose(serial(tree), parallel(tree))


def test_empty_samples_rejected(small_basis: Basis, heat_greens) -> None:
    with pytest.raises(ValueError, match="at least one"):
        bphz_character(small_basis, heat_greens[1].grid, [], heat_greens)
