"""End-to-end renormalisation of the linear SHE on a coarse grid."""

from __future__ import annotations

import pytest

from backend.app.models.equation_spec import EquationSpec
from backend.app.models.grid import SpacetimeGrid
from backend.app.services.bphz import bphz_character
from backend.app.services.counterterms import counter_terms, render_latex
from backend.app.services.green import green_kernels
from backend.app.services.noise import sample_ensemble
from backend.app.services.preparation import check_preparation, from_character
from backend.app.services.rules import generate_basis


@pytest.mark.slow
def test_bphz_counter_terms_for_she(she_spec: EquationSpec, cherry) -> None:
    """Spatially averaged BPHZ constants feed a valid preparation map and u1 counter-terms."""
    grid = SpacetimeGrid(8, 16)
    basis = generate_basis(she_spec)
    greens = green_kernels(she_spec, grid, n_terms=0)
    samples = sample_ensemble(grid, she_spec.noise_count, samples=2, seed=7)

    character = bphz_character(basis, grid, samples, greens, max_workers=2, spatial_average=True)
    assert cherry in character.support
    assert set(character.support) <= set(basis.minus())

    prep = from_character(character, basis.assignment, basis.minus())
    assert all(result.passed for result in check_preparation(prep, basis).values())

    terms = counter_terms(she_spec, prep, basis)
    assert terms
    assert {term.component for term in terms} == {1}
    assert "u_{1}" in render_latex(she_spec, terms)
