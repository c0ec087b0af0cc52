"""Shared pytest fixtures for backend tests."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import pytest

from backend.app.models.equation_spec import EquationSpec
from backend.app.models.grid import SpacetimeGrid
from backend.app.models.tree import DegreeAssignment
from backend.app.services.output_manager import OutputManager
from backend.app.services.tree_codec import parse_tree

SHE_PAYLOAD = {
    "name": "she",
    "components": [{"a": "1", "b": "0", "f": {1: "u1"}}],
    "noises": [{"alpha": "-3/2"}],
    "cutoff": "3/2",
    "kappa": "1/10",
}

GKPZ_PAYLOAD = {
    "name": "gkpz",
    "components": [{"a": "1", "b": "0", "f": {1: "1"}, "g": "u1_x^2"}],
    "noises": [{"alpha": "-3/2"}],
    "cutoff": "1/2",
    "kappa": "1/10",
    "max_fan_in": 2,
}


@pytest.fixture()
def temp_output_dir(tmp_path: Path) -> Path:
    path = tmp_path / "output"
    path.mkdir()
    return path


@pytest.fixture()
def output_manager(temp_output_dir: Path) -> OutputManager:
    return OutputManager(temp_output_dir)


@pytest.fixture()
def she_spec() -> EquationSpec:
    return EquationSpec.from_payload(SHE_PAYLOAD)


@pytest.fixture()
def gkpz_spec() -> EquationSpec:
    return EquationSpec.from_payload(GKPZ_PAYLOAD)


@pytest.fixture()
def she_assignment(she_spec: EquationSpec) -> DegreeAssignment:
    """α = −3/2 − 1/10 = −8/5."""
    return she_spec.degree_assignment()


@pytest.fixture()
def rough_assignment() -> DegreeAssignment:
    return DegreeAssignment((Fraction(-8, 5),))


@pytest.fixture()
def she_spec_file(tmp_path: Path) -> Path:
    path = tmp_path / "she.json"
    path.write_text(json.dumps(SHE_PAYLOAD), encoding="utf-8")
    return path


@pytest.fixture()
def small_grid() -> SpacetimeGrid:
    return SpacetimeGrid(16, 32)


@pytest.fixture()
def cherry():
    """I(ζ)ζ, the first divergent tree of the linear SHE."""
    return parse_tree("z1 I[1,(0,0)](z1)")


@pytest.fixture(scope="session")
def heat_greens():
    """Green kernel of ∂₀ − ∂₁² on the 16 × 32 grid, frozen kernel only."""
    from backend.app.services.green import GreenKernel
    from backend.app.services.parametrix import OperatorCoefficients

    return {1: GreenKernel(OperatorCoefficients.from_expressions("1", "0"), SpacetimeGrid(16, 32), n_terms=0)}


@pytest.fixture(scope="session")
def she_basis():
    from backend.app.services.rules import generate_basis

    return generate_basis(EquationSpec.from_payload(SHE_PAYLOAD))


@pytest.fixture(scope="session")
def gkpz_basis():
    from backend.app.services.rules import generate_basis

    return generate_basis(EquationSpec.from_payload(GKPZ_PAYLOAD))
