"""Tests for validated CLI run options."""

from __future__ import annotations

from pathlib import Path

import pytest
from pydantic import ValidationError

from backend.app.models.errors import SpecError
from backend.app.models.run_config import RunConfig


def test_defaults_and_run_id(she_spec_file: Path) -> None:
    config = RunConfig.build(command="model", spec_path=she_spec_file)
    assert config.nt == 64
    assert config.noise == "random"
    assert config.run_id == "model-she-64x64-s0"


@pytest.mark.parametrize("nx", [3, 6, 48])
def test_resolution_must_be_power_of_two(she_spec_file: Path, nx: int) -> None:
    with pytest.raises(SpecError, match="power of two"):
        RunConfig.build(command="model", spec_path=she_spec_file, nx=nx)


def test_missing_spec_file(tmp_path: Path) -> None:
    with pytest.raises(SpecError, match="file not found"):
        RunConfig.build(command="basis", spec_path=tmp_path / "absent.json")


def test_unknown_option_rejected(she_spec_file: Path) -> None:
    with pytest.raises(SpecError, match="invalid run options"):
        RunConfig.build(command="basis", spec_path=she_spec_file, colour="red")


def test_negative_terms_rejected(she_spec_file: Path) -> None:
    with pytest.raises(SpecError):
        RunConfig.build(command="kernel", spec_path=she_spec_file, n_terms=-1)


def test_config_is_frozen(she_spec_file: Path) -> None:
    config = RunConfig.build(command="basis", spec_path=she_spec_file)
    with pytest.raises(ValidationError):
        config.seed = 3
