"""Tests for environment-driven settings."""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path
from typing import Iterator

import pytest

from backend.app.utils.settings import load_settings, reset_settings_cache


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> Iterator[None]:
    for name in ("RS_MAX_WORKERS", "RS_GRID_NT", "RS_GRID_NX", "RS_SLOPE_TOLERANCE", "RS_SAMPLES", "RS_SEED"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("RS_OUTPUT_DIR", str(tmp_path / "out"))
    reset_settings_cache()
    yield
    reset_settings_cache()


def test_defaults(tmp_path: Path) -> None:
    """Test default values and output directory creation."""
    settings = load_settings()
    assert settings.max_workers == 2
    assert settings.grid_nt == 64
    assert settings.grid_nx == 64
    assert settings.slope_tolerance == Fraction(1, 10)
    assert settings.samples == 1
    assert settings.seed == 0
    assert settings.output_dir == (tmp_path / "out").resolve()
    assert settings.output_dir.is_dir()


def test_settings_are_cached(monkeypatch: pytest.MonkeyPatch) -> None:
    first = load_settings()
    monkeypatch.setenv("RS_SEED", "7")
    assert load_settings() is first
    reset_settings_cache()
    assert load_settings().seed == 7


def test_tolerance_accepts_fraction_text(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("RS_SLOPE_TOLERANCE", "1/20")
    assert load_settings().slope_tolerance == Fraction(1, 20)


@pytest.mark.parametrize(
    ("name", "value"),
    [
        ("RS_GRID_NX", "48"),
        ("RS_GRID_NT", "2"),
        ("RS_MAX_WORKERS", "zero"),
        ("RS_SLOPE_TOLERANCE", "-1/10"),
    ],
)
def test_invalid_values_raise(monkeypatch: pytest.MonkeyPatch, name: str, value: str) -> None:
    monkeypatch.setenv(name, value)
    with pytest.raises(ValueError):
        load_settings()
