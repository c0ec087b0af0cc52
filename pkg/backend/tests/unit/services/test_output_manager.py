"""Unit tests for OutputManager run directories and grid files."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from backend.app.models.errors import SpecError
from backend.app.services.output_manager import HEADER_PREFIX, OutputManager, read_grid


def test_prepare_run_creates_subdirs(output_manager: OutputManager) -> None:
    run_root = output_manager.prepare_run("model-she-16x32-s0")
    assert (run_root / "artifacts").exists()
    assert (run_root / "tmp").exists()
    assert (run_root / "metadata").exists()


def test_artifact_path_returns_resolved_path(output_manager: OutputManager) -> None:
    path = output_manager.artifact_path("run-1", "pi_000.bin")
    assert path.is_absolute()
    assert "artifacts" in str(path)
    assert path.name == "pi_000.bin"


def test_write_metadata_keeps_unicode(output_manager: OutputManager) -> None:
    output_manager.prepare_run("run-1")
    path = output_manager.write_metadata("run-1", "report.json", {"tree": "ζ₁"})
    assert "ζ₁" in path.read_text(encoding="utf-8")
    assert json.loads(path.read_text(encoding="utf-8")) == {"tree": "ζ₁"}


def test_write_csv_uses_kernel_columns(output_manager: OutputManager) -> None:
    output_manager.prepare_run("run-1")
    path = output_manager.write_csv("run-1", "kernel.csv", [(0.1, 0.0, 0.5, 0.0, 0.0, 1.25)])
    with path.open(encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["t", "x0", "x1", "x0p", "x1p", "value"]
    assert float(rows[1][-1]) == 1.25


def test_write_grid_round_trip(output_manager: OutputManager) -> None:
    output_manager.prepare_run("run-1")
    values = np.arange(12, dtype=float).reshape(3, 4) / 7.0
    path = output_manager.write_grid("run-1", "pi_000.bin", values, {"tree": "z1", "nt": 3})
    header, loaded = read_grid(path)
    assert header["tree"] == "z1"
    assert header["shape"] == [3, 4]
    assert header["dtype"] == "float64"
    np.testing.assert_array_equal(loaded, values)


def test_read_grid_rejects_truncated_payload(output_manager: OutputManager) -> None:
    output_manager.prepare_run("run-1")
    path = output_manager.write_grid("run-1", "pi.bin", np.ones((2, 2)), {})
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(SpecError):
        read_grid(path)


def test_read_grid_rejects_short_file(tmp_path: Path) -> None:
    path = tmp_path / "short.bin"
    path.write_bytes(b"\x01")
    with pytest.raises(SpecError):
        read_grid(path)


def test_read_grid_rejects_bad_header(tmp_path: Path) -> None:
    path = tmp_path / "bad.bin"
    path.write_bytes(HEADER_PREFIX.pack(3) + b"{{{")
    with pytest.raises(SpecError):
        read_grid(path)


def test_cleanup_and_latest_run(output_manager: OutputManager) -> None:
    output_manager.prepare_run("a")
    output_manager.prepare_run("b")
    assert [path.name for path in output_manager.list_runs()] == ["a", "b"]
    assert output_manager.latest_run() is not None
    output_manager.cleanup_run("a")
    assert [path.name for path in output_manager.list_runs()] == ["b"]
