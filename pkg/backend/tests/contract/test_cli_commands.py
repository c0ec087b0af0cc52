"""Contract tests for CLI commands."""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from backend.app.cli.main import cli


@pytest.fixture()
def cli_runner(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> CliRunner:
    monkeypatch.setenv("RS_LOG_DIR", str(tmp_path / "logs"))
    return CliRunner()


@pytest.mark.parametrize("command", ["validate", "basis", "renormalize", "kernel", "model"])
def test_command_shows_help(cli_runner: CliRunner, command: str) -> None:
    """Every subcommand accepts --help and names the spec option."""
    result = cli_runner.invoke(cli, [command, "--help"])
    assert result.exit_code == 0
    assert "--spec" in result.output


def test_command_requires_spec(cli_runner: CliRunner) -> None:
    result = cli_runner.invoke(cli, ["basis"])
    assert result.exit_code != 0
    assert "missing" in result.output.lower()


def test_validate_accepts_she(cli_runner: CliRunner, she_spec_file: Path) -> None:
    result = cli_runner.invoke(cli, ["--log-level", "ERROR", "validate", "--spec", str(she_spec_file)])
    assert result.exit_code == 0, result.output
    assert "[OK]" in result.output


def test_malformed_spec_exits_with_spec_code(cli_runner: CliRunner, tmp_path: Path) -> None:
    """Spec errors map to exit code 2 with a remediation line."""
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    result = cli_runner.invoke(cli, ["--log-level", "ERROR", "validate", "--spec", str(path)])
    assert result.exit_code == 2
    assert "Remediation" in result.output


def test_missing_spec_file_exits_with_spec_code(cli_runner: CliRunner, tmp_path: Path) -> None:
    result = cli_runner.invoke(cli, ["--log-level", "ERROR", "basis", "--spec", str(tmp_path / "absent.json")])
    assert result.exit_code == 2


def test_basis_json(cli_runner: CliRunner, she_spec_file: Path) -> None:
    result = cli_runner.invoke(cli, ["--log-level", "ERROR", "basis", "--spec", str(she_spec_file)])
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    negative = [row["tree"] for row in payload["trees"] if row["negative"]]
    assert len(negative) == 7
    assert "z1 I[1,(0,0)](z1)" in negative


def test_basis_csv(cli_runner: CliRunner, she_spec_file: Path) -> None:
    result = cli_runner.invoke(cli, ["--log-level", "ERROR", "basis", "--spec", str(she_spec_file), "--format", "csv"])
    assert result.exit_code == 0
    assert result.output.startswith("tree,degree,negative")


def test_renormalize_without_character(cli_runner: CliRunner, she_spec_file: Path, tmp_path: Path) -> None:
    """R = Id produces no counter-terms and writes the run metadata."""
    out = tmp_path / "runs"
    args = ["--log-level", "ERROR", "renormalize", "--spec", str(she_spec_file), "--nt", "8", "--nx", "8", "--out", str(out)]
    result = cli_runner.invoke(cli, args)
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert payload["counterTerms"] == []
    written = list(out.glob("*/metadata/counterterms.json"))
    assert len(written) == 1


def test_renormalize_with_character(cli_runner: CliRunner, she_spec_file: Path, tmp_path: Path) -> None:
    """ℓ(cherry) = 3 yields the counter-term 3·u1."""
    character = tmp_path / "character.json"
    character.write_text(json.dumps({"entries": [{"tree": "z1 I[1,(0,0)](z1)", "value": "3"}]}), encoding="utf-8")
    args = [
        "--log-level", "ERROR", "renormalize", "--spec", str(she_spec_file),
        "--character", str(character), "--nt", "8", "--nx", "8", "--out", str(tmp_path / "runs"),
    ]
    result = cli_runner.invoke(cli, args)
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert len(payload["counterTerms"]) == 1


def test_invalid_grid_is_spec_error(cli_runner: CliRunner, she_spec_file: Path, tmp_path: Path) -> None:
    args = ["--log-level", "ERROR", "renormalize", "--spec", str(she_spec_file), "--nt", "6", "--out", str(tmp_path)]
    result = cli_runner.invoke(cli, args)
    assert result.exit_code == 2


def test_kernel_sort_out_of_range(cli_runner: CliRunner, she_spec_file: Path, tmp_path: Path) -> None:
    """Asking for a component the spec lacks is a hypothesis violation."""
    args = ["--log-level", "ERROR", "kernel", "--spec", str(she_spec_file), "--sort", "2", "--out", str(tmp_path)]
    result = cli_runner.invoke(cli, args)
    assert result.exit_code == 3
