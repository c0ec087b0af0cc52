"""Tests for logging setup and output formats."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Iterator

import pytest

from backend.app.utils.logging_setup import LOG_FILE, build_formatter, setup_logging


@pytest.fixture(autouse=True)
def restore_root_logger() -> Iterator[None]:
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in list(root.handlers):
        if handler not in handlers:
            root.removeHandler(handler)
            handler.close()
    root.setLevel(level)


def _tagged(root: logging.Logger) -> list[logging.Handler]:
    return [handler for handler in root.handlers if getattr(handler, "_renorm_handler", False)]


def test_setup_logging_writes_log_file(tmp_path: Path) -> None:
    """Test that the rotating file handler writes renorm.log."""
    root = setup_logging(level="DEBUG", log_dir=tmp_path)
    logging.getLogger("backend.test").info("basis generated")
    for handler in _tagged(root):
        handler.flush()
    assert "basis generated" in (tmp_path / LOG_FILE).read_text(encoding="utf-8")
    assert root.level == logging.DEBUG


def test_repeated_setup_replaces_handlers(tmp_path: Path) -> None:
    """Test that a second call does not duplicate output."""
    setup_logging(log_dir=tmp_path)
    root = setup_logging(log_dir=tmp_path)
    assert len(_tagged(root)) == 2


def test_json_format_is_parseable() -> None:
    """Test that the JSON formatter produces one JSON object per record."""
    record = logging.LogRecord("backend.app", logging.WARNING, __file__, 1, "slope %s", ("ok",), None)
    payload = json.loads(build_formatter("json").format(record))
    assert payload["level"] == "WARNING"
    assert payload["message"] == "slope ok"


def test_text_format_is_human_readable() -> None:
    record = logging.LogRecord("backend.app", logging.INFO, __file__, 1, "done", (), None)
    line = build_formatter("text").format(record)
    assert " - backend.app - INFO - done" in line
