"""Unit tests for the bounded sample pool."""

from __future__ import annotations

import time

import pytest

from backend.app.services.sample_pool import SamplePool


def test_pool_rejects_zero_workers() -> None:
    with pytest.raises(ValueError):
        SamplePool(max_workers=0)


def test_pool_keeps_input_order() -> None:
    """Results come back in input order even when later items finish first."""
    pool: SamplePool[int, int] = SamplePool(max_workers=3)

    def work(item: int) -> int:
        time.sleep(0.01 * (5 - item))
        return item * item

    assert pool.map(work, range(5)) == [0, 1, 4, 9, 16]
    assert pool.completed == 5
    assert pool.active_workers == 0


def test_single_worker_runs_sequentially() -> None:
    pool: SamplePool[str, str] = SamplePool(max_workers=1)
    assert pool.map(str.upper, ["a", "b"]) == ["A", "B"]
    assert pool.completed == 2


def test_failure_propagates_and_releases_worker() -> None:
    pool: SamplePool[int, int] = SamplePool(max_workers=2)

    def work(item: int) -> int:
        if item == 1:
            raise RuntimeError("sample failed")
        return item

    with pytest.raises(RuntimeError):
        pool.map(work, [0, 1, 2])
    assert pool.active_workers == 0
