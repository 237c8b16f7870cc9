"""Tests for the worker pool helpers and the equilibrium collector.

Tests verify:
- KURA_THREADS parsing with fallbacks and warnings
- ordered_map keeps input order for any worker count
- EquilibriumCollector deduplication up to phase shift
- Concurrent adds from several threads
"""

import logging
import math
import threading

import numpy as np
import pytest

from kuramoto_tori.collector import EquilibriumCollector
from kuramoto_tori.errors import DimensionMismatch
from kuramoto_tori.phasecfg import reduce, splay
from kuramoto_tori.workers import ordered_map, threads_from_env

PI = math.pi


# =============================================================================
# Thread Count
# =============================================================================


def test_threads_from_env_unset(monkeypatch: pytest.MonkeyPatch) -> None:
    """Without the variable the default is used."""
    monkeypatch.delenv("KURA_THREADS", raising=False)
    assert threads_from_env(default=3) == 3
    assert threads_from_env() >= 1


def test_threads_from_env_value(monkeypatch: pytest.MonkeyPatch) -> None:
    """A positive integer is taken as is."""
    monkeypatch.setenv("KURA_THREADS", "6")
    assert threads_from_env(default=2) == 6


@pytest.mark.parametrize("raw", ["many", "0", "-2"])
def test_threads_from_env_invalid(
    raw: str, monkeypatch: pytest.MonkeyPatch, caplog: pytest.LogCaptureFixture
) -> None:
    """Invalid values fall back to the default with a warning."""
    monkeypatch.setenv("KURA_THREADS", raw)
    with caplog.at_level(logging.WARNING):
        assert threads_from_env(default=2) == 2
    assert "KURA_THREADS" in caplog.text


# =============================================================================
# Ordered Map
# =============================================================================


@pytest.mark.parametrize("workers", [1, 4])
def test_ordered_map_keeps_order(workers: int) -> None:
    """Results line up with the inputs."""
    assert ordered_map(lambda x: x * x, range(20), max_workers=workers) == [x * x for x in range(20)]


def test_ordered_map_empty() -> None:
    """No items, no results."""
    assert ordered_map(lambda x: x, [], max_workers=4) == []


# =============================================================================
# Collector
# =============================================================================


def test_collector_dedups_shifted_copies() -> None:
    """A shifted copy of a stored configuration is not new."""
    c = EquilibriumCollector(4)
    assert c.add(splay(4))
    assert not c.add(reduce(splay(4) + 1.2))
    assert c.add(np.zeros(4))
    assert len(c) == 2


def test_collector_snapshot_is_copy() -> None:
    """Mutating the snapshot does not touch the collector."""
    c = EquilibriumCollector(3)
    c.add([0.0, 1.0, 2.0])
    snap = c.snapshot()
    snap[0][1] = 99.0
    assert c.snapshot()[0][1] == pytest.approx(1.0)


def test_collector_keeps_insertion_order() -> None:
    """Representatives come back oldest first."""
    c = EquilibriumCollector(2)
    c.add([0.0, PI])
    c.add([0.0, 0.0])
    snap = c.snapshot()
    assert snap[0] == pytest.approx([0.0, PI])
    assert snap[1] == pytest.approx([0.0, 0.0])


def test_collector_clear() -> None:
    """clear empties the collector."""
    c = EquilibriumCollector(2)
    c.add([0.0, 1.0])
    c.clear()
    assert len(c) == 0
    assert c.snapshot() == []


def test_collector_errors() -> None:
    """Bad sizes and distances are rejected."""
    with pytest.raises(ValueError):
        EquilibriumCollector(0)
    with pytest.raises(ValueError):
        EquilibriumCollector(3, dedup_distance=-1.0)
    with pytest.raises(DimensionMismatch):
        EquilibriumCollector(3).add([0.0, 1.0])


def test_collector_concurrent_adds() -> None:
    """Eight threads adding the same classes store each class once."""
    c = EquilibriumCollector(4, dedup_distance=1e-6)
    classes = [splay(4), np.zeros(4), np.array([0.0, PI, 0.0, PI])]

    def worker(offset: float) -> None:
        for base in classes:
            c.add(reduce(base + offset))

    threads = [threading.Thread(target=worker, args=(0.1 * i,)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(c) == 3
