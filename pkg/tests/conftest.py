import numpy as np
import pytest

from tdoa.model import SensorArray, make_rng

_CRITERIA = []


@pytest.fixture
def report_criterion():
    """Record one pass/fail line per acceptance criterion for the terminal summary."""

    def record(name, passed, detail=""):
        _CRITERIA.append((name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _CRITERIA:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


def random_geometry(rng, dim, m, spread=100.0):
    """Generic sensors in a box plus a source well clear of every sensor."""
    ref = rng.uniform(-spread, spread, dim)
    sensors = ref + rng.uniform(-spread, spread, (m, dim))
    while True:
        x = ref + rng.uniform(-0.8 * spread, 0.8 * spread, dim)
        if np.min(np.linalg.norm(sensors - x, axis=1)) > 1.0 and np.linalg.norm(x - ref) > 1.0:
            return SensorArray(ref, sensors), x


@pytest.fixture
def rng():
    return make_rng(20261018)
