import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from fnets.panel import TimeSeriesPanel

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_panel(values: np.ndarray, center: bool = False) -> TimeSeriesPanel:
    values = np.asarray(values, dtype=float)
    if center:
        mean = values.mean(axis=1)
        return TimeSeriesPanel(values - mean[:, None], mean)
    return TimeSeriesPanel(values, np.zeros(values.shape[0]))
