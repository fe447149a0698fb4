from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from telegraph_stopping.model import REFERENCE_PARAMS, Regime  # noqa: E402
from telegraph_stopping.thresholds import solve  # noqa: E402

# lines collected by tests/test_acceptance.py and echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


REGIMES = [Regime.T10, Regime.T13, Regime.T14, Regime.T16]


@pytest.fixture(params=REGIMES, ids=lambda r: r.value)
def regime(request) -> Regime:
    return request.param


@pytest.fixture
def params(regime):
    return REFERENCE_PARAMS[regime]


@pytest.fixture
def sol(params):
    return solve(params)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
