"""Shared fixtures for the mazerlab test suite."""
import numpy as np
import pytest

from mazerlab import MesaMode, make_params

ACCEPTANCE_LINES = []


@pytest.fixture
def resonant():
    """Zero-detuning parameter set on a unit-length cavity."""
    return make_params(lam=1.0, delta=0.0, omega=0.0, cavity_length=1.0)


@pytest.fixture
def detuned():
    """A representative off-resonant parameter set."""
    return make_params(lam=1.0, delta=1.0, omega=0.0, cavity_length=2.0)


@pytest.fixture
def mesa():
    def _make(params):
        return MesaMode(params.cavity_length)
    return _make


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)


@pytest.fixture
def acceptance_log():
    """Collector for the one-line-per-criterion acceptance verdicts."""
    def _record(line: str):
        ACCEPTANCE_LINES.append(line)
        print(line)
    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
