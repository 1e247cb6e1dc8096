import numpy as np
import pytest

from hse_sim import su2

_acceptance = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_spinor(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def random_density(rng):
    """Random mixed qubit state: Bloch vector uniform in direction, radius in [0, 1]."""
    psi = random_spinor(rng)
    r = su2.spinor_to_bloch(psi) * rng.random()
    return su2.bloch_to_density(r)


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
