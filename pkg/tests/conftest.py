import numpy as np
import pytest

from gsdecay import potentials as P
from gsdecay.spectral import GridSpec, solve_ground_state


@pytest.fixture(scope="session")
def harmonic_gs():
    return solve_ground_state(GridSpec(1, 10.0, 2000), P.power(1.0, 1))


@pytest.fixture(scope="session")
def quartic_gs():
    return solve_ground_state(GridSpec(1, 8.0, 4000), P.power(2.0, 1))


@pytest.fixture(scope="session")
def log_gs():
    return solve_ground_state(GridSpec(1, 30.0, 4000), P.log_potential(1))


def harmonic_exact(x):
    return np.pi ** -0.25 * np.exp(-np.square(x) / 2)


ACCEPTANCE_LINES = {}


def record_acceptance(number, passed, detail):
    line = f"acceptance {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
