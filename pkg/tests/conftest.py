import numpy as np
import pytest

from cmvlab.laurent import prepared_from_zeros


@pytest.fixture
def L_simple():
    # z - 5/2 + 1/z
    return prepared_from_zeros(1, [(2, 1), (0.5, 1)])


@pytest.fixture
def L_double():
    # z - 4 + 4/z
    return prepared_from_zeros(1, [(2, 2)])


@pytest.fixture
def L_complex():
    return prepared_from_zeros(1, [(3j, 1), (-3j, 1), (1 + 1j, 1), (1 - 1j, 1)])


@pytest.fixture
def rng():
    return np.random.default_rng(11)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
