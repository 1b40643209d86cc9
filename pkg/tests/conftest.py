import numpy as np
import pytest

from qamp.statevector import StateVector

# Filled by tests/test_acceptance.py; echoed in the terminal summary.
ACCEPTANCE_VERDICTS: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_VERDICTS):
        terminalreporter.write_line(ACCEPTANCE_VERDICTS[k])


M = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def kron_all(gates):
    """Dense tensor product; ``gates[0]`` acts on the least significant qubit."""
    out = np.eye(1)
    for g in gates:
        out = np.kron(g, out)
    return out


def hadamard_matrix(n: int) -> np.ndarray:
    return kron_all([M] * n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_state(dim, seed) -> StateVector:
    return StateVector.random(dim, seed)
