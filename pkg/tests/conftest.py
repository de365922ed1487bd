import numpy as np
import pytest

from gazeqgan import data

_ACCEPTANCE_LINES = []


def record_acceptance(line):
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def kron_all(mats):
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def single_qubit_operator(matrix, qubit, n):
    """Full 2**n operator for ``matrix`` on ``qubit`` (qubit 0 is the MSB)."""
    return kron_all([matrix if q == qubit else np.eye(2) for q in range(n)])


def cx_operator(control, target, n):
    """Permutation matrix of a CNOT, built bit by bit."""
    dim = 2 ** n
    op = np.zeros((dim, dim))
    for j in range(dim):
        bits = [(j >> (n - 1 - q)) & 1 for q in range(n)]
        if bits[control]:
            bits[target] ^= 1
        k = int("".join(map(str, bits)), 2)
        op[k, j] = 1.0
    return op


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def heavytail_scaled():
    return data.minmax_scale(data.synth_heavytail(5000, seed=123)).values
