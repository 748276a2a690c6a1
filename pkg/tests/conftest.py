import math

import numpy as np
import pytest

from listcap.core import Channel, DensityMatrix, ProbDist

# (criterion id, passed, detail) rows collected by test_acceptance.py
ACCEPTANCE = []


def record(criterion, passed, detail=""):
    ACCEPTANCE.append((criterion, bool(passed), detail))
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(ACCEPTANCE, key=lambda r: (int(r[0].split()[0][2:]), r[0])):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {criterion}  {detail}")


def h2(q):
    """Binary entropy in nats."""
    return -q * math.log(q) - (1 - q) * math.log(1 - q)


def bsc(eps):
    return Channel.classical_from([[1 - eps, eps], [eps, 1 - eps]])


def ket(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


ZERO = ket([1, 0])
ONE = ket([0, 1])
PLUS = ket([1, 1]) / 2


def random_classical_channel(rng, max_in=8, max_out=8):
    a = int(rng.integers(2, max_in + 1))
    b = int(rng.integers(2, max_out + 1))
    m = rng.dirichlet(np.ones(b), size=a)
    m /= m.sum(axis=1, keepdims=True)
    return Channel.classical_from(m)


def random_density(rng, d, rank=None):
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_cq_channel(rng, max_in=4, max_d=4):
    k = int(rng.integers(2, max_in + 1))
    d = int(rng.integers(2, max_d + 1))
    return Channel.cq_from([random_density(rng, d, int(rng.integers(1, d + 1))) for _ in range(k)])


@pytest.fixture
def bsc01():
    return bsc(0.1)


@pytest.fixture
def uniform2():
    return ProbDist([0.5, 0.5])


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


@pytest.fixture
def half_mixed():
    return DensityMatrix(np.eye(2) / 2)
