import numpy as np
import pytest

from causalzf import CoeffSeries


def random_fir(rng, m, n, length, complex_=True):
    c = rng.standard_normal((length, m, n))
    if complex_:
        c = c + 1j * rng.standard_normal((length, m, n))
    return CoeffSeries(c)


def long_division_inverse(h, K):
    """Power-series inverse of a scalar polynomial with ``h[0] != 0``."""
    h = np.asarray(h, dtype=complex)
    g = np.zeros(K, dtype=complex)
    for k in range(K):
        acc = 1.0 if k == 0 else 0.0
        for j in range(1, min(k, len(h) - 1) + 1):
            acc -= h[j] * g[k - j]
        g[k] = acc / h[0]
    return g


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def row_1z():
    return CoeffSeries([[[1.0, 0.0]], [[0.0, 1.0]]])


@pytest.fixture
def row_mixed():
    return CoeffSeries([[[1.0, 0.0]], [[0.3, 0.5]]])


@pytest.fixture
def scalar_half():
    return CoeffSeries([[[1.0]], [[-0.5]]])


@pytest.fixture
def shift():
    return CoeffSeries([[[0.0]], [[1.0]]])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
