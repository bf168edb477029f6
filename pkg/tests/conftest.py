import numpy as np
import pytest


def dense_diff(k):
    """k x k forward-difference matrix with a zero last row."""
    D = np.zeros((k, k))
    for i in range(k - 1):
        D[i, i] = -1.0
        D[i, i + 1] = 1.0
    return D


def dense_A(m, n):
    """[D_n kron I_m; I_n kron D_m] acting on column-stacked m x n grids."""
    return np.vstack([np.kron(dense_diff(n), np.eye(m)), np.kron(np.eye(n), dense_diff(m))])


def vecF(a):
    return np.asarray(a).reshape(-1, order="F")


def smooth_surface(rng, m, n, terms=6):
    """Random band-limited surface built from a handful of low-frequency cosines."""
    y, x = np.mgrid[0:m, 0:n]
    z = np.zeros((m, n))
    for _ in range(terms):
        kx, ky = rng.uniform(0, 3, size=2)
        phase = rng.uniform(0, 2 * np.pi)
        z += rng.normal() * np.cos(2 * np.pi * (kx * x / n + ky * y / m) + phase)
    return z


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance-suite result lines, printed after the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
