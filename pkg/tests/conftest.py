import itertools
from math import prod

import numpy as np
import pytest

ACCEPTANCE_LINES = []


def random_psd(rng, n, d):
    B = rng.standard_normal((d, n))
    return B.T @ B, B


def brute_esp(x, k):
    """e_k by subset enumeration."""
    return float(sum(prod(s) for s in itertools.combinations(list(x), k)))


def brute_msd(M, j):
    """Max det over size-j principal submatrices, via numpy's LU determinant."""
    n = M.shape[0]
    best = 0.0
    for S in itertools.combinations(range(n), j):
        best = max(best, np.linalg.det(M[np.ix_(S, S)]))
    return best


def rel_close(a, b, tol):
    return abs(a - b) <= tol * max(abs(a), abs(b), 1e-300)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
