import itertools
from math import log

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from detmax.errors import DimensionMismatch, NotPsd, OutOfRange
from detmax.linalg import (
    Spectrum,
    cholesky_psd,
    eigen_sym,
    elementary_symmetric,
    log_elementary_symmetric,
    logdet_submatrix,
    projector_complement,
)

from conftest import brute_esp, rel_close

seeds = st.integers(0, 2**32 - 1)


def test_cholesky_identity():
    V = cholesky_psd(np.eye(2))
    assert V.shape == (2, 2)
    np.testing.assert_array_equal(V.T @ V, np.eye(2))


def test_cholesky_diagonal():
    V = cholesky_psd(np.diag([4.0, 9.0]))
    norms = np.sum(V**2, axis=0)
    np.testing.assert_allclose(norms, [4, 9])
    assert abs(V[:, 0] @ V[:, 1]) < 1e-15


def test_cholesky_rank_one():
    M = np.array([[1.0, 1.0], [1.0, 1.0]])
    V = cholesky_psd(M)
    assert V.shape == (1, 2)
    np.testing.assert_allclose(np.abs(V), [[1.0, 1.0]])
    np.testing.assert_allclose(V.T @ V, M)


def test_cholesky_rejects_indefinite_and_nonsquare():
    with pytest.raises(NotPsd):
        cholesky_psd(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(NotPsd):
        cholesky_psd(np.diag([1.0, -1.0]))
    with pytest.raises(DimensionMismatch):
        cholesky_psd(np.ones((2, 3)))


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(1, 8), st.integers(1, 8))
def test_cholesky_gram_roundtrip(seed, n, d):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((d, n))
    M = B.T @ B
    V = cholesky_psd(M)
    assert V.shape[0] == min(n, d)
    assert np.max(np.abs(V.T @ V - M)) <= 1e-9 * (1 + np.max(np.abs(M)))


def test_eigen_sym_examples():
    s, _ = eigen_sym(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(s.values, [3, 2, 1])
    s, _ = eigen_sym(np.zeros((3, 3)))
    assert s.rank() == 0 and np.all(s.values == 0)
    s, _ = eigen_sym(np.array([[2.0, 1.0], [1.0, 2.0]]))
    np.testing.assert_allclose(s.values, [3, 1])


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 7))
def test_eigen_sym_reconstruction(seed, n):
    A = np.random.default_rng(seed).standard_normal((n, n))
    A = A + A.T
    s, U = eigen_sym(A)
    assert np.all(np.diff(s.values) <= 0)
    assert np.max(np.abs(U @ np.diag(s.values) @ U.T - A)) <= 1e-10 * (1 + np.max(np.abs(A)))
    np.testing.assert_allclose(U.T @ U, np.eye(n), atol=1e-12)


def test_elementary_symmetric_examples():
    assert elementary_symmetric([1, 2, 3], 2) == 11
    assert elementary_symmetric([5.0, 7.0], 0) == 1
    s, _ = eigen_sym(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert abs(elementary_symmetric(s, 2) - 3.0) < 1e-12
    with pytest.raises(OutOfRange):
        elementary_symmetric([1, 2], 3)


def test_elementary_symmetric_clamps_noise():
    s = Spectrum(np.array([2.0, 1.0, -1e-17]))
    assert elementary_symmetric(s, 3) == 0.0


@given(st.lists(st.floats(0, 10), min_size=1, max_size=7), st.data())
def test_elementary_symmetric_matches_enumeration(x, data):
    k = data.draw(st.integers(0, len(x)))
    got = elementary_symmetric(x, k)
    want = brute_esp(x, k)
    assert abs(got - want) <= 1e-10 * max(1.0, want)


def test_log_esp_large_degree_finite():
    x = np.full(60, 1e3)
    got = log_elementary_symmetric(x, 50)
    want = log(__import__("math").comb(60, 50)) + 50 * log(1e3)
    assert rel_close(got, want, 1e-12)
    assert log_elementary_symmetric([0.0, 0.0], 1) == float("-inf")


def test_logdet_submatrix_examples():
    M = np.diag([1.0, 2.0, 3.0])
    assert abs(logdet_submatrix(M, [1, 2]) - log(6)) < 1e-14
    assert logdet_submatrix(M, [0, 0]) == float("-inf")
    assert abs(logdet_submatrix(np.array([[2.0, 1.0], [1.0, 2.0]]), [0, 1]) - log(3)) < 1e-14
    with pytest.raises(OutOfRange):
        logdet_submatrix(M, [3])


def test_logdet_singular_is_neg_inf():
    M = np.array([[1.0, 1.0], [1.0, 1.0]])
    assert logdet_submatrix(M, [0, 1]) == float("-inf")


def test_projector_examples():
    V = np.eye(2)
    np.testing.assert_array_equal(projector_complement(V, []), np.eye(2))
    np.testing.assert_allclose(projector_complement(V, [0]), np.diag([0.0, 1.0]), atol=1e-15)
    V = np.array([[1.0, 1.0], [0.0, 1.0]])
    np.testing.assert_allclose(projector_complement(V, [1]), [[0.5, -0.5], [-0.5, 0.5]], atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 5), st.integers(1, 6))
def test_projector_idempotent_and_annihilates(seed, r, n):
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((r, n))
    T = [i for i in range(n) if rng.random() < 0.5]
    P = projector_complement(V, T)
    np.testing.assert_allclose(P @ P, P, atol=1e-12)
    for i in T:
        assert np.linalg.norm(P @ V[:, i]) <= 1e-9 * (1 + np.linalg.norm(V[:, i]))


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 4), st.data())
def test_binet_cauchy(seed, m, data):
    n = data.draw(st.integers(m, 6))
    A = np.random.default_rng(seed).standard_normal((m, n))
    total = sum(np.linalg.det(A[:, S]) ** 2 for S in itertools.combinations(range(n), m))
    assert rel_close(np.linalg.det(A @ A.T), total, 1e-9)


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 6))
def test_principal_minor_sums_are_esp(seed, n):
    B = np.random.default_rng(seed).standard_normal((n, n))
    M = B + B.T
    s, _ = eigen_sym(M, zero_tol=0.0)
    for k in range(n + 1):
        minors = sum(np.linalg.det(M[np.ix_(S, S)]) for S in itertools.combinations(range(n), k))
        # raw (signed) eigenvalues: compare against enumeration over the values themselves
        assert abs(minors - brute_esp(s.values, k)) <= 1e-8 * max(1.0, abs(minors))
    P = B.T @ B
    s, _ = eigen_sym(P)
    for k in range(n + 1):
        minors = sum(np.linalg.det(P[np.ix_(S, S)]) for S in itertools.combinations(range(n), k))
        assert abs(minors - elementary_symmetric(s, k)) <= 1e-8 * max(1.0, abs(minors))


@given(st.lists(st.floats(0, 5), min_size=2, max_size=7), st.data())
def test_schur_concavity(x, data):
    x = np.array(x)
    lo, hi = data.draw(st.sampled_from(list(itertools.permutations(range(len(x)), 2))))
    if x[lo] > x[hi]:
        lo, hi = hi, lo
    eps = data.draw(st.floats(0, 1)) * x[lo]
    y = x.copy()
    y[lo] -= eps
    y[hi] += eps
    for k in range(len(x) + 1):
        assert elementary_symmetric(y, k) <= elementary_symmetric(x, k) + 1e-12 * max(1, brute_esp(x, k))
