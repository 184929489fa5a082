import itertools
from math import exp, factorial, log, sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from detmax.errors import BudgetExceeded, InvalidInput, RankDeficient
from detmax.problems import (
    MsdInstance,
    MvsInstance,
    detlb2_sweep,
    msd_approx,
    msd_oracle,
    mvs_approx,
    mvs_oracle,
    mvs_reduce,
)
from detmax.rounding import log_guarantee_factor

from conftest import brute_msd, rel_close

seeds = st.integers(0, 2**32 - 1)
TRIANGLE = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])


def simplex_volume(P, S):
    """Simplex volume from the Gram determinant of its edge vectors."""
    E = P[:, S[1:]] - P[:, [S[0]]]
    return sqrt(max(np.linalg.det(E.T @ E), 0.0)) / factorial(len(S) - 1)


def test_msd_examples():
    M = np.diag([1.0, 2.0, 3.0])
    for sel in (msd_approx(MsdInstance(M, 2)), msd_oracle(MsdInstance(M, 2))):
        assert sel.one_based() == [2, 3] and abs(sel.det - 6) < 1e-12
    sel = msd_approx(MsdInstance(np.eye(4), 4))
    assert sel.indices == (0, 1, 2, 3) and abs(sel.det - 1) < 1e-12
    assert msd_oracle(MsdInstance(np.eye(5), 3)).indices == (0, 1, 2)
    B = np.random.default_rng(0).standard_normal((2, 5))
    with pytest.raises(RankDeficient):
        msd_approx(MsdInstance(B.T @ B, 3))


def test_msd_sampled_mode_records_seed():
    M = np.diag([1.0, 2.0, 3.0, 4.0])
    a = msd_approx(MsdInstance(M, 2), mode="sampled", seed=11)
    b = msd_approx(MsdInstance(M, 2), mode="sampled", seed=11)
    assert a == b and a.seed == 11 and a.method == "sampled"
    with pytest.raises(InvalidInput):
        msd_approx(MsdInstance(M, 2), mode="greedy")


def test_oracle_budget():
    with pytest.raises(BudgetExceeded):
        msd_oracle(MsdInstance(np.eye(30), 15))


@pytest.mark.parametrize("seed", range(5))
def test_oracle_matches_independent_enumeration(seed):
    B = np.random.default_rng(seed).standard_normal((4, 6))
    M = B.T @ B
    # second enumeration in reverse-lexicographic order
    best = max(np.linalg.det(M[np.ix_(S, S)]) for S in reversed(list(itertools.combinations(range(6), 3))))
    assert rel_close(msd_oracle(MsdInstance(M, 3)).det, best, 1e-10)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(1, 8), st.data())
def test_pipeline_guarantee(seed, d, n, data):
    B = np.random.default_rng(seed).standard_normal((d, n))
    M = B.T @ B
    j = data.draw(st.integers(1, min(d, n)))
    sel = msd_approx(MsdInstance(M, j))
    floor = log_guarantee_factor(j, sel.certificate_alpha) + log(brute_msd(M, j))
    assert sel.logdet >= floor + log(1 - 1e-8)


def test_reduce_examples():
    red = mvs_reduce(MvsInstance(TRIANGLE, 2))
    np.testing.assert_array_equal(red[0].matrix, np.eye(2))
    assert red[0].labels == (1, 2)
    P = np.array([[0.0, 1.0, 1.0, 3.0], [0.0, 2.0, 2.0, 1.0]])
    M = mvs_reduce(MvsInstance(P, 2))[0].matrix
    # points 1 and 2 coincide: their difference from the anchor is equal
    np.testing.assert_array_equal(M[0], M[1])
    M = mvs_reduce(MvsInstance(P, 2))[1].matrix
    np.testing.assert_array_equal(M[1], np.zeros(3))


@pytest.mark.parametrize("seed", range(3))
def test_reduce_volume_scaling(seed):
    P = np.random.default_rng(seed).standard_normal((3, 4))
    for anchor, inst in enumerate(mvs_reduce(MvsInstance(P, 2))):
        for S in itertools.combinations(range(3), 2):
            det = np.linalg.det(inst.matrix[np.ix_(S, S)])
            verts = [anchor] + [inst.labels[i] for i in S]
            assert rel_close(det, (2 * simplex_volume(P, verts)) ** 2, 1e-9)


def test_mvs_examples():
    inst = MvsInstance(TRIANGLE, 2)
    assert mvs_oracle(inst).volume == 0.5
    assert mvs_approx(inst).volume == 0.5
    square = np.array([[0.0, 1.0, 0.0, 1.0], [0.0, 0.0, 1.0, 1.0]])
    assert abs(mvs_oracle(MvsInstance(square, 2)).volume - 0.5) < 1e-15
    # regular simplex in the plane: equilateral triangle with unit sides
    tri = np.array([[0.0, 1.0, 0.5], [0.0, 0.0, sqrt(3) / 2]])
    assert abs(mvs_oracle(MvsInstance(tri, 2)).volume - sqrt(3) / 4) < 1e-15


def test_mvs_collinear_is_degenerate():
    P = np.array([[0.0, 1.0, 2.0, 3.0], [0.0, 1.0, 2.0, 3.0]])
    res = mvs_approx(MvsInstance(P, 2))
    assert res.degenerate and res.volume == 0.0
    ref = mvs_oracle(MvsInstance(P, 2))
    assert ref.degenerate and ref.volume == 0.0


def test_mvs_instance_validation():
    with pytest.raises(InvalidInput):
        MvsInstance(TRIANGLE, 3)
    with pytest.raises(InvalidInput):
        MvsInstance(TRIANGLE[:, :2], 2)


@pytest.mark.parametrize("seed", range(5))
def test_mvs_approx_certified_floor(seed):
    P = np.random.default_rng(seed).standard_normal((3, 6))
    inst = MvsInstance(P, 2)
    res, ref = mvs_approx(inst), mvs_oracle(inst)
    assert res.volume >= exp(-1 - res.certificate_alpha / 2) * ref.volume
    assert res.volume <= ref.volume * (1 + 1e-12)
    assert rel_close(simplex_volume(P, list(res.vertices)), res.volume, 1e-9)


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 3), st.data())
def test_mvs_oracle_reduction_equality(seed, j, data):
    d = data.draw(st.integers(j, 4))
    n = data.draw(st.integers(j + 1, 7))
    P = np.random.default_rng(seed).standard_normal((d, n))
    inst = MvsInstance(P, j)
    best = max(msd_oracle(sub).det for sub in mvs_reduce(inst))
    assert rel_close(mvs_oracle(inst).volume, sqrt(best) / factorial(j), 1e-8)


@pytest.mark.parametrize("seed", range(3))
def test_rotation_and_scaling(seed):
    rng = np.random.default_rng(seed)
    P = rng.standard_normal((3, 6))
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    base = mvs_oracle(MvsInstance(P, 2)).volume
    assert rel_close(mvs_oracle(MvsInstance(Q @ P, 2)).volume, base, 1e-8)
    assert rel_close(mvs_oracle(MvsInstance(2.5 * P, 2)).volume, 2.5**2 * base, 1e-8)
    for a, b in zip(mvs_reduce(MvsInstance(P, 2)), mvs_reduce(MvsInstance(Q @ P, 2))):
        assert rel_close(msd_oracle(a).det, msd_oracle(b).det, 1e-8)
    M = P.T @ P
    assert rel_close(msd_oracle(MsdInstance(9 * M, 3)).det, 3.0 ** 6 * msd_oracle(MsdInstance(M, 3)).det, 1e-8)
    a = msd_approx(MsdInstance(M, 3))
    b = msd_approx(MsdInstance(9 * M, 3))
    assert rel_close(b.det, 3.0**6 * a.det, 1e-8)


def test_detlb2_examples():
    res = detlb2_sweep(np.eye(4))
    assert res.best_j == 4 and abs(res.value - 2) < 1e-12
    res = detlb2_sweep(np.diag([2.0, 1.0]))
    assert abs(res.value - 2) < 1e-12 and abs(res.values[2] - 2) < 1e-12
    res = detlb2_sweep(np.outer([1.0, 2.0], [3.0, 1.0, 1.0]))
    assert res.best_j == 1 and list(res.values) == [1]
    with pytest.raises(InvalidInput):
        detlb2_sweep(np.zeros((2, 2)))
