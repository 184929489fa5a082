"""Dense symmetric linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays. A point set is an ``r x n`` array whose
columns are the points; a log-determinant is a float where ``-inf`` stands
for a zero determinant.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import log

import numpy as np

from .errors import ConvergenceFailure, DimensionMismatch, InvalidInput, NotPsd, OutOfRange

# Relative cutoff below which a pivot or eigenvalue counts as zero; the scale
# is 1 + (largest magnitude in the matrix).
RANK_RTOL = 1e-13

NEG_INF = float("-inf")


def scale_of(A):
    return 1.0 + (float(np.max(np.abs(A))) if np.size(A) else 0.0)


def as_symmetric(M, tol=1e-9):
    """Validate ``M`` as a square, symmetric array and return an exactly symmetric copy."""
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] == 0:
        raise DimensionMismatch("matrix order must be at least 1")
    if not np.all(np.isfinite(M)):
        raise InvalidInput("matrix has non-finite entries")
    if np.max(np.abs(M - M.T)) > tol * scale_of(M):
        raise InvalidInput("matrix is not symmetric")
    return 0.5 * (M + M.T)


def as_points(V):
    V = np.array(V, dtype=float)
    if V.ndim != 2 or V.shape[1] == 0:
        raise DimensionMismatch(f"expected an r x n point array, got shape {V.shape}")
    return V


def _pivoted_cholesky(A, rank_tol, psd_tol=None):
    """Greedy diagonal-pivoted Cholesky of a symmetric matrix.

    Returns ``(R, pivots, diag)`` with ``R`` of shape ``(r, n)`` in the original
    column order so that ``R.T @ R`` approximates ``A``; ``diag`` holds the
    Schur-complement pivots (squared diagonal of the factor).
    """
    S = np.array(A, dtype=float)
    n = S.shape[0]
    rows = []
    pivots = []
    diag = []
    active = np.ones(n, dtype=bool)
    for _ in range(n):
        d = np.where(active, np.diag(S), -np.inf)
        if psd_tol is not None and np.any(active) and np.min(np.diag(S)[active]) < -psd_tol:
            raise NotPsd("matrix has a negative pivot beyond tolerance")
        p = int(np.argmax(d))
        if d[p] <= rank_tol:
            break
        row = S[p] / np.sqrt(d[p])
        row[~active] = 0.0
        rows.append(row)
        pivots.append(p)
        diag.append(float(d[p]))
        active[p] = False
        S = S - np.outer(row, row)
        S[p, :] = 0.0
        S[:, p] = 0.0
    if psd_tol is not None and np.any(active):
        rest = S[np.ix_(active, active)]
        if np.min(np.diag(rest)) < -psd_tol or np.max(np.abs(rest)) > psd_tol:
            raise NotPsd("matrix is not positive semidefinite within tolerance")
    R = np.array(rows).reshape(len(rows), n)
    return R, pivots, diag


def cholesky_psd(M, psd_tol=1e-9):
    """Rank-revealing factorization ``M = V.T @ V`` of a PSD matrix.

    Parameters
    ----------
    M : array_like, shape (n, n)
        Symmetric positive semidefinite matrix.
    psd_tol : float
        Relative slack (against ``1 + max|M|``) allowed for negative pivots
        and for the residual left after dropping zero pivots.

    Returns
    -------
    V : ndarray, shape (r, n)
        ``r`` is the numerical rank of ``M``; columns are the points ``v_i``.
    """
    if psd_tol < 0:
        raise InvalidInput("psd_tol must be nonnegative")
    M = as_symmetric(M)
    scale = scale_of(M)
    R, _, _ = _pivoted_cholesky(M, RANK_RTOL * scale, psd_tol * scale)
    return R


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted in nonincreasing order."""

    values: np.ndarray
    zero_tol: float = RANK_RTOL

    def __post_init__(self):
        vals = np.sort(np.asarray(self.values, dtype=float))[::-1]
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    @property
    def cutoff(self):
        top = float(np.max(np.abs(self.values))) if len(self.values) else 0.0
        return self.zero_tol * max(top, 1.0)

    def rank(self):
        return int(np.sum(self.values > self.cutoff))

    def clamped(self):
        """Values with everything at or below the zero cutoff set to 0."""
        return np.where(self.values > self.cutoff, self.values, 0.0)


def eigen_sym(A, zero_tol=RANK_RTOL):
    """Eigen-decomposition of a symmetric matrix, eigenvalues nonincreasing.

    Returns ``(Spectrum, U)`` with ``A ~= U @ diag(values) @ U.T``.
    """
    A = as_symmetric(A)
    try:
        w, U = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    order = np.argsort(w)[::-1]
    return Spectrum(w[order], zero_tol), U[:, order]


def _as_spectrum(s):
    return s if isinstance(s, Spectrum) else Spectrum(np.asarray(s, dtype=float), 0.0)


def elementary_symmetric(s, k):
    """``e_k`` of the (clamped) eigenvalues via the degree-``k`` prefix recurrence.

    ``s`` is a :class:`Spectrum` or a plain sequence of nonnegative numbers.
    """
    s = _as_spectrum(s)
    if k < 0 or k > len(s):
        raise OutOfRange(f"k={k} outside 0..{len(s)}")
    x = np.maximum(s.clamped(), 0.0)
    e = np.zeros(k + 1)
    e[0] = 1.0
    for xi in x:
        e[1:] = e[1:] + xi * e[:-1]
    return max(float(e[k]), 0.0)


def log_elementary_symmetric(s, k):
    """``log e_k``, rescaled by the largest value so that large ``k`` cannot overflow."""
    s = _as_spectrum(s)
    if k < 0 or k > len(s):
        raise OutOfRange(f"k={k} outside 0..{len(s)}")
    if k == 0:
        return 0.0
    x = np.maximum(s.clamped(), 0.0)
    top = float(np.max(x)) if len(x) else 0.0
    if top == 0.0:
        return NEG_INF
    val = elementary_symmetric(Spectrum(x / top, 0.0), k)
    if val <= 0.0:
        return NEG_INF
    return log(val) + k * log(top)


def logdet_submatrix(M, S):
    """``log det M[S, S]`` with multiset semantics; ``-inf`` encodes zero."""
    M = np.asarray(M, dtype=float)
    S = [int(i) for i in S]
    n = M.shape[0]
    for i in S:
        if i < 0 or i >= n:
            raise OutOfRange(f"index {i} outside 0..{n - 1}")
    if not S:
        return 0.0
    if len(set(S)) < len(S):
        return NEG_INF
    sub = M[np.ix_(S, S)]
    _, pivots, diag = _pivoted_cholesky(sub, RANK_RTOL * scale_of(sub))
    if len(pivots) < len(S):
        return NEG_INF
    return float(np.sum(np.log(diag)))


def span_basis(B):
    """Orthonormal basis (as columns) of the column span of ``B``."""
    B = np.asarray(B, dtype=float)
    if B.size == 0:
        return np.zeros((B.shape[0], 0))
    U, s, _ = np.linalg.svd(B, full_matrices=False)
    keep = s**2 > RANK_RTOL * (1.0 + s[0] ** 2)
    return U[:, keep]


def projector_complement(V, T):
    """Orthogonal projector onto the complement of ``span{v_i : i in T}``."""
    V = np.asarray(V, dtype=float)
    r, n = V.shape
    T = [int(i) for i in T]
    for i in T:
        if i < 0 or i >= n:
            raise OutOfRange(f"index {i} outside 0..{n - 1}")
    Q = span_basis(V[:, sorted(set(T))])
    P = np.eye(r) - Q @ Q.T
    return 0.5 * (P + P.T)
