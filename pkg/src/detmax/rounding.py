"""Rounding fractional designs to index sets.

Three selectors share the :class:`Selection` record:

* :func:`sample_select` draws ``j`` indices i.i.d. from ``c / j``;
* :func:`derandomized_select` replaces the draws by conditional expectations,
  greedily maximizing the potential :func:`phi_potential`;
* :func:`rip_select` applies the same greedy to transformed points ``L v_i``
  given a decomposition of the identity.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import floor, lgamma, log

import numpy as np

from .design import check_weights, design_matrix
from .errors import DegeneratePotential, InvalidDistribution, OutOfRange, PreconditionViolated
from .linalg import (
    NEG_INF,
    Spectrum,
    as_points,
    log_elementary_symmetric,
    logdet_submatrix,
    projector_complement,
)


@dataclass(frozen=True)
class Selection:
    indices: tuple
    logdet: float
    method: str
    certificate_alpha: float | None = None
    seed: int | None = None
    iterations: int | None = None

    @property
    def det(self):
        return float(np.exp(self.logdet))

    def one_based(self):
        return [i + 1 for i in self.indices]


def log_guarantee_factor(j, alpha=0.0):
    """``log(j!/j^j) - alpha``, the log of the rounding guarantee."""
    return lgamma(j + 1) - j * log(j) - alpha


def _gram(V, M):
    return V.T @ V if M is None else np.asarray(M, dtype=float)


def sample_select(V, c, j, seed=None, M=None):
    """Draw ``j`` indices with replacement from ``Pr[i] = c_i / j``.

    ``M`` defaults to the Gram matrix of ``V``; repeated draws give ``logdet = -inf``.
    """
    V = as_points(V)
    c = np.asarray(c, dtype=float)
    if c.shape != (V.shape[1],):
        raise InvalidDistribution("weight vector length does not match the number of points")
    if np.any(c < -1e-12) or abs(c.sum() - j) > 1e-9:
        raise InvalidDistribution(f"weights must be nonnegative and sum to {j}")
    p = np.maximum(c, 0.0)
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    draws = rng.choice(len(p), size=j, replace=True, p=p)
    indices = tuple(sorted(int(i) for i in draws))
    return Selection(indices, logdet_submatrix(_gram(V, M), indices), "sampled", seed=seed)


def phi_potential(V, c, j, T, M=None):
    """Log of the conditional-expectation potential for a partial draw ``T``.

    ``Phi(T) = (j - |T|)! det(M[T, T]) e_{j-|T|}(lambda(T))`` where ``lambda(T)``
    is the spectrum of ``P X P``, ``X = sum_i c_i v_i v_i^T`` and ``P`` the
    projector onto the complement of ``span{v_i : i in T}``.  With the factorial,
    ``Phi(T) = j^(j-|T|) E[det M[S, S] | draws start with T]``, so
    ``Phi(T) = sum_i c_i Phi(T + [i])`` and ``Phi`` of a full draw is its
    determinant.
    """
    V = as_points(V)
    M = _gram(V, M)
    T = [int(i) for i in T]
    n = V.shape[1]
    if any(i < 0 or i >= n for i in T):
        raise OutOfRange(f"index outside 0..{n - 1}")
    if len(T) > j:
        raise OutOfRange(f"|T|={len(T)} exceeds j={j}")
    if len(set(T)) < len(T):
        return NEG_INF
    base = logdet_submatrix(M, T)
    if base == NEG_INF:
        return NEG_INF
    rest = j - len(T)
    if rest == 0:
        return base
    if rest > V.shape[0]:
        return NEG_INF
    P = projector_complement(V, T)
    X = P @ design_matrix(V, c) @ P
    vals = np.linalg.eigvalsh(0.5 * (X + X.T))
    return base + lgamma(rest + 1) + log_elementary_symmetric(Spectrum(vals), rest)


def derandomized_select(V, c, j, M=None, certificate_alpha=None):
    """Greedy conditional-expectation rounding.

    Starting from the empty set, ``j`` times adds the index outside the current
    set maximizing the potential (lowest index on ties).  The result satisfies
    ``det >= Phi(empty) / j^j``, i.e. ``j!/j^j e_j(X)``.
    """
    V = as_points(V)
    M = _gram(V, M)
    n = V.shape[1]
    c = check_weights(c, j, n)
    if phi_potential(V, c, j, [], M) == NEG_INF:
        raise DegeneratePotential("potential of the empty set is zero; rank below j")
    chosen = []
    for _ in range(j):
        scores = np.full(n, NEG_INF)
        for i in range(n):
            if i not in chosen:
                scores[i] = phi_potential(V, c, j, chosen + [i], M)
        chosen.append(int(np.argmax(scores)))
    indices = tuple(sorted(chosen))
    return Selection(indices, logdet_submatrix(M, indices), "derandomized",
                     certificate_alpha=certificate_alpha)


def rip_admissible_j(L):
    """Largest ``j`` allowed: ``floor(||L||_HS^2 / ||L||_2^2)``."""
    L = np.asarray(L, dtype=float)
    op = np.linalg.norm(L, 2) ** 2
    if op == 0:
        return 0
    return int(floor(np.sum(L**2) / op + 1e-9))


def rip_log_bound(c, L, j):
    """Log of ``(j!/j^j) ||L||_HS^(2j) / (sum c)^j``."""
    hs2 = float(np.sum(np.asarray(L, dtype=float) ** 2))
    return log_guarantee_factor(j) + j * log(hs2) - j * log(float(np.sum(c)))


def rip_select(V, c, L, j):
    """Pick ``j`` indices whose transformed Gram matrix ``(<L v_i, L v_k>)`` has large determinant.

    Requires ``sum_i c_i v_i v_i^T = I`` and ``j <= rip_admissible_j(L)``.
    """
    V = as_points(V)
    c = np.asarray(c, dtype=float)
    L = np.asarray(L, dtype=float)
    r = V.shape[0]
    if L.shape != (r, r):
        raise PreconditionViolated(f"L must be {r} x {r}")
    if np.any(c < 0) or np.max(np.abs(design_matrix(V, c) - np.eye(r))) > 1e-8:
        raise PreconditionViolated("weights do not decompose the identity")
    if j < 1 or j > rip_admissible_j(L):
        raise PreconditionViolated(f"j={j} exceeds the robust rank of L")
    LV = L @ V
    weights = j * c / c.sum()
    sel = derandomized_select(LV, weights, j, LV.T @ LV)
    return Selection(sel.indices, sel.logdet, "rip")
