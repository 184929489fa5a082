"""Generalized D-optimal design relaxation and its ellipsoid dual.

The relaxation maximizes ``Gamma_j(sum_i c_i v_i v_i^T)`` over weights
``c >= 0`` with ``sum(c) == j``.  ``Gamma_j`` is the concave spectral function
that adds the logs of the ``k`` largest eigenvalues to ``j - k`` times the log
of the averaged tail, where ``k`` comes from :func:`threshold_index`.  The dual
minimizes ``Delta_j(W) = -sum(log of the j smallest eigenvalues of W)`` over
positive definite ``W`` with ``v_i^T W v_i <= 1``, i.e. over centered
ellipsoids containing the points.  Any feasible ``W`` bounds the relaxation
from above, which is how :func:`dual_witness` certifies a gap.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import log

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidInput,
    IterationBudgetExceeded,
    NotPositiveDefinite,
    RankDeficient,
)
from .linalg import NEG_INF, RANK_RTOL, Spectrum, as_points

log_ = logging.getLogger(__name__)

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
WEIGHT_SUM_TOL = 1e-9
# Absolute slack (times 1 + largest value) for comparisons in threshold_index.
TIE_SLACK = 1e-12
# Null-space eigenvalues of the witness sit just above 1/nu; larger values only
# inflate the feasibility rescaling when the design matrix is singular.
DEFAULT_EPSILON_FRAC = 1e-9


@dataclass(frozen=True)
class GapCertificate:
    primal_value: float
    dual_value: float
    alpha: float

    @property
    def upper_bound(self):
        """``exp`` of this bounds the j-subdeterminant optimum from above."""
        return self.dual_value


@dataclass(frozen=True)
class DualWitness:
    """Feasible ellipsoid matrix ``W = basis @ diag(eigenvalues) @ basis.T``."""

    basis: np.ndarray
    eigenvalues: np.ndarray
    epsilon_frac: float
    scale: float

    @property
    def matrix(self):
        W = (self.basis * self.eigenvalues) @ self.basis.T
        return 0.5 * (W + W.T)


@dataclass
class DesignResult:
    weights: np.ndarray
    certificate: GapCertificate
    witness: DualWitness
    iterations: int
    converged: bool
    objective_history: list = field(default_factory=list)
    certificates: list = field(default_factory=list)

    @property
    def objective(self):
        return self.certificate.primal_value


def check_weights(c, j, n=None):
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or (n is not None and c.shape[0] != n):
        raise DimensionMismatch(f"weights must be a vector of length {n}")
    if np.any(c < 0):
        raise InvalidInput("design weights must be nonnegative")
    if abs(c.sum() - j) > WEIGHT_SUM_TOL * max(1.0, j):
        raise InvalidInput(f"design weights sum to {c.sum()!r}, expected {j}")
    return c


def _sorted_values(x):
    vals = x.values if isinstance(x, Spectrum) else np.asarray(x, dtype=float)
    return vals


def threshold_index(x, j):
    """Unique ``k`` in ``0..j-1`` with ``x[k] > tail_k / (j - k) >= x[k+1]``.

    ``x`` is nonincreasing and nonnegative; indices in the inequality are
    1-based with ``x[0] = inf`` and ``tail_k = sum(x[k+1:])``.
    """
    x = np.asarray(_sorted_values(x), dtype=float)
    m = len(x)
    if j < 1 or j > m:
        raise InvalidInput(f"j={j} must lie in 1..{m}")
    slack = TIE_SLACK * (1.0 + (abs(x[0]) if m else 0.0))
    if np.any(np.diff(x) > slack):
        raise InvalidInput("values must be sorted in nonincreasing order")
    if np.any(x < -slack):
        raise InvalidInput("values must be nonnegative")
    return _threshold(np.maximum(x, 0.0), j, slack)


def _threshold(x, j, slack):
    tail = float(np.sum(x))
    k = 0
    # x[k] is the (k+1)-th largest; stop at the first k whose tail average
    # dominates it, which also satisfies the strict inequality by the scan.
    while k < j - 1 and tail / (j - k) < x[k] - slack:
        tail -= x[k]
        k += 1
    return k


def _gamma_sorted(x, j, cutoff):
    """gamma_j of a nonincreasing vector; ``-inf`` when fewer than j values exceed ``cutoff``."""
    if len(x) < j or x[j - 1] <= cutoff:
        return NEG_INF
    x = np.maximum(x, 0.0)
    k = _threshold(x, j, TIE_SLACK * (1.0 + x[0]))
    tail = float(np.sum(x[k:]))
    return float(np.sum(np.log(x[:k]))) + (j - k) * log(tail / (j - k))


def gamma_j(s, j):
    """Concave relaxation objective evaluated on a spectrum."""
    if j < 1:
        raise InvalidInput("j must be positive")
    if not isinstance(s, Spectrum):
        s = Spectrum(np.asarray(s, dtype=float))
    if s.rank() < j:
        return NEG_INF
    return _gamma_sorted(s.values, j, s.cutoff)


def delta_j(s, j):
    """Minus the sum of logs of the ``j`` smallest eigenvalues."""
    vals = np.sort(np.asarray(_sorted_values(s), dtype=float))
    if j < 1 or j > len(vals):
        raise InvalidInput(f"j={j} must lie in 1..{len(vals)}")
    if vals[0] <= 0:
        raise NotPositiveDefinite("delta_j needs strictly positive eigenvalues")
    return -float(np.sum(np.log(vals[:j])))


def design_matrix(V, c):
    """``sum_i c_i v_i v_i^T`` for the columns of ``V``."""
    V = as_points(V)
    c = np.asarray(c, dtype=float)
    if c.shape != (V.shape[1],):
        raise DimensionMismatch(f"{V.shape[1]} points but {c.shape} weights")
    X = (V * c) @ V.T
    return 0.5 * (X + X.T)


def _spectral_split(V, c, j):
    X = design_matrix(V, c)
    w, U = np.linalg.eigh(X)
    order = np.argsort(w)[::-1]
    spectrum = Spectrum(w[order])
    if spectrum.rank() < j:
        raise RankDeficient(f"design matrix has rank {spectrum.rank()} < j={j}")
    mu = spectrum.clamped()
    k = _threshold(mu, j, TIE_SLACK * (1.0 + mu[0]))
    nu = float(np.sum(mu[k:])) / (j - k)
    return X, spectrum, U[:, order], mu, k, nu


def supergradient(V, c, j):
    """Supergradient of ``c -> Gamma_j(design_matrix(V, c))``.

    Uses the gradient matrix ``G = U diag(h) U^T`` with ``h_i = 1/mu_i`` on the
    leading ``k`` eigenvalues and ``1/nu`` on the averaged tail; the returned
    vector is ``g_i = v_i^T G v_i``.
    """
    V = as_points(V)
    _, _, U, mu, k, nu = _spectral_split(V, c, j)
    h = np.full(len(mu), 1.0 / nu)
    h[:k] = 1.0 / mu[:k]
    G = (U * h) @ U.T
    return np.einsum("ri,rs,si->i", V, G, V)


def dual_witness(V, c, j, epsilon_frac=DEFAULT_EPSILON_FRAC):
    """Feasible dual ellipsoid matching the design's objective, plus the gap it certifies.

    Eigenvalues of the unscaled ``W`` are ``1/mu_i`` on the leading block,
    ``1/nu`` on the rest of the range of ``X`` and ``1/(nu (1 - epsilon_frac))``
    on its null space, so that ``Delta_j(W) = Gamma_j(X)``.  ``W`` is then divided
    by ``t = max_i v_i^T W v_i`` to make it feasible; the gap is ``j log t``.
    """
    if not 0.0 < epsilon_frac < 1.0:
        raise InvalidInput("epsilon_frac must lie in (0, 1)")
    V = as_points(V)
    c = check_weights(c, j, V.shape[1])
    X, spectrum, U, mu, k, nu = _spectral_split(V, c, j)
    rank = spectrum.rank()
    lam = np.empty(len(mu))
    lam[:k] = 1.0 / mu[:k]
    lam[k:rank] = 1.0 / nu
    lam[rank:] = 1.0 / (nu * (1.0 - epsilon_frac))
    W = (U * lam) @ U.T
    t = float(np.max(np.einsum("ri,rs,si->i", V, W, V)))
    scaled = lam / t
    primal = _gamma_sorted(spectrum.values, j, spectrum.cutoff)
    dual = delta_j(scaled, j)
    alpha = dual - primal
    if -1e-8 <= alpha < 0.0:
        alpha = 0.0
    witness = DualWitness(basis=U, eigenvalues=scaled, epsilon_frac=epsilon_frac, scale=t)
    return witness, GapCertificate(primal, dual, alpha)


def verify_certificate(V, witness, certificate, j, tol=1e-9):
    """Independently re-check a certificate: ``W`` positive definite, feasible, and matching its value."""
    V = as_points(V)
    W = witness.matrix
    lam = np.linalg.eigvalsh(W)
    if lam[0] <= 0:
        return False
    if np.max(np.einsum("ri,rs,si->i", V, W, V)) > 1.0 + tol:
        return False
    dual = -float(np.sum(np.log(lam[:j])))
    return abs(dual - certificate.dual_value) <= tol * (1.0 + abs(dual))


def _golden_max(f, lo, hi, tol):
    """Maximize a concave scalar function on ``[lo, hi]``; returns ``(x, f(x))``."""
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
    best = (x1, f1) if f1 >= f2 else (x2, f2)
    f_hi = f(hi)
    if f_hi > best[1]:
        best = (hi, f_hi)
    return best


def solve_design(V, j, target_alpha=0.05, max_iters=5000, seed=None, certify_every=10,
                 epsilon_frac=DEFAULT_EPSILON_FRAC, line_tol=1e-9, away_steps=True):
    """Frank-Wolfe ascent on the relaxation with a certified stopping rule.

    Starts from uniform weights ``j/n``.  Each iteration moves toward the
    vertex ``j e_i`` with the largest supergradient entry (lowest index on
    ties), or, with ``away_steps``, away from the support vertex with the
    smallest entry when that promises more; the step length comes from a
    golden section search.  Every ``certify_every`` iterations a dual witness
    is built and the run stops once the certified gap is at most
    ``target_alpha``.

    ``objective_history`` holds the best objective after each iteration.  A
    support weight whose removal does not change the objective (to rounding)
    is dropped in a single away step.

    ``seed`` is accepted for interface stability; the method is deterministic.

    Raises
    ------
    RankDeficient
        If the points span fewer than ``j`` dimensions.
    IterationBudgetExceeded
        If ``max_iters`` pass without certification; ``exc.result`` holds the
        best design and its (valid, looser) certificate.
    """
    del seed
    V = as_points(V)
    r, n = V.shape
    if j < 1:
        raise InvalidInput("j must be positive")
    if target_alpha <= 0 or max_iters < 1 or certify_every < 1:
        raise InvalidInput("target_alpha, max_iters and certify_every must be positive")
    c = np.full(n, j / n)
    X = design_matrix(V, c)
    if r < j or Spectrum(np.linalg.eigvalsh(X)).rank() < j:
        raise RankDeficient(f"points span fewer than j={j} dimensions")

    def objective(Y):
        vals = np.linalg.eigvalsh(Y)[::-1]
        return _gamma_sorted(vals, j, RANK_RTOL * max(abs(vals[0]), 1.0))

    value = objective(X)
    history = [value]
    witness, cert = dual_witness(V, c, j, epsilon_frac)
    certs = [(0, cert)]
    converged = cert.alpha <= target_alpha
    it = 0
    while not converged and it < max_iters:
        it += 1
        g = supergradient(V, c, j)
        i_fw = int(np.argmax(g))
        support = np.flatnonzero(c > 0)
        i_aw = int(support[np.argmin(g[support])])
        drop = False
        flat = 1e-13 * (1.0 + abs(value))
        # tr(XG) = j, so sum(c * g) = j and the gaps are measured against 1
        if away_steps and 1.0 - g[i_aw] > g[i_fw] - 1.0 and c[i_aw] < j:
            v = V[:, i_aw]
            vertex = j * np.outer(v, v)
            s_max = c[i_aw] / (j - c[i_aw])

            def phi(s, X=X, vertex=vertex):
                return objective((1.0 + s) * X - s * vertex)

            s, f_s = _golden_max(phi, 0.0, s_max, line_tol * s_max)
            # a weight whose removal is invisible to the objective is dropped outright;
            # otherwise a vanishing weight can pin the away direction forever
            drop = s < s_max and phi(s_max) >= f_s - flat
            if drop:
                s = s_max
            c_new = (1.0 + s) * c
            c_new[i_aw] -= s * j
            if s == s_max:
                c_new[i_aw] = 0.0
            c_new = np.maximum(c_new, 0.0)
        else:
            v = V[:, i_fw]
            vertex = j * np.outer(v, v)

            def phi(s, X=X, vertex=vertex):
                return objective((1.0 - s) * X + s * vertex)

            s, _ = _golden_max(phi, 0.0, 1.0, line_tol)
            c_new = (1.0 - s) * c
            c_new[i_fw] += s * j
        if s > 0.0:
            # renormalize drift in the weight sum
            c_new *= j / c_new.sum()
            X_new = design_matrix(V, c_new)
            value_new = objective(X_new)
            if value_new >= value - (flat if drop else 0.0):
                c, X, value = c_new, X_new, value_new
        history.append(max(history[-1], value))
        if it % certify_every == 0 or it == max_iters:
            witness, cert = dual_witness(V, c, j, epsilon_frac)
            certs.append((it, cert))
            log_.debug("iter %d objective %.12g alpha %.3g", it, value, cert.alpha)
            converged = cert.alpha <= target_alpha
    result = DesignResult(weights=c, certificate=cert, witness=witness, iterations=it,
                          converged=converged, objective_history=history, certificates=certs)
    if not converged:
        raise IterationBudgetExceeded(
            f"alpha {cert.alpha:.4g} > {target_alpha} after {it} iterations", result)
    return result
