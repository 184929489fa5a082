"""End-to-end pipelines for maximum subdeterminant and maximum volume simplex.

Indices are 0-based throughout the library; the CLI converts to 1-based.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from math import comb, exp, factorial, lgamma, sqrt

import numpy as np

from .design import solve_design
from .errors import BudgetExceeded, InvalidInput, IterationBudgetExceeded, RankDeficient
from .linalg import NEG_INF, as_points, as_symmetric, cholesky_psd, logdet_submatrix
from .rounding import Selection, derandomized_select, sample_select

log_ = logging.getLogger(__name__)

DEFAULT_BUDGET = 2_000_000
_CHUNK = 1 << 15


@dataclass(frozen=True)
class MsdInstance:
    matrix: np.ndarray
    j: int
    labels: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_symmetric(self.matrix))
        if self.j < 1:
            raise InvalidInput("j must be positive")
        if self.labels is not None and len(self.labels) != self.matrix.shape[0]:
            raise InvalidInput("one label per row is required")


@dataclass(frozen=True)
class MvsInstance:
    points: np.ndarray
    j: int

    def __post_init__(self):
        object.__setattr__(self, "points", as_points(self.points))
        d, n = self.points.shape
        if not 1 <= self.j <= d:
            raise InvalidInput(f"j={self.j} must lie in 1..{d}")
        if n < self.j + 1:
            raise InvalidInput(f"need at least j+1={self.j + 1} points, got {n}")


@dataclass(frozen=True)
class MvsResult:
    vertices: tuple
    volume: float
    method: str
    degenerate: bool = False
    certificate_alpha: float | None = None
    anchor: int | None = None


@dataclass
class Detlb2Result:
    best_j: int | None
    value: float
    values: dict = field(default_factory=dict)
    skipped: dict = field(default_factory=dict)


def msd_approx(inst, target_alpha=0.05, seed=None, mode="derandomized", max_iters=5000):
    """Factor, solve the relaxation, then round.

    In derandomized mode the result satisfies
    ``det >= (j!/j^j) exp(-alpha) * optimum`` with ``alpha`` the certified gap
    stored on the selection.  If the solver exhausts ``max_iters`` the best
    design is still rounded and its looser certificate is recorded.
    """
    if mode not in ("derandomized", "sampled"):
        raise InvalidInput(f"unknown mode {mode!r}")
    M = inst.matrix
    V = cholesky_psd(M)
    if V.shape[0] < inst.j:
        raise RankDeficient(f"matrix rank {V.shape[0]} < j={inst.j}")
    try:
        res = solve_design(V, inst.j, target_alpha=target_alpha, max_iters=max_iters)
    except IterationBudgetExceeded as exc:
        log_.warning("%s; rounding best design", exc)
        res = exc.result
    alpha = res.certificate.alpha
    if mode == "derandomized":
        sel = derandomized_select(V, res.weights, inst.j, M, certificate_alpha=alpha)
    else:
        sel = replace(sample_select(V, res.weights, inst.j, seed=seed, M=M), certificate_alpha=alpha)
    return replace(sel, iterations=res.iterations)


def _check_budget(n, k, budget):
    count = comb(n, k)
    if count > budget:
        raise BudgetExceeded(f"C({n},{k}) = {count} subsets exceeds the budget of {budget}")
    return count


def _chunks(n, k):
    combos = itertools.combinations(range(n), k)
    while True:
        block = list(itertools.islice(combos, _CHUNK))
        if not block:
            return
        yield np.array(block, dtype=np.intp).reshape(len(block), k)


def _batched_logdets(mats):
    sign, ld = np.linalg.slogdet(mats)
    return np.where(sign > 0, ld, NEG_INF)


def msd_oracle(inst, budget=DEFAULT_BUDGET):
    """Exact optimum by enumerating all size-``j`` subsets in lexicographic order."""
    M = inst.matrix
    n, j = M.shape[0], inst.j
    if j > n:
        raise InvalidInput(f"j={j} exceeds matrix order {n}")
    _check_budget(n, j, budget)
    best_val, best_set = NEG_INF, tuple(range(j))
    for block in _chunks(n, j):
        vals = _batched_logdets(M[block[:, :, None], block[:, None, :]])
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best_set = vals[i], tuple(int(x) for x in block[i])
    return Selection(best_set, logdet_submatrix(M, best_set), "oracle")


def mvs_reduce(inst):
    """One subdeterminant instance per anchor point.

    Instance ``i`` is the Gram matrix of ``v_k - v_i`` over ``k != i``; its
    ``labels`` map rows back to original point indices.
    """
    P = inst.points
    n = P.shape[1]
    out = []
    for i in range(n):
        others = [k for k in range(n) if k != i]
        E = P[:, others] - P[:, [i]]
        out.append(MsdInstance(E.T @ E, inst.j, labels=tuple(others)))
    return out


def _volume(logdet, j):
    if logdet == NEG_INF:
        return 0.0
    if j <= 170:
        return exp(0.5 * logdet) / factorial(j)
    return exp(0.5 * logdet - lgamma(j + 1))


def mvs_approx(inst, target_alpha=0.05, seed=None, mode="derandomized", max_iters=5000):
    """Best simplex over all anchors, each solved as a subdeterminant problem.

    Anchors whose reduced matrix has rank below ``j`` are skipped; if all are,
    the points are degenerate and the reported volume is 0.
    """
    best = None
    for anchor, sub in enumerate(mvs_reduce(inst)):
        try:
            sel = msd_approx(sub, target_alpha, seed, mode, max_iters)
        except RankDeficient:
            continue
        if best is None or sel.logdet > best[1].logdet:
            best = (anchor, sel, sub)
    if best is None:
        return MvsResult(tuple(range(inst.j + 1)), 0.0, mode, degenerate=True)
    anchor, sel, sub = best
    vertices = tuple(sorted([anchor] + [sub.labels[i] for i in sel.indices]))
    return MvsResult(vertices, _volume(sel.logdet, inst.j), mode,
                     certificate_alpha=sel.certificate_alpha, anchor=anchor)


def mvs_oracle(inst, budget=DEFAULT_BUDGET):
    """Exact maximum volume simplex by enumerating all ``(j+1)``-subsets of points."""
    P = inst.points
    n, j = P.shape[1], inst.j
    _check_budget(n, j + 1, budget)
    best_val, best_set = NEG_INF, tuple(range(j + 1))
    for block in _chunks(n, j + 1):
        E = P[:, block[:, 1:]] - P[:, block[:, :1]]  # (d, m, j)
        E = np.transpose(E, (1, 0, 2))
        vals = _batched_logdets(np.transpose(E, (0, 2, 1)) @ E)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best_set = vals[i], tuple(int(x) for x in block[i])
    return MvsResult(best_set, _volume(best_val, j), "oracle", degenerate=bool(best_val == NEG_INF))


def detlb2_sweep(A, target_alpha=0.05, seed=None, mode="derandomized", max_iters=5000):
    """Approximate ``max_j sqrt(j) det((A^T A)[S, S])^(1/2j)`` one ``j`` at a time.

    A ``j`` whose pipeline fails is recorded in ``skipped`` rather than aborting.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or not np.any(A):
        raise InvalidInput("A must be a nonzero matrix")
    M = A.T @ A
    rank = cholesky_psd(M).shape[0]
    result = Detlb2Result(best_j=None, value=0.0)
    for j in range(1, rank + 1):
        try:
            sel = msd_approx(MsdInstance(M, j), target_alpha, seed, mode, max_iters)
        except (RankDeficient, BudgetExceeded, IterationBudgetExceeded) as exc:
            result.skipped[j] = str(exc)
            continue
        value = sqrt(j) * exp(sel.logdet / (2 * j)) if sel.logdet != NEG_INF else 0.0
        result.values[j] = value
        if result.best_j is None or value > result.value * (1 + 1e-12):
            result.best_j, result.value = j, value
    return result

