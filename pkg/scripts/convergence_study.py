"""Certified gap against iteration count for the design solver.

For each (n, d, j) in a small grid, solves random Gaussian instances with a
certificate at every iteration and prints how many iterations were needed to
reach each target gap.  With --plain the away steps are switched off, which
shows how much they matter.
"""
import argparse
import time

import numpy as np

from detmax.design import solve_design
from detmax.errors import IterationBudgetExceeded

TARGETS = (1.0, 0.1, 0.05, 0.01)


def first_hit(certs, target):
    for it, cert in certs:
        if cert.alpha <= target:
            return it
    return None


def run(n, d, j, reps, seed, away, max_iters):
    rng = np.random.default_rng([seed, n, d, j])
    hits = {t: [] for t in TARGETS}
    t0 = time.perf_counter()
    for _ in range(reps):
        V = rng.standard_normal((d, n))
        try:
            res = solve_design(V, j, target_alpha=min(TARGETS), max_iters=max_iters,
                               certify_every=1, away_steps=away)
        except IterationBudgetExceeded as exc:
            res = exc.result
        for t in TARGETS:
            hits[t].append(first_hit(res.certificates, t))
    return hits, time.perf_counter() - t0


def fmt(xs):
    done = [x for x in xs if x is not None]
    if not done:
        return "-"
    miss = len(xs) - len(done)
    s = f"{int(np.median(done))}/{max(done)}"
    return s + (f" ({miss} miss)" if miss else "")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-iters", type=int, default=5000)
    ap.add_argument("--plain", action="store_true", help="disable away steps")
    a = ap.parse_args()

    grid = [(20, 5, 2), (20, 5, 5), (50, 10, 3), (50, 10, 10)]
    print("n   d   j   " + "  ".join(f"a<={t:<5} med/max" for t in TARGETS) + "   secs")
    for n, d, j in grid:
        hits, secs = run(n, d, j, a.reps, a.seed, not a.plain, a.max_iters)
        cols = "  ".join(f"{fmt(hits[t]):>17}" for t in TARGETS)
        print(f"{n:<3} {d:<3} {j:<3} {cols}   {secs:.2f}")
