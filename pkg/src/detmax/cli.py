"""Command-line front end: ``detmax {solve,oracle,gen,bench}``.

Exit codes: 0 success, 1 runtime error, 2 usage error.  Set ``DETMAX_LOG`` to a
logging level name (e.g. ``INFO``, ``DEBUG``) for progress output on stderr.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from math import exp, sqrt
from pathlib import Path

import numpy as np

from .errors import DetmaxError
from .io import InstanceFile, dumps, fmt, read_instance, record
from .linalg import NEG_INF, cholesky_psd
from .problems import (
    DEFAULT_BUDGET,
    MsdInstance,
    MvsInstance,
    detlb2_sweep,
    msd_approx,
    msd_oracle,
    mvs_approx,
    mvs_oracle,
)
from .rounding import log_guarantee_factor

log_ = logging.getLogger("detmax")

REPORT_KEYS = """\
report keys (one record per line, key=value, '-' for missing):
  msd:    instance problem j method indices logdet det alpha floor iterations
          [oracle ratio] time
  mvs:    instance problem j method indices volume degenerate alpha floor
          [oracle ratio] time
  detlb2: instance problem best_j value values skipped time
  bench:  n d j instances mean_ratio min_ratio min_floor violations
          max_alpha mean_iterations failures [seconds]
indices are 1-based; floor is the certified ratio (j!/j^j) exp(-alpha)
(square-rooted for mvs volumes); ratio is achieved / oracle."""


def _ratio(log_achieved, log_oracle):
    if log_oracle == NEG_INF:
        return None
    return exp(log_achieved - log_oracle) if log_achieved != NEG_INF else 0.0


def _load(path):
    inst = read_instance(path)
    return inst, inst.name or Path(path).stem


def _msd_matrix(inst):
    if inst.kind == "psd-matrix":
        return inst.payload
    return inst.payload.T @ inst.payload


def _solve_msd(args, inst, name, t0):
    problem = MsdInstance(_msd_matrix(inst), args.j)
    sel = msd_approx(problem, args.alpha, args.seed, args.mode, args.max_iters)
    fields = {
        "instance": name, "problem": "msd", "j": args.j, "method": sel.method,
        "indices": sel.one_based(), "logdet": sel.logdet, "det": sel.det,
        "alpha": sel.certificate_alpha,
        "floor": exp(log_guarantee_factor(args.j, sel.certificate_alpha)),
        "iterations": sel.iterations,
    }
    if args.oracle:
        ref = msd_oracle(problem, args.budget)
        fields["oracle"] = ref.det
        fields["ratio"] = _ratio(sel.logdet, ref.logdet)
    fields["time"] = time.perf_counter() - t0
    return fields


def _solve_mvs(args, inst, name, t0):
    problem = MvsInstance(inst.payload, args.j)
    res = mvs_approx(problem, args.alpha, args.seed, args.mode, args.max_iters)
    alpha = res.certificate_alpha
    fields = {
        "instance": name, "problem": "mvs", "j": args.j, "method": res.method,
        "indices": [i + 1 for i in res.vertices], "volume": res.volume,
        "degenerate": res.degenerate, "alpha": alpha,
        "floor": sqrt(exp(log_guarantee_factor(args.j, alpha))) if alpha is not None else None,
    }
    if args.oracle:
        ref = mvs_oracle(problem, args.budget)
        fields["oracle"] = ref.volume
        fields["ratio"] = res.volume / ref.volume if ref.volume > 0 else None
    fields["time"] = time.perf_counter() - t0
    return fields


def _solve_detlb2(args, inst, name, t0):
    A = inst.payload if inst.kind != "psd-matrix" else cholesky_psd(inst.payload)
    res = detlb2_sweep(A, args.alpha, args.seed, args.mode, args.max_iters)
    return {
        "instance": name, "problem": "detlb2", "best_j": res.best_j, "value": res.value,
        "values": [f"{j}:{fmt(v)}" for j, v in res.values.items()],
        "skipped": list(res.skipped),
        "time": time.perf_counter() - t0,
    }


def _emit(line, output):
    print(line)
    if output:
        with open(output, "w") as fh:
            fh.write(line + "\n")


def cmd_solve(args):
    t0 = time.perf_counter()
    inst, name = _load(args.input)
    handler = {"msd": _solve_msd, "mvs": _solve_mvs, "detlb2": _solve_detlb2}[args.problem]
    _emit(record(handler(args, inst, name, t0)), args.output)
    return 0


def cmd_oracle(args):
    t0 = time.perf_counter()
    inst, name = _load(args.input)
    if args.problem == "msd":
        sel = msd_oracle(MsdInstance(_msd_matrix(inst), args.j), args.budget)
        fields = {"instance": name, "problem": "msd", "j": args.j, "method": "oracle",
                  "indices": sel.one_based(), "logdet": sel.logdet, "det": sel.det}
    else:
        res = mvs_oracle(MvsInstance(inst.payload, args.j), args.budget)
        fields = {"instance": name, "problem": "mvs", "j": args.j, "method": "oracle",
                  "indices": [i + 1 for i in res.vertices], "volume": res.volume,
                  "degenerate": res.degenerate}
    fields["time"] = time.perf_counter() - t0
    _emit(record(fields), args.output)
    return 0


def generate(kind, n, d, seed=0, j=None):
    """Synthetic instance generators; deterministic given ``seed``."""
    rng = np.random.default_rng(seed)
    if kind == "gaussian":
        return InstanceFile("points", rng.standard_normal((d, n)), f"gaussian-n{n}-d{d}", seed)
    if kind == "correlated":
        mix = rng.standard_normal((d, d))
        return InstanceFile("points", mix @ rng.standard_normal((d, n)), f"correlated-n{n}-d{d}", seed)
    if kind == "near-degenerate":
        if j is None or not 2 <= j <= d:
            raise DetmaxError("near-degenerate instances need 2 <= --j <= d")
        basis, _ = np.linalg.qr(rng.standard_normal((d, j - 1)))
        pts = basis @ rng.standard_normal((j - 1, n)) + 1e-6 * rng.standard_normal((d, n))
        return InstanceFile("points", pts, f"near-degenerate-n{n}-d{d}-j{j}", seed)
    if kind == "psd":
        B = rng.standard_normal((d, n))
        return InstanceFile("psd-matrix", B.T @ B, f"psd-n{n}-d{d}", seed)
    raise DetmaxError(f"unknown generator kind {kind!r}")


def cmd_gen(args):
    text = dumps(generate(args.kind, args.n, args.d, args.seed, args.j))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def bench_cell(n, d, j, count, seed, alpha, max_iters, mode, budget):
    """Run one grid cell; every instance is compared against the exact oracle."""
    t0 = time.perf_counter()
    rng = np.random.default_rng([seed, n, d, j])
    ratios, floors, alphas, iters = [], [], [], []
    violations = failures = 0
    for _ in range(count):
        B = rng.standard_normal((d, n))
        inst = MsdInstance(B.T @ B, j)
        try:
            sel = msd_approx(inst, alpha, int(rng.integers(2**63)), mode, max_iters)
            ref = msd_oracle(inst, budget)
        except DetmaxError as exc:
            log_.warning("cell n=%d d=%d j=%d: %s", n, d, j, exc)
            failures += 1
            continue
        ratio = _ratio(sel.logdet, ref.logdet)
        floor_ = exp(log_guarantee_factor(j, sel.certificate_alpha))
        if ratio is None:
            failures += 1
            continue
        ratios.append(ratio)
        floors.append(floor_)
        alphas.append(sel.certificate_alpha)
        iters.append(sel.iterations)
        if mode == "derandomized" and ratio < floor_ * (1 - 1e-8):
            violations += 1
    return {
        "n": n, "d": d, "j": j, "instances": len(ratios),
        "mean_ratio": float(np.mean(ratios)) if ratios else None,
        "min_ratio": min(ratios) if ratios else None,
        "min_floor": min(floors) if floors else None,
        "violations": violations,
        "max_alpha": max(alphas) if alphas else None,
        "mean_iterations": float(np.mean(iters)) if iters else None,
        "failures": failures,
        "seconds": time.perf_counter() - t0,
    }


def _bench_cell_star(cfg):
    return bench_cell(*cfg)


def run_bench(ns, ds, js, count, seed, alpha=0.05, max_iters=5000, mode="derandomized",
              budget=DEFAULT_BUDGET, workers=1):
    cells = [(n, d, j, count, seed, alpha, max_iters, mode, budget)
             for n in ns for d in ds for j in js if j <= d and j <= n]
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_bench_cell_star, cells))
    return [bench_cell(*c) for c in cells]


def _table(rows, timings):
    cols = ["n", "d", "j", "instances", "mean_ratio", "min_ratio", "min_floor",
            "violations", "max_alpha", "mean_iterations", "failures"]
    if timings:
        cols.append("seconds")

    def cell(v):
        if v is None:
            return "-"
        if isinstance(v, float):
            return f"{v:.6g}"
        return str(v)

    body = [[cell(r[c]) for c in cols] for r in rows]
    widths = [max([len(c)] + [len(b[i]) for b in body]) for i, c in enumerate(cols)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(b, widths)) for b in body]
    return "\n".join(lines) + "\n"


def cmd_bench(args):
    rows = run_bench(args.n, args.d, args.j, args.count, args.seed, args.alpha,
                     args.max_iters, args.mode, args.budget, args.workers)
    if not args.timings:
        for r in rows:
            r.pop("seconds")
    table = _table(rows, args.timings)
    records = "".join(record(r) + "\n" for r in rows)
    sys.stdout.write(table)
    if args.output_dir:
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "bench.txt").write_text(table)
        (out / "bench.kv").write_text(records)
    bad = sum(r["violations"] for r in rows)
    if bad:
        log_.error("%d guarantee violations", bad)
    return 1 if bad else 0


def _common(p, need_input=True):
    if need_input:
        p.add_argument("--input", required=True, metavar="PATH", help="instance file")
    p.add_argument("--j", type=int, help="subset size / simplex dimension")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                   help="maximum number of subsets the exact oracle may enumerate")
    p.add_argument("--output", metavar="PATH", help="also write the report here")


def _solver_flags(p):
    p.add_argument("--mode", choices=["sampled", "derandomized"], default="derandomized")
    p.add_argument("--alpha", type=float, default=0.05, help="target certified gap")
    p.add_argument("--max-iters", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="detmax", description=__doc__,
        epilog=REPORT_KEYS, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="approximate j-MSD, j-MVS or detlb2",
                       epilog=REPORT_KEYS, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--problem", choices=["msd", "mvs", "detlb2"], default="msd")
    _common(p)
    _solver_flags(p)
    p.add_argument("--oracle", action="store_true", help="also run the exact oracle and report the ratio")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="exact j-MSD or j-MVS by enumeration",
                       epilog=REPORT_KEYS, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--problem", choices=["msd", "mvs"], default="msd")
    _common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen", help="write a synthetic instance file")
    p.add_argument("--kind", choices=["gaussian", "correlated", "near-degenerate", "psd"],
                   default="gaussian")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--j", type=int, help="subspace dimension + 1 for near-degenerate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", metavar="PATH")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="oracle comparison over an (n, d, j) grid",
                       epilog=REPORT_KEYS, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--n", type=int, nargs="*", default=[8, 10])
    p.add_argument("--d", type=int, nargs="*", default=[4, 5])
    p.add_argument("--j", type=int, nargs="*", default=[2, 3])
    p.add_argument("--count", type=int, default=20, help="instances per cell")
    _solver_flags(p)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timings", action="store_true",
                   help="include wall-clock seconds (makes reports non-reproducible)")
    p.add_argument("--output-dir", metavar="DIR", help="write bench.txt and bench.kv here")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    logging.basicConfig(level=os.environ.get("DETMAX_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("solve", "oracle") and args.j is None and args.problem != "detlb2":
        parser.error(f"--j is required for --problem {args.problem}")
    for name in ("j", "n", "d", "count", "max_iters", "budget", "workers"):
        v = getattr(args, name, None)
        if isinstance(v, int) and v < 1:
            parser.error(f"--{name.replace('_', '-')} must be positive")
    if getattr(args, "alpha", 1.0) <= 0:
        parser.error("--alpha must be positive")
    try:
        return args.func(args)
    except DetmaxError as exc:
        print(f"detmax: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
