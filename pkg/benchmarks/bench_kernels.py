"""Time the compiled kernels against the numpy fallback.

Usage: ``python3 benchmarks/bench_kernels.py [--repeat R] [--p P]``.
Prints one line per kernel with the median time of each backend and the
speedup. Both backends are checked to agree before timing.
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from ggmlearn import _kernels_py as py_impl

try:
    from ggmlearn import _kernels as c_impl
except ImportError:
    c_impl = None


def _problem(p: int, m: int, rng: np.random.Generator):
    x = rng.standard_normal((m, p + 1))
    x[:, 1:] += 0.5 * x[:, :1]
    g = x.T @ x / m
    return g, g[:, 0].copy(), float(g[0, 0]), np.arange(1, p + 1, dtype=np.int64)


def _median_time(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def cases(p: int, rng: np.random.Generator) -> dict:
    g, b, yy, cand = _problem(p, 4 * p, rng)
    gs, bs, yys, cs = _problem(min(p, 20), 200, rng)
    order, _ = py_impl.omp_gram(g, b, yy, cand, p // 2)
    v = rng.standard_normal(50 * p)
    return {
        "project_l1_ball": lambda impl: impl.project_l1_ball(v, 3.0),
        "omp_gram": lambda impl: impl.omp_gram(g, b, yy, cand, p // 2)[0],
        "prune_gram": lambda impl: impl.prune_gram(g, b, yy, order, 1e-3 * yy, 4.0 * p),
        "best_subsets(k<=3)": lambda impl: impl.best_subsets(gs, bs, yys, cs, 3)[1],
        "l1_ls_gram": lambda impl: impl.l1_ls_gram(g, b, 2.0, 0, 1e-8, yy, 100000, None)[0],
    }


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=7)
    ap.add_argument("--p", type=int, default=60)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if c_impl is None:
        print("compiled extension not built; run: pip install -e . --no-build-isolation")
        return
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':22s} {'numpy [ms]':>12s} {'compiled [ms]':>14s} {'speedup':>8s}")
    for name, run in cases(args.p, rng).items():
        ref, out = run(py_impl), run(c_impl)
        if isinstance(ref, tuple) or isinstance(ref, list):
            ref, out = np.asarray(ref[0] if isinstance(ref, tuple) else ref), np.asarray(out)
        if not np.allclose(np.asarray(ref, dtype=float), np.asarray(out, dtype=float), atol=1e-6):
            raise SystemExit(f"{name}: backends disagree")
        t_py = _median_time(lambda: run(py_impl), args.repeat)
        t_c = _median_time(lambda: run(c_impl), args.repeat)
        print(f"{name:22s} {1e3 * t_py:12.3f} {1e3 * t_c:14.3f} {t_py / t_c:8.1f}x")


if __name__ == "__main__":
    main()
