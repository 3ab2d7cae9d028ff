"""Compiled vs numpy spectrum kernels.

    python benchmarks/bench_kernels.py [--repeat 3]

Prints the best-of-N wall time of each kernel on a few problem shapes and
the largest relative difference between the two backends.
"""
import argparse
import time

import numpy as np

from ewspec import _fallback, kernels

try:
    from ewspec import _kernels
except ImportError:
    _kernels = None

# (time samples M, Gram rank R, frequencies P)
GRAM_SHAPES = [(2000, 1, 2001), (2000, 4, 2001), (4000, 16, 2001), (8000, 40, 2001)]
DENSE_SHAPES = [(400, 401), (1000, 401)]


def best(func, *args, repeat=3):
    times = []
    out = None
    for _ in range(repeat):
        start = time.perf_counter()
        out = func(*args)
        times.append(time.perf_counter() - start)
    return min(times), out


def problem(M, R, P, rng):
    F = rng.standard_normal((M, R)) + 1j * rng.standard_normal((M, R))
    h = 0.05
    weights = h * np.exp(0.01 * h * (np.arange(M) - M))
    nus = np.linspace(-1.0, 1.0, P)
    return F, weights, nus, h


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"default backend: {kernels.BACKEND}")
    if _kernels is None:
        print("compiled extension not built; only the numpy timings are shown")
    print(f"{'kernel':<12}{'shape':>20}{'numpy s':>11}{'compiled s':>12}{'speedup':>9}{'rel diff':>11}")
    for M, R, P in GRAM_SHAPES:
        F, w, nus, h = problem(M, R, P, rng)
        t_py, ref = best(_fallback.gram_spectrum, F, w, nus, h, repeat=args.repeat)
        row = f"{'gram':<12}{f'M={M} R={R} P={P}':>20}{t_py:>11.4f}"
        if _kernels is not None:
            t_c, out = best(_kernels.gram_spectrum, F, w, nus, h, repeat=args.repeat)
            diff = np.abs(out - ref).max() / np.abs(ref).max()
            row += f"{t_c:>12.4f}{t_py / t_c:>9.2f}{diff:>11.2e}"
        print(row)
    for M, P in DENSE_SHAPES:
        F, w, nus, h = problem(M, 3, P, rng)
        G = F.conj() @ F.T
        t_py, ref = best(_fallback.double_sum_spectrum, G, w, nus, h, repeat=args.repeat)
        row = f"{'double_sum':<12}{f'M={M} P={P}':>20}{t_py:>11.4f}"
        if _kernels is not None:
            t_c, out = best(_kernels.double_sum_spectrum, G, w, nus, h, repeat=args.repeat)
            diff = np.abs(out - ref).max() / np.abs(ref).max()
            row += f"{t_c:>12.4f}{t_py / t_c:>9.2f}{diff:>11.2e}"
        print(row)


if __name__ == "__main__":
    main()
