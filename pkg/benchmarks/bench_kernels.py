"""Benchmark the compiled energy/gradient kernel against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeats 50]

Times energy_norm_gradient on representative problem sizes (N polarons x
M modes) for both backends and prints the speedup, plus a cross-check that
the two agree to near machine precision.
"""

import argparse
import time

import numpy as np

from polaron._kernels_py import energy_norm_gradient as py_kernel

try:
    from polaron._kernels_cy import energy_norm_gradient as cy_kernel
except ImportError:
    cy_kernel = None

SIZES = [(1, 64), (2, 128), (4, 263), (6, 263), (8, 485)]


def make_case(rng, n, m):
    omega = np.sort(rng.uniform(1e-4, 1.0, m))[::-1].copy()
    g = rng.uniform(1e-3, 0.5, m)
    c = rng.uniform(0.1, 1.0, n)
    f = 0.2 * rng.standard_normal((n, m))
    return 0.01, omega, g, c, f


def time_kernel(kernel, case, repeats):
    kernel(*case)  # warm up
    start = time.perf_counter()
    for _ in range(repeats):
        kernel(*case)
    return (time.perf_counter() - start) / repeats


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=50)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    print(f"{'N':>3} {'M':>5} {'python':>12} {'cython':>12} {'speedup':>8}  max|diff|")
    for n, m in SIZES:
        case = make_case(rng, n, m)
        t_py = time_kernel(py_kernel, case, args.repeats)
        if cy_kernel is None:
            print(f"{n:>3} {m:>5} {t_py*1e6:>10.1f}us {'n/a':>12}")
            continue
        t_cy = time_kernel(cy_kernel, case, args.repeats)
        ref, got = py_kernel(*case), cy_kernel(*case)
        diff = max(
            abs(ref[0] - got[0]),
            abs(ref[1] - got[1]),
            float(np.max(np.abs(ref[2] - got[2]))),
            float(np.max(np.abs(ref[3] - got[3]))),
        )
        print(
            f"{n:>3} {m:>5} {t_py*1e6:>10.1f}us {t_cy*1e6:>10.1f}us "
            f"{t_py/t_cy:>7.1f}x  {diff:.1e}"
        )


if __name__ == "__main__":
    main()
