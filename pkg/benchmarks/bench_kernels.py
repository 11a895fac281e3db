"""Throughput comparison of the numba kernels against the numpy fallback.

Run from the repository root::

    python benchmarks/bench_kernels.py

The numba path is compiled on first use; a warm-up call is excluded from
the timings. Set REACH_BACKEND=numpy before importing to check what the
package would do without numba (this script always times both paths
directly).
"""

import time

import numpy as np

from reachtune import kernels


def timeit(fn, *args, repeat=5):
    fn(*args)                      # warm-up (and JIT compile)
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_interval_matmul():
    print("interval matrix product (exact endpoint enumeration)")
    print(f"{'n':>5} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>9}")
    rng = np.random.default_rng(0)
    for n in (5, 10, 20, 40, 80):
        lo1 = rng.uniform(-2, 0, size=(n, n))
        hi1 = lo1 + rng.uniform(0, 2, size=(n, n))
        lo2 = rng.uniform(-1, 1, size=(n, n))
        hi2 = lo2 + rng.uniform(0, 1, size=(n, n))
        t_np = timeit(kernels._interval_matmul_numpy, lo1, hi1, lo2, hi2)
        if kernels._HAVE_NUMBA:
            t_nb = timeit(kernels._interval_matmul_fast, lo1, hi1, lo2, hi2)
            print(f"{n:>5} {t_np * 1e3:>12.3f} {t_nb * 1e3:>12.3f} "
                  f"{t_np / t_nb:>8.1f}x")
        else:
            print(f"{n:>5} {t_np * 1e3:>12.3f} {'-':>12} {'-':>9}")


def bench_rk4():
    print()
    print("batched RK4 with piecewise-constant inputs "
          "(100 trajectories, 10 pieces)")
    print(f"{'n':>3} {'steps':>7} {'numpy [ms]':>12} {'numba [ms]':>12} "
          f"{'speedup':>9}")
    rng = np.random.default_rng(1)
    for n, steps_per_piece in ((2, 500), (4, 500), (10, 200)):
        a_t = np.ascontiguousarray(rng.uniform(-1, 1, size=(n, n)).T)
        states = rng.uniform(9, 11, size=(100, n))
        inputs = rng.uniform(0.9, 1.1, size=(10, 100, n))
        total = 10 * steps_per_piece + 1
        out = np.empty((total, 100, n))
        h = 3.0 / (10 * steps_per_piece)
        t_np = timeit(kernels._rk4_piecewise_numpy, a_t, states, inputs,
                      steps_per_piece, h, out, repeat=3)
        if kernels._HAVE_NUMBA:
            t_nb = timeit(kernels._rk4_piecewise_fast, a_t, states, inputs,
                          steps_per_piece, h, out, repeat=3)
            print(f"{n:>3} {total - 1:>7} {t_np * 1e3:>12.1f} "
                  f"{t_nb * 1e3:>12.1f} {t_np / t_nb:>8.1f}x")
        else:
            print(f"{n:>3} {total - 1:>7} {t_np * 1e3:>12.1f} "
                  f"{'-':>12} {'-':>9}")


if __name__ == "__main__":
    print(f"active backend: {kernels.active_backend()}")
    if not kernels._HAVE_NUMBA:
        print("numba unavailable or disabled; timing the numpy path only")
    print()
    bench_interval_matmul()
    bench_rk4()
