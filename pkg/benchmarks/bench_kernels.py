#!/usr/bin/env python3
"""Benchmark the jit-compiled kernels against the pure-numpy fallbacks.

Both implementations are importable side by side, so this script times them
in one process regardless of the HEISGEO_PURE_NUMPY setting.  Typical output
on a laptop shows the RK4 flow ~100-1000x faster under numba and the
shortest-vector enumeration ~10-100x faster.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from heisgeo import _kernels
from heisgeo.linalg import _lll_reduce


def timeit(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_rk4(repeats):
    rng = np.random.default_rng(0)
    n = 3
    d = np.sort(rng.uniform(0.5, 3.0, size=n))
    ph = rng.normal(size=2 * n)
    ph /= np.linalg.norm(ph)
    args = (ph, 0.7, 0.9, d, 5.0, 20_000)

    if _kernels.USING_NUMBA:
        _kernels.rk4_flow_numba(*args)  # compile outside the timed region
        t_jit = timeit(lambda: _kernels.rk4_flow_numba(*args), repeats)
    else:
        t_jit = None
    t_np = timeit(lambda: _kernels.rk4_flow_pure(*args), max(1, repeats // 2))

    u1, z1, _ = (_kernels.rk4_flow_numba if _kernels.USING_NUMBA else _kernels.rk4_flow_pure)(*args)
    u2, z2, _ = _kernels.rk4_flow_pure(*args)
    drift = max(np.max(np.abs(u1 - u2)), abs(z1 - z2))
    report("rk4_flow (20k steps, n=3)", t_jit, t_np, drift)


def bench_svp(repeats):
    rng = np.random.default_rng(1)
    mats = []
    for _ in range(20):
        B = rng.uniform(-4, 4, size=(6, 6))
        G = B.T @ B + 0.1 * np.eye(6)
        Gr, U = _lll_reduce(G)
        R = np.linalg.cholesky(Gr).T
        mats.append((R, U.astype(np.float64), float(np.min(np.diag(Gr)))))

    def run(fn):
        out = 0.0
        for R, U, c0 in mats:
            norm2, _ = fn(R, U, c0)
            out += norm2
        return out

    if _kernels.USING_NUMBA:
        run(_kernels.svp_enumerate_numba)
        t_jit = timeit(lambda: run(_kernels.svp_enumerate_numba), repeats)
    else:
        t_jit = None
    t_np = timeit(lambda: run(_kernels.svp_enumerate_pure), max(1, repeats // 2))

    a = run(_kernels.svp_enumerate_numba) if _kernels.USING_NUMBA else None
    b = run(_kernels.svp_enumerate_pure)
    drift = 0.0 if a is None else abs(a - b)
    report("svp_enumerate (20 grams, m=6)", t_jit, t_np, drift)


def report(name, t_jit, t_np, drift):
    if t_jit is None:
        print(f"{name:34s}  numba: unavailable     numpy: {t_np * 1e3:9.2f} ms")
    else:
        print(
            f"{name:34s}  numba: {t_jit * 1e3:9.2f} ms  numpy: {t_np * 1e3:9.2f} ms"
            f"  speedup: {t_np / t_jit:7.1f}x  |diff|: {drift:.2e}"
        )


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    print(f"backend selected by env: {'numba' if _kernels.USING_NUMBA else 'pure numpy'}")
    bench_rk4(args.repeats)
    bench_svp(args.repeats)


if __name__ == "__main__":
    main()
