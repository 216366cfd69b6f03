"""Benchmark the numba kernels against their pure-numpy fallbacks.

Run with ``python benchmarks/bench_kernels.py``.  The JIT compile cost is
paid by a warm-up call and excluded from the timings.
"""

import time

import numpy as np

from ghnpost import _kernels

QR_SIZES = [(147, 64), (576, 256), (2048, 512)]
JACOBI_SIZES = [32, 128, 256]
REPEATS = 5


def best_of(fn, *args, repeats=REPEATS):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def bench(name, impls, inputs):
    print(f"\n{name}")
    print(f"{'size':>12} " + " ".join(f"{label:>12}" for label, _ in impls) + f" {'speedup':>9}")
    for args in inputs:
        size = "x".join(str(a.shape[0]) if a.ndim == 1 else f"{a.shape[0]}x{a.shape[1]}" for a in args)
        row = []
        for _, fn in impls:
            row.append(best_of(fn, *args))
        speedup = row[1] / row[0] if len(row) == 2 and row[0] > 0 else float("nan")
        print(f"{size:>12} " + " ".join(f"{t * 1e3:>10.2f}ms" for t in row) + f" {speedup:>8.2f}x")


def main():
    rng = np.random.default_rng(0)
    if _kernels.householder_qr_jit is None:
        print("numba unavailable or disabled (GHNPOST_NO_NUMBA); timing numpy path only")
        qr_impls = [("numpy", _kernels.householder_qr_numpy)]
        eig_impls = [("numpy", _kernels.jacobi_eigh_numpy)]
    else:
        # warm-up triggers JIT compilation
        _kernels.householder_qr_jit(np.eye(4))
        _kernels.jacobi_eigh_jit(np.eye(4))
        qr_impls = [
            ("numba", _kernels.householder_qr_jit),
            ("numpy", _kernels.householder_qr_numpy),
        ]
        eig_impls = [
            ("numba", _kernels.jacobi_eigh_jit),
            ("numpy", _kernels.jacobi_eigh_numpy),
        ]

    qr_inputs = [(rng.normal(size=(m, n)),) for m, n in QR_SIZES]
    bench("Householder QR (thin)", qr_impls, qr_inputs)

    eig_inputs = []
    for n in JACOBI_SIZES:
        x = rng.normal(size=(4 * n, n))
        eig_inputs.append((x.T @ x / (4 * n),))
    bench("Jacobi symmetric eigendecomposition", eig_impls, eig_inputs)


if __name__ == "__main__":
    main()
