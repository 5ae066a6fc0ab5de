#!/usr/bin/env python3
"""Benchmark the compiled measurement kernels against the NumPy fallback.

Times raw forward/adjoint applications at several problem sizes and one
full solver run per backend, and verifies that both backends agree
bit-for-bit on every timed instance.

Usage: python benchmarks/benchmark_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

import cassirecon.kernels as kernels
from cassirecon import _kernels_np
from cassirecon.amp import AmpConfig, run_amp
from cassirecon.metrics import add_noise
from cassirecon.operator import CassiModel, DispersionWeights, forward_apply, generate_apertures
from cassirecon.phantoms import phantom_cube

try:
    from cassirecon import _kernels as _kernels_cy
except ImportError:
    _kernels_cy = None

SIZES = [
    (32, 32, 8, 4),
    (64, 64, 16, 2),
    (128, 128, 24, 2),
    (256, 256, 24, 2),
]


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_raw(repeats):
    print(f"{'size':>18} {'op':>8} {'numpy':>10} {'cython':>10} {'speedup':>8}")
    rng = np.random.default_rng(0)
    for M, N, L, K in SIZES:
        masks = np.asfortranarray(rng.integers(0, 2, size=(M, N, K)).astype(np.float64))
        cube = np.asfortranarray(rng.standard_normal((M, N, L)))
        frames = np.asfortranarray(rng.standard_normal((M, N + L + 1, K)))
        w = (0.25, 0.5, 0.25)
        for op, args in (("forward", cube), ("adjoint", frames)):
            t_np = time_call(lambda: getattr(_kernels_np, op)(masks, *w, args), repeats)
            if _kernels_cy is None:
                print(f"{f'{M}x{N}x{L} K={K}':>18} {op:>8} {t_np * 1e3:9.2f}ms {'-':>10} {'-':>8}")
                continue
            t_cy = time_call(lambda: getattr(_kernels_cy, op)(masks, *w, args), repeats)
            same = np.array_equal(
                getattr(_kernels_cy, op)(masks, *w, args),
                getattr(_kernels_np, op)(masks, *w, args),
            )
            flag = "" if same else "  MISMATCH!"
            print(
                f"{f'{M}x{N}x{L} K={K}':>18} {op:>8} {t_np * 1e3:9.2f}ms "
                f"{t_cy * 1e3:9.2f}ms {t_np / t_cy:7.1f}x{flag}"
            )


def bench_solver():
    M, N, L, K, iters = 64, 64, 16, 2, 50
    cube = phantom_cube(M, N, L, "gaussian-blobs", seed=0)
    model = CassiModel(
        generate_apertures(M, N, K, "complementary", seed=1),
        DispersionWeights(0.25, 0.5, 0.25),
        bands=L,
    )
    g, _ = add_noise(forward_apply(model, cube.values), 20.0, seed=2)
    config = AmpConfig(alpha=0.2, max_iter=iters)

    backends = [("numpy", _kernels_np)]
    if _kernels_cy is not None:
        backends.append(("cython", _kernels_cy))

    print(f"\nfull solver, {M}x{N}x{L} K={K}, {iters} iterations:")
    results = {}
    saved = (kernels.forward, kernels.adjoint)
    try:
        for name, impl in backends:
            kernels.forward, kernels.adjoint = impl.forward, impl.adjoint
            start = time.perf_counter()
            f_hat, _ = run_amp(g, model, config)
            elapsed = time.perf_counter() - start
            results[name] = f_hat
            print(f"  {name:>7}: {elapsed:6.2f}s")
    finally:
        kernels.forward, kernels.adjoint = saved
    if len(results) == 2:
        same = np.array_equal(results["numpy"], results["cython"])
        print(f"  reconstructions bit-identical: {same}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    if _kernels_cy is None:
        print("compiled kernels not available; timing the NumPy fallback only\n")
    bench_raw(args.repeats)
    bench_solver()


if __name__ == "__main__":
    main()
