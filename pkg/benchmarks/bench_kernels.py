#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the Fourier metric norms, the closed-form scale root, and the Newton
rescaling solve on a large random batch, for every available backend.

    python3 benchmarks/bench_kernels.py --n 1000000 --rank 3 --repeats 5
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from flipq import kernels


def make_inputs(n: int, rank: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    ap = rng.uniform(0.01, 2.0, n)
    app = rng.uniform(0.01, 2.0, n)
    c = rng.uniform(-0.5, 0.5, n)
    thetas = rng.uniform(0.0, 2.0 * np.pi, n)
    y = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    eye = np.eye(rank, dtype=complex)
    ns = np.array([0.0, 1.0])
    cos_m = np.stack([2.0 * eye, eye])
    sin_m = np.stack([0.0 * eye, 0.3 * eye])
    return ap, app, c, thetas, y, ns, cos_m, sin_m


def best_of(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=1_000_000)
    parser.add_argument("--rank", type=int, default=3)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    ap, app, c, thetas, y, ns, cos_m, sin_m = make_inputs(args.n, args.rank)
    seed = np.full(args.n, 1.0)  # force real Newton iterations, not the closed-form seed

    cases = {
        "fourier_norm_sq": lambda: kernels.fourier_norm_sq(thetas, y, ns, cos_m, sin_m),
        "scale_root": lambda: kernels.scale_root(ap, app, c),
        "newton_rescale": lambda: kernels.newton_rescale(ap, app, c, seed=seed),
    }

    results: dict[str, dict[str, float]] = {name: {} for name in cases}
    for backend in kernels.available_backends():
        kernels.set_backend(backend)
        for name, fn in cases.items():
            fn()  # warm-up (JIT compile on the numba path)
            results[name][backend] = best_of(fn, args.repeats)

    print(f"n = {args.n}, rank = {args.rank}, best of {args.repeats}")
    header = f"{'kernel':<18}" + "".join(f"{b:>12}" for b in kernels.available_backends())
    if "numba" in kernels.available_backends():
        header += f"{'speedup':>10}"
    print(header)
    for name, timings in results.items():
        line = f"{name:<18}" + "".join(f"{timings[b] * 1e3:>10.1f}ms" for b in timings)
        if "numba" in timings:
            line += f"{timings['numpy'] / timings['numba']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
