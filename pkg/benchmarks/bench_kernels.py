"""Compare the steering-accumulation kernel backends.

The kernel computes out[r, c] = sum_k coeffs[k] * exp(1j*row_rates[k]*r)
* exp(1j*col_rates[k]*c) — the inner loop of every channel synthesis call.
This script times each available backend (compiled and pure numpy) on a few
representative shapes and reports the speedup, after first checking that the
backends agree to near machine precision. Everything downstream of this
kernel (pooling, perceptron training) is plain BLAS-backed numpy and is not
affected by the backend choice.

Usage: python3 benchmarks/bench_kernels.py [--repeats 5] [--seed 0]
"""

import argparse
import time

import numpy as np

from risblock.kernels import active_backend, available_backends

# (n_paths, n_rows, n_cols): surface-sized rows with a handful of paths is
# the shape the dataset generator spends its time on
CASES = [
    (5, 1_000, 1),
    (5, 8_000, 1),
    (5, 8_000, 4),
    (15, 2_000, 2),
]


def make_instance(n_paths, rng):
    coeffs = rng.normal(size=n_paths) + 1j * rng.normal(size=n_paths)
    row_rates = rng.uniform(-np.pi, np.pi, size=n_paths)
    col_rates = rng.uniform(-np.pi, np.pi, size=n_paths)
    return coeffs, row_rates, col_rates


def best_time(fn, args, repeats):
    """Best-of-N wall time for one call, with an inner loop sized so each
    measurement lasts at least ~10 ms."""
    inner = 1
    while True:
        start = time.perf_counter()
        for _ in range(inner):
            fn(*args)
        elapsed = time.perf_counter() - start
        if elapsed >= 0.01:
            break
        inner *= 4
    best = elapsed / inner
    for _ in range(repeats - 1):
        start = time.perf_counter()
        for _ in range(inner):
            fn(*args)
        best = min(best, (time.perf_counter() - start) / inner)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="best-of-N repetitions per case (default 5)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = available_backends()
    rng = np.random.default_rng(args.seed)
    print(f"active backend: {active_backend()}; "
          f"available: {', '.join(sorted(backends))}")

    # cross-backend agreement before timing anything
    if len(backends) > 1:
        coeffs, rows, cols = make_instance(8, rng)
        outputs = {name: fn(coeffs, rows, cols, 512, 3)
                   for name, fn in backends.items()}
        names = sorted(outputs)
        worst = max(np.max(np.abs(outputs[a] - outputs[b]))
                    for a in names for b in names)
        print(f"max cross-backend deviation: {worst:.3e}")

    header = f"{'case':>18}" + "".join(f"{name:>14}" for name in sorted(backends))
    if len(backends) > 1:
        header += f"{'speedup':>10}"
    print(header)
    for n_paths, n_rows, n_cols in CASES:
        instance = make_instance(n_paths, rng)
        args_k = (*instance, n_rows, n_cols)
        times = {name: best_time(fn, args_k, args.repeats)
                 for name, fn in backends.items()}
        label = f"K={n_paths} {n_rows}x{n_cols}"
        row = f"{label:>18}"
        for name in sorted(times):
            row += f"{times[name] * 1e6:>12.1f}us"
        if len(times) > 1:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
