"""Timing comparison of the compiled kernels against the numpy fallbacks.

Run from the repo root:

    python3 benchmarks/bench_kernels.py [--repeat 5]

Covers the two hot paths: the resonant cubic contraction (dominates every
resonant-model step) and the pairwise interaction sum (the O(n^4)
verification route vs the FFT production route).  The compiled extension
must be importable for the compiled columns; otherwise only the numpy
numbers are shown.
"""

import argparse
import time

import numpy as np

from phnls import _kernels, _kernels_np
from phnls.state import make_grid
from phnls.tensor import compute_tensor


def best_of(repeat, fn, *args):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_contract(repeat):
    print("\ncubic contraction: points x levels -> points x levels")
    print(f"{'n_y':>5} {'n_h':>5} {'numpy':>12} {'compiled':>12} {'speedup':>9}")
    rng = np.random.default_rng(11)
    for n_y, n_h in ((32, 8), (32, 16), (64, 16), (64, 32)):
        grid = make_grid(n_y, 16.0, n_h)
        tensor = compute_tensor(n_h, grid.rule)
        c = (rng.standard_normal((n_y * n_y, n_h))
             + 1j * rng.standard_normal((n_y * n_y, n_h)))
        c = np.ascontiguousarray(c)
        blocks = tensor.np_blocks()
        t_np = best_of(repeat, _kernels_np.contract_cubic, c, blocks)
        if _kernels.HAVE_EXT:
            out = np.empty_like(c)
            t_ext = best_of(repeat, _kernels._ext.contract_cubic, c,
                            tensor.values, out)
            ratio = f"{t_np / t_ext:8.1f}x"
            ext_col = f"{t_ext * 1e3:10.2f}ms"
        else:
            ratio, ext_col = "     n/a", "       n/a"
        print(f"{n_y:>5} {n_h:>5} {t_np * 1e3:10.2f}ms {ext_col} {ratio}")


def bench_pairs(repeat):
    print("\npair interaction sum over the torus")
    print(f"{'n_y':>5} {'fft':>12} {'numpy O(n^4)':>14} "
          f"{'compiled O(n^4)':>16}")
    rng = np.random.default_rng(7)
    for n_y in (32, 64, 128):
        rho = np.abs(rng.standard_normal((n_y, n_y))) + 0.1
        j1 = rng.standard_normal((n_y, n_y))
        j2 = rng.standard_normal((n_y, n_y))
        t_fft = best_of(repeat, _kernels_np.morawetz_pairs, rho, j1, j2, 16.0)
        t_np = best_of(repeat, _kernels_np.morawetz_pairs_direct,
                       rho, j1, j2, 16.0)
        if _kernels.HAVE_EXT:
            t_ext = best_of(repeat, _kernels._ext.morawetz_pairs,
                            rho, j1, j2, 16.0)
            ext_col = f"{t_ext * 1e3:14.2f}ms"
        else:
            ext_col = "           n/a"
        print(f"{n_y:>5} {t_fft * 1e3:10.3f}ms {t_np * 1e3:12.2f}ms {ext_col}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5,
                    help="take the best of this many timings")
    args = ap.parse_args()
    print(f"compiled extension available: {_kernels.HAVE_EXT}")
    bench_contract(args.repeat)
    bench_pairs(args.repeat)


if __name__ == "__main__":
    main()
