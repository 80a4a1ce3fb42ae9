"""Compare the compiled and pure-Python Jacobi eigensolvers.

Usage: python benchmarks/bench_jacobi.py [--sizes 4 8 16 32 64] [--repeat 5]

Prints the best-of-``repeat`` wall time per call for each matrix size, the
speedup of the compiled kernel and the largest eigenvalue difference
between the two.
"""

import argparse
import timeit

import numpy as np

from petzlab import _jacobi_py
from petzlab.ensemble import SplitMix64, random_hermitian

try:
    from petzlab import _jacobi
except ImportError:
    _jacobi = None


def best_time(fn, a, repeat):
    number = max(1, int(0.2 / max(timeit.timeit(lambda: fn(a, 1e-15, 100), number=1), 1e-6)))
    return min(timeit.repeat(lambda: fn(a, 1e-15, 100), number=number, repeat=repeat)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 16, 32, 64])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    rng = SplitMix64(2024)
    print(f"{'n':>4} {'python [ms]':>12} {'cython [ms]':>12} {'speedup':>8} {'max |dw|':>10}")
    for n in args.sizes:
        a = random_hermitian(rng, n).data
        t_py = best_time(_jacobi_py.jacobi_eigh, a, args.repeat)
        if _jacobi is None:
            print(f"{n:>4} {1e3 * t_py:>12.3f} {'n/a':>12} {'n/a':>8} {'n/a':>10}")
            continue
        t_c = best_time(_jacobi.jacobi_eigh, a, args.repeat)
        w_py = np.sort(_jacobi_py.jacobi_eigh(a, 1e-15, 100)[0])
        w_c = np.sort(_jacobi.jacobi_eigh(a, 1e-15, 100)[0])
        print(f"{n:>4} {1e3 * t_py:>12.3f} {1e3 * t_c:>12.3f} {t_py / t_c:>8.1f} "
              f"{np.max(np.abs(w_py - w_c)):>10.1e}")


if __name__ == "__main__":
    main()
