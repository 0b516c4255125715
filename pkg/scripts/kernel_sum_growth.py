"""Partial sums of sum_{j>i>=1} ||K_ji(0)|| for b_n = (n+1)^alpha, a_n = 0.

Prints the partial sum at dyadic depths next to (ln N)^2, which shows that
alpha = 2 grows like c (ln N)^2 while alpha = 3 settles.

    python3 scripts/kernel_sum_growth.py --alphas 2 3 --depth 10000
"""

import argparse
import math

import numpy as np

from jacobi_deficiency.coeffs import make_family
from jacobi_deficiency.kernel import kernel_row_sums_streamed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alphas", type=float, nargs="+", default=[2.0, 3.0])
    ap.add_argument("--depth", type=int, default=10_000)
    args = ap.parse_args()

    for alpha in args.alphas:
        seq = make_family("power", {"a": 0, "b": 1, "alpha": alpha})
        rows, note = kernel_row_sums_streamed(seq, args.depth)
        cums = np.cumsum(rows)
        print(f"alpha = {alpha:g}" + (f" ({note})" if note else ""))
        print(f"{'N':>8} {'partial sum':>14} {'sum/(ln N)^2':>14}")
        last = len(rows) - 1
        grid = sorted({*(2 ** k for k in range(4, last.bit_length())), last})
        for N in grid:
            print(f"{N:>8} {cums[N]:>14.6f} {cums[N] / math.log(N) ** 2:>14.6f}")
        print()


if __name__ == "__main__":
    main()
