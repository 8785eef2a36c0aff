"""Tensor error ratios under grid halving, for f1, f2 and a smooth plane wave.

The expected ratio for degree d is 2^(d+1).  f1 and f2 have steep features
and reach that regime only on fine grids; cos(2x + y) gets there early.

    python scripts/convergence.py [--levels 6]
"""
import argparse

from hermite_qi.bspline import UniformGrid
from hermite_qi.functions import f1, f2, plane_wave
from hermite_qi.harness import sup_error
from hermite_qi.tensor_qi import tensor_spline


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--levels", type=int, default=5, help="number of grid levels (M = 1..levels)")
    args = ap.parse_args()
    for fun in (f1, f2, plane_wave()):
        print(f"\n{fun.name}")
        for d in (2, 3, 4):
            errs = [sup_error(tensor_spline(fun, (d, d), UniformGrid().refined(l)), fun) for l in range(args.levels)]
            ratios = " ".join(f"{a / b:7.2f}" for a, b in zip(errs, errs[1:]))
            print(f"  d={d} (target {2 ** (d + 1):2d}): ratios {ratios}   finest error {errs[-1]:.3e}")


if __name__ == "__main__":
    main()
