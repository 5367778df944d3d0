"""Linearized-baseline vs tensor-scheme server counts as L grows (K=4, Delta=2, Gamma=2, P=4, Lambda=2)."""

import argparse

from stfdc.demand import ProblemSpec
from stfdc.factorizer import baseline_server_count
from stfdc.tiling import bound_constructive, bound_general, worst_case_plan


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--L-max", type=int, default=5)
    ap.add_argument("--T", type=int, default=1)
    args = ap.parse_args()

    print(" L   L'    baseline  general  constructive  ratio")
    for L in range(2, args.L_max + 1):
        spec = ProblemSpec(4, L, (4,) * L, (2,) * L, 2, 2)
        base = baseline_server_count(4, 2, 4**L, 2, args.T)
        con = bound_constructive(worst_case_plan(spec))
        print(f"{L:2d}  {4**L:5d}  {base:8}  {bound_general(spec):7d}  {con:12d}  {base / con:5.2f}")


if __name__ == "__main__":
    main()
