"""Compare the closed-form, general and ownership-based server counts over divisible uniform tuples.

Prints a per-(L, Gamma) table of how often the ownership count falls below the
closed form, and the largest gap seen.
"""

import argparse
import itertools
from collections import defaultdict

from stfdc.demand import ProblemSpec
from stfdc.tiling import bound_constructive, bound_general, bound_simplified, worst_case_plan


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-K", type=int, default=6)
    ap.add_argument("--max-L", type=int, default=3)
    ap.add_argument("--max-P", type=int, default=6)
    args = ap.parse_args()

    stats = defaultdict(lambda: [0, 0, 0.0])  # tuples, mismatches, worst ratio
    general_mismatch = 0
    for K, L, P in itertools.product(range(1, args.max_K + 1), range(1, args.max_L + 1), range(1, args.max_P + 1)):
        for D, G, lam in itertools.product(range(1, K + 1), range(1, L + 1), range(1, P + 1)):
            if K % D or P % lam:
                continue
            spec = ProblemSpec(K, L, (P,) * L, (lam,) * L, G, D)
            s = bound_simplified(K, D, L, G, P, lam)
            general_mismatch += bound_general(spec) != s
            c = bound_constructive(worst_case_plan(spec))
            row = stats[(L, G)]
            row[0] += 1
            if c != s:
                row[1] += 1
                row[2] = max(row[2], 1 - c / s)

    print(f"general != simplified on {general_mismatch} tuples")
    print(" L  Gamma  tuples  constructive<simplified  worst relative gap")
    for (L, G), (n, bad, gap) in sorted(stats.items()):
        print(f"{L:2d}  {G:5d}  {n:6d}  {bad:23d}  {gap:18.3f}")


if __name__ == "__main__":
    main()
