"""Write the bundled problem files into scripts/problems/.

base.json    K=4, L=2, P=(4,4), Lambda=(2,2), Gamma=Delta=2, dense random demand, basis (exp, log) at 1.3
k5_variant.json  same geometry with K=5 (residual user block), full admissible support
two_user.json    two demands in four subfunctions, Gamma=3, basis exp/log/sqrt/cos at (1, e, pi/3)
zero.json        base-case geometry with no coefficients
"""

import argparse
import math
from pathlib import Path

import numpy as np

from stfdc.demand import BasisFunction, BasisSuite, ProblemSpec
from stfdc.formats import dump_json, problem_to_dict
from stfdc.tiling import full_support

OUT = Path(__file__).resolve().parent / "problems"

TWO_USER = {
    1: {(2, 3, 0, 0): 7.0, (1, 0, 2, 1): 8.0, (0, 0, 1, 4): 6.0, (4, 0, 0, 2): 4.0},
    2: {(0, 1, 3, 0): 3.0, (3, 0, 1, 0): 2.0, (2, 1, 0, 0): 11.0, (0, 2, 0, 3): 13.0},
}


def base_case(seed):
    rng = np.random.default_rng(seed)
    spec = ProblemSpec(4, 2, (4, 4), (2, 2), 2, 2)
    coeffs = [(k, (i, j), float(rng.standard_normal()))
              for k in range(1, 5) for i in range(1, 5) for j in range(1, 5)]
    basis = BasisSuite((BasisFunction("exp"), BasisFunction("log")), (1.3,))
    return spec.with_coefficients(coeffs), basis


def k5_variant(seed):
    rng = np.random.default_rng(seed)
    spec = ProblemSpec(5, 2, (4, 4), (2, 2), 2, 2)
    coeffs = [(int(p[0]) + 1, (int(p[1]) + 1, int(p[2]) + 1), float(rng.standard_normal()))
              for p in np.argwhere(full_support(spec))]
    basis = BasisSuite((BasisFunction("sin"), BasisFunction("sqrt")), (0.8,))
    return spec.with_coefficients(coeffs), basis


def two_user():
    coeffs = [(k, tuple(e + 1 for e in exps), c) for k, terms in TWO_USER.items() for exps, c in terms.items()]
    spec = ProblemSpec(2, 4, (5, 4, 4, 5), (2, 2, 2, 2), 3, 1, tuple(coeffs))
    basis = BasisSuite(
        (BasisFunction("exp", arg=1), BasisFunction("log", arg=2),
         BasisFunction("sqrt", arg=2), BasisFunction("cos", arg=3)),
        (1.0, math.e, math.pi / 3),
    )
    return spec, basis


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    OUT.mkdir(exist_ok=True)
    dump_json(problem_to_dict(*base_case(args.seed)), OUT / "base.json")
    dump_json(problem_to_dict(*k5_variant(args.seed)), OUT / "k5_variant.json")
    dump_json(problem_to_dict(*two_user()), OUT / "two_user.json")
    dump_json(problem_to_dict(ProblemSpec(4, 2, (4, 4), (2, 2), 2, 2)), OUT / "zero.json")
    print(f"wrote {len(list(OUT.glob('*.json')))} files to {OUT}")


if __name__ == "__main__":
    main()
