import math
from pathlib import Path

import numpy as np
import pytest

from stfdc.demand import BasisFunction, BasisSuite, ProblemSpec
from stfdc.tiling import full_support

DATA = Path(__file__).resolve().parents[1] / "scripts" / "problems"


def base_spec(seed=0):
    """K=4, L=2, Gamma=2, Delta=2, P=(4,4), Lambda=(2,2) with a dense random demand."""
    rng = np.random.default_rng(seed)
    spec = ProblemSpec(4, 2, (4, 4), (2, 2), 2, 2)
    coeffs = [(k, (i, j), float(rng.standard_normal()))
              for k in range(1, 5) for i in range(1, 5) for j in range(1, 5)]
    return spec.with_coefficients(coeffs)


def k5_spec(seed=0):
    rng = np.random.default_rng(seed)
    spec = ProblemSpec(5, 2, (4, 4), (2, 2), 2, 2)
    support = np.argwhere(full_support(spec))
    return spec.with_coefficients(
        [(int(p[0]) + 1, (int(p[1]) + 1, int(p[2]) + 1), float(rng.standard_normal())) for p in support]
    )


# exponents per user as {(e1, e2, e3, e4): coefficient}
TWO_USER_DEMANDS = {
    1: {(2, 3, 0, 0): 7.0, (1, 0, 2, 1): 8.0, (0, 0, 1, 4): 6.0, (4, 0, 0, 2): 4.0},
    2: {(0, 1, 3, 0): 3.0, (3, 0, 1, 0): 2.0, (2, 1, 0, 0): 11.0, (0, 2, 0, 3): 13.0},
}
TWO_USER_DEGREES = (4, 3, 3, 4)


def two_user_spec(Gamma=3, Lambda=(2, 2, 2, 2)):
    P = tuple(d + 1 for d in TWO_USER_DEGREES)
    coeffs = [(k, tuple(e + 1 for e in exps), c)
              for k, terms in TWO_USER_DEMANDS.items() for exps, c in terms.items()]
    return ProblemSpec(2, 4, P, Lambda, Gamma, 1, tuple(coeffs))


def two_user_basis():
    funcs = (BasisFunction("exp", arg=1), BasisFunction("log", arg=2),
             BasisFunction("sqrt", arg=2), BasisFunction("cos", arg=3))
    return BasisSuite(funcs, (1.0, math.e, math.pi / 3))


@pytest.fixture
def base():
    return base_spec()


@pytest.fixture
def two_user():
    return two_user_spec()
