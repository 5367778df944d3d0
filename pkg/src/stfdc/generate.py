"""Random admissible problem instances for sweeps and property tests."""

from __future__ import annotations

import numpy as np

from .demand import BasisFunction, BasisSuite, ProblemSpec
from .tiling import full_support

# domain-safe for inputs in (0.2, 1.5)
SAFE_BASIS = ("exp", "log", "sqrt", "cos", "sin", "identity", "square", "affine")


def random_problem(
    rng: np.random.Generator,
    max_K: int = 8,
    max_L: int = 3,
    max_P: int = 6,
    density: float | None = None,
) -> ProblemSpec:
    """Random parameters plus random coefficients on a random subset of the admissible positions."""
    K = int(rng.integers(1, max_K + 1))
    L = int(rng.integers(1, max_L + 1))
    P = tuple(int(p) for p in rng.integers(1, max_P + 1, size=L))
    Lam = tuple(int(rng.integers(1, p + 1)) for p in P)
    Gamma = int(rng.integers(1, L + 1))
    Delta = int(rng.integers(1, K + 1))
    spec = ProblemSpec(K, L, P, Lam, Gamma, Delta)
    return spec.with_coefficients(random_coefficients(rng, spec, density))


def random_coefficients(rng: np.random.Generator, spec: ProblemSpec, density: float | None = None):
    if density is None:
        density = float(rng.uniform(0.2, 1.0))
    support = np.argwhere(full_support(spec))
    keep = support[rng.random(len(support)) < density]
    return [
        (int(pos[0]) + 1, tuple(int(i) + 1 for i in pos[1:]), float(rng.standard_normal()))
        for pos in keep
    ]


def random_basis(rng: np.random.Generator, L: int, n_inputs: int = 1) -> BasisSuite:
    funcs = []
    for _ in range(L):
        name = str(rng.choice(SAFE_BASIS))
        params = tuple(rng.uniform(0.5, 1.5, size=2)) if name == "affine" else ()
        funcs.append(BasisFunction(name, params))
    return BasisSuite(tuple(funcs), tuple(rng.uniform(0.2, 1.5, size=n_inputs)))
