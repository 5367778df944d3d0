"""Problem parameters, the demand tensor, and the direct (protocol-free) evaluation of demands."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .tensor import contract_block, stack


class SpecError(ValueError):
    """Invalid problem parameters.  ``field`` names the offending member."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class BasisDomainError(ValueError):
    """A basis function was evaluated outside its domain."""

    def __init__(self, mode: int, message: str, server: int | None = None):
        where = f"subfunction {mode}" if server is None else f"server {server}, subfunction {mode}"
        super().__init__(f"{where}: {message}")
        self.mode = mode
        self.server = server


Coefficient = tuple[int, tuple[int, ...], float]


@dataclass(frozen=True)
class ProblemSpec:
    """System parameters plus the sparse list of demand coefficients.

    All indices are 1-based.  ``exponent_grids[l][i - 1]`` is the actual power
    of ``W_l`` stored at tensor index ``i``; every grid starts at 0 so that
    index 1 is the "subfunction absent" slot.
    """

    K: int
    L: int
    P: tuple[int, ...]
    Lambda: tuple[int, ...]
    Gamma: int
    Delta: int
    coefficients: tuple[Coefficient, ...] = ()
    exponent_grids: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "P", tuple(int(p) for p in self.P))
        object.__setattr__(self, "Lambda", tuple(int(x) for x in self.Lambda))
        if self.K < 1:
            raise SpecError("K", f"must be >= 1, got {self.K}")
        if self.L < 1:
            raise SpecError("L", f"must be >= 1, got {self.L}")
        if len(self.P) != self.L:
            raise SpecError("P", f"needs {self.L} entries, got {len(self.P)}")
        if len(self.Lambda) != self.L:
            raise SpecError("Lambda", f"needs {self.L} entries, got {len(self.Lambda)}")
        if not 1 <= self.Gamma <= self.L:
            raise SpecError("Gamma", f"must satisfy 1 <= Gamma <= L={self.L}, got {self.Gamma}")
        if not 1 <= self.Delta <= self.K:
            raise SpecError("Delta", f"must satisfy 1 <= Delta <= K={self.K}, got {self.Delta}")
        for l, (p, lam) in enumerate(zip(self.P, self.Lambda), start=1):
            if p < 1:
                raise SpecError("P", f"entry {l} must be >= 1, got {p}")
            if not 1 <= lam <= p:
                raise SpecError("Lambda", f"entry {l} must satisfy 1 <= Lambda <= P={p}, got {lam}")

        if self.exponent_grids is None:
            grids = tuple(tuple(range(p)) for p in self.P)
        else:
            grids = tuple(tuple(int(e) for e in g) for g in self.exponent_grids)
        if len(grids) != self.L:
            raise SpecError("exponent_grids", f"needs {self.L} grids, got {len(grids)}")
        for l, (g, p) in enumerate(zip(grids, self.P), start=1):
            if len(g) != p:
                raise SpecError("exponent_grids", f"grid {l} has {len(g)} entries, P_{l}={p}")
            if g[0] != 0:
                raise SpecError("exponent_grids", f"grid {l} must start at exponent 0")
            if any(b <= a for a, b in zip(g, g[1:])):
                raise SpecError("exponent_grids", f"grid {l} is not strictly increasing")
        object.__setattr__(self, "exponent_grids", grids)

        coeffs = []
        seen = set()
        for c in self.coefficients:
            k, idx, value = int(c[0]), tuple(int(i) for i in c[1]), float(c[2])
            if not 1 <= k <= self.K:
                raise SpecError("coefficients", f"user {k} out of range 1..{self.K}")
            if len(idx) != self.L:
                raise SpecError("coefficients", f"index {idx} needs {self.L} entries")
            for l, (i, p) in enumerate(zip(idx, self.P), start=1):
                if not 1 <= i <= p:
                    raise SpecError("coefficients", f"index {idx} of user {k}: entry {l} out of range 1..{p}")
            if not math.isfinite(value):
                raise SpecError("coefficients", f"value for user {k}, index {idx} is not finite")
            if (k, idx) in seen:
                raise SpecError("coefficients", f"duplicate entry for user {k}, index {idx}")
            seen.add((k, idx))
            coeffs.append((k, idx, value))
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @property
    def tensor_shape(self) -> tuple[int, ...]:
        return (self.K,) + self.P

    def with_coefficients(self, coefficients) -> "ProblemSpec":
        return ProblemSpec(self.K, self.L, self.P, self.Lambda, self.Gamma, self.Delta,
                           tuple(coefficients), self.exponent_grids)

    def active_modes(self, index: Sequence[int]) -> list[int]:
        """Modes (1-based) whose exponent at ``index`` is positive."""
        return [l for l, (g, i) in enumerate(zip(self.exponent_grids, index), start=1) if g[i - 1] > 0]


def coefficients_from_tensor(F: np.ndarray) -> list[Coefficient]:
    """Sparse readback of a demand tensor (nonzeros only, Little-Endian order)."""
    F = np.asarray(F, dtype=float)
    out = []
    for pos in np.flatnonzero(F.reshape(-1, order="F")):
        idx = np.unravel_index(pos, F.shape, order="F")
        out.append((int(idx[0]) + 1, tuple(int(i) + 1 for i in idx[1:]), float(F[idx])))
    return out


def build_demand_tensor(spec: ProblemSpec) -> np.ndarray:
    """Dense ``K x P_1 x ... x P_L`` coefficient tensor."""
    F = np.zeros(spec.tensor_shape)
    for k, idx, value in spec.coefficients:
        F[(k - 1,) + tuple(i - 1 for i in idx)] = value
    return F


def validate_admissibility(spec: ProblemSpec, F: np.ndarray) -> list[tuple[int, tuple[int, ...], int]]:
    """Nonzero entries that involve more than Gamma subfunctions.

    Each violation is ``(user, index, number of active subfunctions)``.
    """
    F = np.asarray(F)
    if F.shape != spec.tensor_shape:
        raise ValueError(f"demand tensor has shape {F.shape}, expected {spec.tensor_shape}")
    violations = []
    for k, idx, _ in coefficients_from_tensor(F):
        n_active = len(spec.active_modes(idx))
        if n_active > spec.Gamma:
            violations.append((k, idx, n_active))
    return violations


def normalized_constraints(spec: ProblemSpec) -> tuple[float, float, tuple[float, ...]]:
    """``(gamma, delta, (lambda_1, ..., lambda_L))``."""
    return (
        spec.Gamma / spec.L,
        spec.Delta / spec.K,
        tuple(lam / p for lam, p in zip(spec.Lambda, spec.P)),
    )


def monomial_tensor(w: Sequence[float], grids: Sequence[Sequence[int]]) -> np.ndarray:
    """``W(p) = prod_l w_l ** grids[l][p_l - 1]`` for scalar subfunction values."""
    if len(w) != len(grids):
        raise ValueError(f"{len(w)} subfunction values for {len(grids)} grids")
    out = np.ones(())
    for wl, g in zip(w, grids):
        powers = np.asarray(wl, dtype=float) ** np.asarray(g, dtype=float)
        out = np.multiply.outer(out, powers)
    return out


def evaluate_demands_direct(F: np.ndarray, W: np.ndarray) -> np.ndarray:
    """``f_k = sum_p F(k, p) W(p)``.

    ``W`` may carry one extra trailing mode of input components, in which case
    the result is ``K x B``.
    """
    F = np.asarray(F, dtype=float)
    L = F.ndim - 1
    return contract_block(F, range(2, L + 2), W, range(1, L + 1))


# -- basis functions -------------------------------------------------------

def _affine(x, a, b):
    return a * x + b


def _check_positive(x):
    return np.all(x > 0), "log needs positive inputs"


def _check_nonnegative(x):
    return np.all(x >= 0), "sqrt needs non-negative inputs"


_BUILTINS: dict[str, tuple[Callable, int, Callable | None]] = {
    # name: (function, number of params, domain check)
    "exp": (np.exp, 0, None),
    "log": (np.log, 0, _check_positive),
    "sqrt": (np.sqrt, 0, _check_nonnegative),
    "cos": (np.cos, 0, None),
    "sin": (np.sin, 0, None),
    "identity": (lambda x: x, 0, None),
    "square": (np.square, 0, None),
    "affine": (_affine, 2, None),
}

BUILTIN_NAMES = tuple(_BUILTINS)


@dataclass(frozen=True)
class BasisFunction:
    """A named builtin subfunction.  ``arg`` selects one input component (1-based);
    without it the function acts on the whole input componentwise."""

    name: str
    params: tuple[float, ...] = ()
    arg: int | None = None

    def __post_init__(self):
        if self.name not in _BUILTINS:
            raise SpecError("basis", f"unknown function {self.name!r}; choose from {', '.join(BUILTIN_NAMES)}")
        nparams = _BUILTINS[self.name][1]
        if len(self.params) != nparams:
            raise SpecError("basis", f"{self.name} takes {nparams} parameters, got {len(self.params)}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        fn, _, check = _BUILTINS[self.name]
        x = np.asarray(x, dtype=float)
        if check is not None:
            ok, msg = check(x)
            if not ok:
                raise ValueError(msg)
        return fn(x, *self.params)


@dataclass(frozen=True)
class BasisSuite:
    functions: tuple[BasisFunction, ...]
    input: tuple[float, ...] = field(default=(0.0,))

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple(self.functions))
        object.__setattr__(self, "input", tuple(float(v) for v in np.atleast_1d(self.input)))
        if not self.input:
            raise SpecError("input", "must contain at least one value")
        for l, f in enumerate(self.functions, start=1):
            if f.arg is not None and not 1 <= f.arg <= len(self.input):
                raise SpecError("basis", f"entry {l} selects input component {f.arg}, input has {len(self.input)}")

    @property
    def n_components(self) -> int:
        if all(f.arg is not None for f in self.functions):
            return 1
        return len(self.input)

    def evaluate_one(self, l: int, server: int | None = None) -> np.ndarray:
        """Values of subfunction ``l`` (1-based) over all input components."""
        f = self.functions[l - 1]
        x = np.asarray(self.input)
        arg = x[f.arg - 1] if f.arg is not None else x
        try:
            w = f(arg)
        except ValueError as exc:
            raise BasisDomainError(l, str(exc), server) from None
        w = np.broadcast_to(w, (self.n_components,)).astype(float)
        if not np.all(np.isfinite(w)):
            raise BasisDomainError(l, "non-finite value", server)
        return w

    def evaluate(self) -> np.ndarray:
        """``L x B`` array of subfunction outputs."""
        return np.stack([self.evaluate_one(l) for l in range(1, len(self.functions) + 1)])


def build_monomial_tensor(basis: BasisSuite, spec: ProblemSpec) -> np.ndarray:
    """Monomial tensor ``P_1 x ... x P_L x B``, one trailing slice per input component."""
    if len(basis.functions) != spec.L:
        raise SpecError("basis", f"needs {spec.L} functions, got {len(basis.functions)}")
    W = basis.evaluate()
    return stack([monomial_tensor(W[:, b], spec.exponent_grids) for b in range(W.shape[1])])
