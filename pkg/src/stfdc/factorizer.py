"""Assemble the sparse factorization ``F = E x_1 D`` tile by tile, and audit it."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .costs import power_cost
from .demand import ProblemSpec, build_demand_tensor, normalized_constraints, validate_admissibility
from .mlsvd import DEFAULT_TOL, EmptyTileError, mode1_factorize, numerical_rank
from .tensor import frobenius_norm, mode_n_product, unfold
from .tiling import TilePlan, apply_ownership, design_tiles

RESIDUAL_FLOOR = 1e-300


class InfeasibleTileError(RuntimeError):
    pass


class InadmissibleDemandError(ValueError):
    def __init__(self, violations):
        super().__init__(
            f"{len(violations)} coefficients involve more than Gamma subfunctions: "
            + ", ".join(f"user {k} index {idx} ({n} active)" for k, idx, n in violations[:10])
        )
        self.violations = violations


@dataclass(frozen=True)
class TileRecord:
    """Placement of one tile: server columns ``start..stop`` (1-based, inclusive)."""

    tile_id: int
    cls: int
    block: int
    windows: tuple[int, ...]
    active: tuple[int, ...]
    cols: tuple[int, ...]
    rank: int
    start: int
    stop: int


@dataclass(frozen=True)
class Factorization:
    D: np.ndarray
    E: np.ndarray
    tiles: tuple[TileRecord, ...]
    tolerance: float = DEFAULT_TOL

    @property
    def N(self) -> int:
        return self.D.shape[1]

    @property
    def tile_ranges(self) -> list[tuple[int, int]]:
        return [(t.start, t.stop) for t in self.tiles]

    def reconstruct(self) -> np.ndarray:
        if self.N == 0:
            return np.zeros((self.D.shape[0],) + self.E.shape[1:])
        return mode_n_product(self.E, self.D, 1)


def plan_for(spec: ProblemSpec, F: np.ndarray) -> TilePlan:
    return apply_ownership(design_tiles(spec), np.asarray(F) != 0)


def factorize(F: np.ndarray, plan: TilePlan, tol: float = DEFAULT_TOL) -> Factorization:
    """Factorize every owned tile through its mode-1 SVD and place the blocks in ``D`` and ``E``.

    Server columns are handed out in tile order; a tile consumes only its
    realized rank, so ``N`` can fall below the sum of budgets.
    """
    F = np.asarray(F, dtype=float)
    K, P = F.shape[0], F.shape[1:]
    d_blocks, e_blocks, records = [], [], []
    start = 1
    for t in plan.owned_tiles:
        local = np.where(t.owned, F[t.box], 0.0)
        keep_cols = t.owned.reshape(len(t.cols), -1).any(axis=1)
        keep_modes = [
            t.owned.any(axis=tuple(a for a in range(t.owned.ndim) if a != m + 1))
            for m in range(len(P))
        ]
        cropped = local[np.ix_(keep_cols, *keep_modes)]
        budget = t.rank_budget
        rank = numerical_rank(unfold(cropped, 1), tol)
        if rank > budget:
            raise InfeasibleTileError(f"tile {t.id} has numerical rank {rank} above its budget {budget}")
        try:
            part = mode1_factorize(cropped, budget, tol)
        except EmptyTileError:
            continue
        r = part.rank
        cols = np.asarray(t.cols)[keep_cols] - 1
        rows = [np.asarray(rs)[km] - 1 for rs, km in zip(t.row_sets, keep_modes)]
        d_blocks.append((cols, part.left))
        e_blocks.append((rows, part.right))
        records.append(TileRecord(t.id, t.cls, t.block, t.windows, t.active, t.cols, r, start, start + r - 1))
        start += r

    N = start - 1
    D = np.zeros((K, N))
    E = np.zeros((N,) + P)
    for rec, (cols, left), (rows, right) in zip(records, d_blocks, e_blocks):
        s = slice(rec.start - 1, rec.stop)
        D[cols, s] = left
        E[(s,) + np.ix_(*rows)] = right
    return Factorization(D, E, tuple(records), tol)


def build_factorization(spec: ProblemSpec, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, TilePlan, Factorization]:
    """Demand tensor, owned plan and factorization for a problem; rejects inadmissible demands."""
    F = build_demand_tensor(spec)
    bad = validate_admissibility(spec, F)
    if bad:
        raise InadmissibleDemandError(bad)
    plan = plan_for(spec, F)
    return F, plan, factorize(F, plan, tol)


def verify_reconstruction(f: Factorization, F: np.ndarray) -> float:
    """Relative Frobenius residual of ``E x_1 D`` against ``F`` (absolute when ``F`` is ~0)."""
    F = np.asarray(F, dtype=float)
    err = frobenius_norm(f.reconstruct() - F)
    ref = frobenius_norm(F)
    return err / ref if ref > RESIDUAL_FLOOR else err


# -- assignments and audits ------------------------------------------------

@dataclass(frozen=True)
class ServerAssignment:
    server: int
    subfunctions: tuple[int, ...]
    monomials: tuple[tuple[int, ...], ...]
    users: tuple[int, ...]


def extract_assignments(f: Factorization, spec: ProblemSpec) -> list[ServerAssignment]:
    out = []
    for n in range(f.N):
        idx = np.argwhere(f.E[n] != 0)
        monomials = tuple(sorted(tuple(int(v) + 1 for v in row) for row in idx))
        subs = tuple(sorted({l for p in monomials for l in spec.active_modes(p)}))
        users = tuple(int(k) + 1 for k in np.flatnonzero(f.D[:, n]))
        out.append(ServerAssignment(n + 1, subs, monomials, users))
    return out


@dataclass(frozen=True)
class Violation:
    kind: str
    server: int
    value: int
    limit: int
    mode: int | None = None

    def __str__(self):
        where = f"server {self.server}" + (f", subfunction {self.mode}" if self.mode else "")
        if self.kind == "lambda_window":
            return f"{self.kind} at {where}: indices touch {self.value} windows of size {self.limit}"
        return f"{self.kind} at {where}: {self.value} exceeds {self.limit}"


def server_multiplication_cost(a: ServerAssignment, spec: ProblemSpec) -> int:
    """One anchored-window charge per computed subfunction, priced at its largest exponent."""
    cost = 0
    for l in a.subfunctions:
        top = max(spec.exponent_grids[l - 1][p[l - 1] - 1] for p in a.monomials)
        cost += power_cost(top, spec.Lambda[l - 1])
    return cost


@dataclass(frozen=True)
class CostReport:
    gamma_achieved: int
    delta_achieved: int
    lambda_achieved: tuple[int, ...]
    normalized: tuple[float, float, tuple[float, ...]]
    N: int
    rate: Fraction | None
    multiplication_costs: tuple[int, ...]
    violations: tuple[Violation, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_constraints(f: Factorization, spec: ProblemSpec) -> CostReport:
    """Audit computation (Gamma), communication (Delta) and multiplication (Lambda) loads per server.

    Lambda is checked twice per computed subfunction: as the index range of the
    server's monomials, and as containment in a single anchored window.
    """
    if f.D.shape[0] != spec.K or f.E.shape[1:] != spec.P:
        raise ValueError(f"factorization shapes {f.D.shape}, {f.E.shape} do not match the problem")
    assignments = extract_assignments(f, spec)
    violations = []
    lam_achieved = [0] * spec.L
    for a in assignments:
        if len(a.subfunctions) > spec.Gamma:
            violations.append(Violation("gamma", a.server, len(a.subfunctions), spec.Gamma))
        if len(a.users) > spec.Delta:
            violations.append(Violation("delta", a.server, len(a.users), spec.Delta))
        for l in a.subfunctions:
            lam = spec.Lambda[l - 1]
            idx = [p[l - 1] for p in a.monomials]
            span = max(idx) - min(idx) + 1
            lam_achieved[l - 1] = max(lam_achieved[l - 1], span)
            if span > lam:
                violations.append(Violation("lambda_range", a.server, span, lam, l))
            windows = {(i - 1) // lam for i in idx}
            if len(windows) > 1:
                violations.append(Violation("lambda_window", a.server, len(windows), lam, l))
    return CostReport(
        gamma_achieved=max((len(a.subfunctions) for a in assignments), default=0),
        delta_achieved=max((len(a.users) for a in assignments), default=0),
        lambda_achieved=tuple(lam_achieved),
        normalized=normalized_constraints(spec),
        N=f.N,
        rate=Fraction(spec.K, f.N) if f.N else None,
        multiplication_costs=tuple(server_multiplication_cost(a, spec) for a in assignments),
        violations=tuple(violations),
    )


# -- linearized baseline ---------------------------------------------------

def linearize(F: np.ndarray) -> np.ndarray:
    """Users x monomials matrix (the mode-1 unfolding)."""
    return unfold(F, 1)


def baseline_server_count(K: int, Delta: int, L_prime: int, Gamma: int, T: int = 1) -> int | float:
    """Server count of the linearized (matrix factorization) scheme, for comparison only."""
    if T < 1:
        raise ValueError("T must be >= 1")
    n = Fraction(K, Delta) * Fraction(L_prime, Gamma) * Fraction(min(Delta, Gamma), T)
    if n.denominator != 1:
        warnings.warn(f"baseline server count {n} is not an integer", stacklevel=2)
        return float(n)
    return int(n)
