"""Tile design, greedy ownership of demand entries, rank budgets and server-count bounds.

A tile is the block ``cols x R_1 x ... x R_L`` of the demand tensor, where
``cols`` is a contiguous block of at most Delta users and each ``R_l`` is a
Lambda_l-window of indices for an active mode or the single index 1 for an
inactive one.  Tiles are processed in the fixed order ``(i, j, Q)``; each one
owns whatever part of the demand support earlier tiles have not claimed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .demand import ProblemSpec


class CoverageError(ValueError):
    """Support entries that no tile covers (a Gamma-inadmissible demand)."""

    def __init__(self, orphans: list[tuple[int, ...]]):
        shown = ", ".join(str(o) for o in orphans[:10])
        more = f" (+{len(orphans) - 10} more)" if len(orphans) > 10 else ""
        super().__init__(f"{len(orphans)} support entries outside every tile: {shown}{more}")
        self.orphans = orphans


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class Tile:
    id: int
    cls: int
    block: int
    windows: tuple[int, ...]  # 0 for an inactive (pinned) mode
    active: tuple[int, ...]
    cols: tuple[int, ...]
    row_sets: tuple[tuple[int, ...], ...]
    owned: np.ndarray | None = None  # bool, shape (len(cols), *map(len, row_sets))

    @property
    def box(self) -> tuple[np.ndarray, ...]:
        """0-based open mesh selecting the declared block of the demand tensor."""
        return np.ix_(np.asarray(self.cols) - 1, *(np.asarray(r) - 1 for r in self.row_sets))

    @property
    def n_rows(self) -> int:
        return math.prod(len(r) for r in self.row_sets)

    @property
    def owned_cols(self) -> tuple[int, ...]:
        if self.owned is None:
            return self.cols
        keep = self.owned.reshape(len(self.cols), -1).any(axis=1)
        return tuple(c for c, k in zip(self.cols, keep) if k)

    @property
    def owned_rows(self) -> tuple[tuple[int, ...], ...]:
        """Owned row multi-indices, Little-Endian order."""
        if self.owned is None:
            return _le_product(self.row_sets)
        hit = self.owned.any(axis=0)
        return tuple(idx for idx, h in zip(_le_product(self.row_sets), hit.reshape(-1, order="F")) if h)

    @property
    def rank_budget(self) -> int:
        return min(len(self.owned_cols), len(self.owned_rows))

    @property
    def is_empty(self) -> bool:
        return self.owned is not None and not self.owned.any()


def _le_product(sets):
    # itertools.product varies the last factor fastest; Little-Endian varies the first fastest
    return tuple(tuple(reversed(t)) for t in itertools.product(*reversed(sets)))


@dataclass(frozen=True)
class TilePlan:
    tiles: tuple[Tile, ...]
    shape: tuple[int, ...]
    mask: np.ndarray | None = None

    @property
    def class_counts(self) -> tuple[int, int, int, int]:
        counts = [0, 0, 0, 0]
        for t in self.tiles:
            counts[t.cls - 1] += 1
        return tuple(counts)

    @property
    def owned_tiles(self) -> tuple[Tile, ...]:
        return tuple(t for t in self.tiles if t.owned is not None and t.owned.any())


def enumerate_active_sets(L: int, Gamma: int) -> list[tuple[int, ...]]:
    if not 1 <= Gamma <= L:
        raise ValueError(f"need 1 <= Gamma <= L, got Gamma={Gamma}, L={L}")
    return list(itertools.combinations(range(1, L + 1), Gamma))


def _window(j: int, lam: int, p: int) -> tuple[int, ...]:
    return tuple(range(1 + (j - 1) * lam, min(j * lam, p) + 1))


def design_tiles(spec: ProblemSpec) -> TilePlan:
    """All tiles over user blocks, active sets and windows, sorted by ``(i, j, Q)``."""
    K, D = spec.K, spec.Delta
    keys = []
    for i in range(1, -(-K // D) + 1):
        for Q in enumerate_active_sets(spec.L, spec.Gamma):
            ranges = [range(1, -(-spec.P[l - 1] // spec.Lambda[l - 1]) + 1) for l in Q]
            for js in itertools.product(*ranges):
                j = [0] * spec.L
                for l, jl in zip(Q, js):
                    j[l - 1] = jl
                keys.append((i, tuple(j), Q))
    keys.sort()

    tiles = []
    for pos, (i, j, Q) in enumerate(keys, start=1):
        cols = tuple(range(1 + (i - 1) * D, min(i * D, K) + 1))
        row_sets = tuple(
            _window(j[l], spec.Lambda[l], spec.P[l]) if j[l] else (1,) for l in range(spec.L)
        )
        full_cols = len(cols) == D
        full_rows = all(j[l - 1] <= spec.P[l - 1] // spec.Lambda[l - 1] for l in Q)
        cls = {(True, True): 1, (False, True): 2, (True, False): 3, (False, False): 4}[(full_cols, full_rows)]
        tiles.append(Tile(pos, cls, i, j, Q, cols, row_sets))
    return TilePlan(tuple(tiles), spec.tensor_shape)


def class_cardinalities(spec: ProblemSpec) -> tuple[int, int, int, int]:
    """Closed-form tile counts per class (full/residual user block x full/residual windows)."""
    full_blocks = spec.K // spec.Delta
    residual_blocks = int(spec.K % spec.Delta != 0)
    full_windows = 0
    residual_windows = 0
    for Q in enumerate_active_sets(spec.L, spec.Gamma):
        floors = math.prod(spec.P[l - 1] // spec.Lambda[l - 1] for l in Q)
        ceils = math.prod(-(-spec.P[l - 1] // spec.Lambda[l - 1]) for l in Q)
        full_windows += floors
        # zero when every active mode divides evenly
        residual_windows += ceils - floors
    return (
        full_blocks * full_windows,
        residual_blocks * full_windows,
        full_blocks * residual_windows,
        residual_blocks * residual_windows,
    )


def full_support(spec: ProblemSpec) -> np.ndarray:
    """Boolean tensor of every Gamma-admissible position (the worst-case demand support)."""
    L = spec.L
    grids = [np.asarray(g) > 0 for g in spec.exponent_grids]
    count = np.zeros(spec.P, dtype=int)
    for l, g in enumerate(grids):
        shape = [1] * L
        shape[l] = spec.P[l]
        count = count + g.reshape(shape)
    admissible = count <= spec.Gamma
    return np.broadcast_to(admissible, spec.tensor_shape).copy()


def rank_one_support(col: np.ndarray, slice_: np.ndarray) -> np.ndarray:
    """Binary outer placement of a column support and a slice support."""
    return np.multiply.outer(np.asarray(col, dtype=bool), np.asarray(slice_, dtype=bool))


def apply_ownership(plan: TilePlan, support: np.ndarray) -> TilePlan:
    """Greedy zero-forcing pass in tile order; each tile keeps the unclaimed part of ``support``."""
    support = np.asarray(support, dtype=bool)
    if support.shape != plan.shape:
        raise ValueError(f"support has shape {support.shape}, plan expects {plan.shape}")
    mask = np.zeros(plan.shape, dtype=bool)
    tiles = []
    for t in plan.tiles:
        box = t.box
        owned = support[box] & ~mask[box]
        mask[box] = mask[box] | owned
        tiles.append(replace(t, owned=owned))
    orphans = np.argwhere(support & ~mask)
    if orphans.size:
        raise CoverageError([tuple(int(v) + 1 for v in o) for o in orphans])
    return TilePlan(tuple(tiles), plan.shape, mask)


def rank_budget(tile: Tile) -> int:
    return tile.rank_budget


def bound_constructive(plan: TilePlan) -> int:
    """Sum of per-tile rank budgets after ownership."""
    if plan.mask is None:
        raise ValueError("ownership has not been applied to this plan")
    return sum(t.rank_budget for t in plan.owned_tiles)


def worst_case_plan(spec: ProblemSpec) -> TilePlan:
    return apply_ownership(design_tiles(spec), full_support(spec))


def bound_simplified(K: int, Delta: int, L: int, Gamma: int, P: int, Lam: int) -> int:
    """Closed-form bound for uniform P, Lambda with Delta | K and Lambda | P."""
    if K % Delta or P % Lam:
        raise PreconditionError(f"needs Delta | K and Lambda | P, got K={K}, Delta={Delta}, P={P}, Lambda={Lam}")
    if not 1 <= Gamma <= L:
        raise PreconditionError(f"needs 1 <= Gamma <= L, got Gamma={Gamma}, L={L}")
    return (K // Delta) * math.comb(L, Gamma) * min(Delta, Lam**Gamma) * (P // Lam) ** Gamma


def bound_general(spec: ProblemSpec) -> int:
    """General server-count bound, one term per (active set, set of residual modes).

    The empty residual set gives the full-window terms; non-empty residual sets
    count tiles whose listed modes use the short trailing window.
    """
    K, D = spec.K, spec.Delta
    full_blocks, rem = K // D, K % D
    total = 0
    for Q in enumerate_active_sets(spec.L, spec.Gamma):
        nondiv = [l for l in Q if spec.P[l - 1] % spec.Lambda[l - 1]]
        for size in range(len(nondiv) + 1):
            for T in itertools.combinations(nondiv, size):
                count, rows = 1, 1
                for l in Q:
                    p, lam = spec.P[l - 1], spec.Lambda[l - 1]
                    if l in T:
                        rows *= p % lam
                    else:
                        count *= p // lam
                        rows *= lam
                total += count * (full_blocks * min(D, rows) + (min(rem, rows) if rem else 0))
    return total


def lemma1_check(D_support: np.ndarray, E_support: np.ndarray, product_support: np.ndarray) -> bool:
    """Whether the union of rank-one contribution supports contains ``product_support``."""
    D_support = np.asarray(D_support, dtype=bool)
    E_support = np.asarray(E_support, dtype=bool)
    N = D_support.shape[1]
    if E_support.shape[0] != N:
        raise ValueError(f"D has {N} columns, E has {E_support.shape[0]} slices")
    union = np.tensordot(D_support.astype(np.int64), E_support.astype(np.int64), axes=([1], [0])) > 0
    return bool(np.all(union | ~np.asarray(product_support, dtype=bool)))
