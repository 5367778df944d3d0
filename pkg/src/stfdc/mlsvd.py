"""Multilinear SVD and the fixed-rank mode-1 factorization used on tiles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import fold, mode_n_product, unfold

DEFAULT_TOL = 1e-10
ZERO_CUTOFF = 1e-12


class EmptyTileError(ValueError):
    """Raised by :func:`mode1_factorize` on a (numerically) zero tensor."""


def _fix_signs(u: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of every column made positive; argmax picks the lowest index on ties
    if u.size == 0:
        return u
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[idx, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs


def _rank_from_singular_values(s: np.ndarray, tol: float) -> int:
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def numerical_rank(m: np.ndarray, tol: float = DEFAULT_TOL) -> int:
    """Number of singular values above ``tol * sigma_1``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return 0
    return _rank_from_singular_values(np.linalg.svd(m, compute_uv=False), tol)


def mode_n_rank(t: np.ndarray, n: int, tol: float = DEFAULT_TOL) -> int:
    return numerical_rank(unfold(t, n), tol)


@dataclass(frozen=True)
class Mode1Factorization:
    """``right x_1 left`` reproduces the factorized tensor.

    ``left`` has orthonormal columns; ``right`` carries the singular values.
    """

    left: np.ndarray
    right: np.ndarray
    rank: int

    def reconstruct(self) -> np.ndarray:
        return mode_n_product(self.right, self.left, 1)


def mode1_factorize(t: np.ndarray, rank_budget: int, tol: float = DEFAULT_TOL) -> Mode1Factorization:
    """Truncated SVD of the mode-1 unfolding, keeping at most ``rank_budget`` terms.

    The kept rank is ``min(numerical rank, rank_budget)``, so the result is exact
    (to rounding) whenever the budget is not binding.  The right factor is
    computed as ``left.T @ unfold(t, 1)`` which keeps exact zeros in columns
    where ``t`` is zero.
    """
    if rank_budget < 1:
        raise ValueError("rank budget must be at least 1")
    t = np.asarray(t, dtype=float)
    m = unfold(t, 1)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    k = _rank_from_singular_values(s, tol)
    if k == 0:
        raise EmptyTileError("tensor is numerically zero")
    r = min(k, rank_budget)
    # entries at rounding level are set to exact zero so supports do not depend on the scale of t;
    # the cutoff sits far above SVD rounding and far below the reconstruction tolerance
    noise = ZERO_CUTOFF
    left = _fix_signs(u[:, :r])
    left[np.abs(left) <= noise] = 0.0
    right = left.T @ m
    right[np.abs(right) <= noise * s[0]] = 0.0
    right = fold(right, (r,) + t.shape[1:], 1)
    return Mode1Factorization(left=left, right=right, rank=r)


@dataclass(frozen=True)
class MlsvdResult:
    core: np.ndarray
    factors: list[np.ndarray]
    mode_singular_values: list[np.ndarray]

    def reconstruct(self) -> np.ndarray:
        out = self.core
        for n, u in enumerate(self.factors, start=1):
            out = mode_n_product(out, u, n)
        return out


def mlsvd(t: np.ndarray, tol: float = DEFAULT_TOL) -> MlsvdResult:
    """Full multilinear SVD: orthogonal factor per mode, all-orthogonal ordered core.

    ``tol`` only decides which singular vectors get the deterministic sign
    convention; vectors of numerically zero singular values are left as LAPACK
    returns them.
    """
    t = np.asarray(t, dtype=float)
    if t.ndim < 1:
        raise ValueError("mlsvd needs a tensor of order >= 1")
    factors, sing = [], []
    for n in range(1, t.ndim + 1):
        u, s, _ = np.linalg.svd(unfold(t, n), full_matrices=True)
        k = _rank_from_singular_values(s, tol)
        u = u.copy()
        u[:, :k] = _fix_signs(u[:, :k])
        factors.append(u)
        full = np.zeros(t.shape[n - 1])
        full[: s.size] = s
        sing.append(full)
    core = t
    for n, u in enumerate(factors, start=1):
        core = mode_n_product(core, u.T, n)
    return MlsvdResult(core=core, factors=factors, mode_singular_values=sing)
