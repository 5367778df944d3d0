"""Dense multilinear algebra on numpy arrays.

Tensors are plain ``numpy.ndarray`` objects.  Linear layout is Little-Endian
(first index varies fastest), i.e. Fortran order, so the mode-1 unfolding is
a reshape.  Every public function takes and returns 1-based mode numbers and
1-based multi-indices, matching the index conventions of the file formats.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

MAX_ORDER = 16


class ShapeError(ValueError):
    """Incompatible tensor shapes or element counts."""


class ModeError(ValueError):
    """A mode number outside ``1..order``."""


def _check_shape(shape: Sequence[int]) -> tuple[int, ...]:
    shape = tuple(int(d) for d in shape)
    if len(shape) > MAX_ORDER:
        raise ShapeError(f"order {len(shape)} exceeds the supported maximum {MAX_ORDER}")
    for n, d in enumerate(shape, start=1):
        if d < 1:
            raise ShapeError(f"mode {n} has non-positive size {d}")
    return shape


def _check_mode(t: np.ndarray, mode: int) -> int:
    if not 1 <= mode <= t.ndim:
        raise ModeError(f"mode {mode} is invalid for an order-{t.ndim} tensor")
    return mode - 1


def linear_index(multi_index: Sequence[int], shape: Sequence[int]) -> int:
    """Little-Endian position (1-based) of a 1-based multi-index."""
    shape = _check_shape(shape)
    if len(multi_index) != len(shape):
        raise ShapeError(f"index has {len(multi_index)} entries, shape has {len(shape)} modes")
    pos, stride = 1, 1
    for n, (i, d) in enumerate(zip(multi_index, shape), start=1):
        if not 1 <= i <= d:
            raise IndexError(f"index {i} out of range 1..{d} in mode {n}")
        pos += (i - 1) * stride
        stride *= d
    return pos


def multi_index(position: int, shape: Sequence[int]) -> tuple[int, ...]:
    """Inverse of :func:`linear_index`."""
    shape = _check_shape(shape)
    total = int(np.prod(shape, dtype=np.int64))
    if not 1 <= position <= total:
        raise IndexError(f"linear position {position} out of range 1..{total}")
    rem = position - 1
    out = []
    for d in shape:
        out.append(rem % d + 1)
        rem //= d
    return tuple(out)


def vectorize(t: np.ndarray) -> np.ndarray:
    """Entries of ``t`` in Little-Endian order."""
    return np.asarray(t).reshape(-1, order="F")


def unfold(t: np.ndarray, mode: int) -> np.ndarray:
    """Mode-n unfolding: ``I_n x prod(other dims)``, columns Little-Endian."""
    t = np.asarray(t)
    ax = _check_mode(t, mode)
    return np.moveaxis(t, ax, 0).reshape(t.shape[ax], -1, order="F")


def fold(m: np.ndarray, shape: Sequence[int], mode: int = 1) -> np.ndarray:
    """Inverse of :func:`unfold`; also folds a flat vector when ``mode`` is 1."""
    shape = _check_shape(shape)
    m = np.asarray(m)
    if m.size != int(np.prod(shape, dtype=np.int64)):
        raise ShapeError(f"{m.size} values cannot fill a tensor of shape {shape}")
    if not 1 <= mode <= max(len(shape), 1):
        raise ModeError(f"mode {mode} is invalid for an order-{len(shape)} tensor")
    if m.ndim != 2 or not shape:
        # flat data is already Little-Endian over the target
        return m.reshape(shape, order="F")
    ax = mode - 1
    moved = (shape[ax],) + shape[:ax] + shape[ax + 1:]
    if m.shape != (shape[ax], m.size // shape[ax]):
        raise ShapeError(f"matrix of shape {m.shape} is not a mode-{mode} unfolding of {shape}")
    return np.moveaxis(m.reshape(moved, order="F"), 0, ax)


def stack(tensors: Sequence[np.ndarray]) -> np.ndarray:
    """Stack J equal-shape tensors along a new last mode."""
    if len(tensors) == 0:
        raise ValueError("cannot stack an empty list of tensors")
    first = np.shape(tensors[0])
    for j, t in enumerate(tensors[1:], start=2):
        if np.shape(t) != first:
            raise ShapeError(f"tensor {j} has shape {np.shape(t)}, expected {first}")
    return np.stack([np.asarray(t, dtype=float) for t in tensors], axis=-1)


def stack_first(tensors: Sequence[np.ndarray]) -> np.ndarray:
    """Stack along a new first mode (the last-mode stack, permuted to front)."""
    return np.moveaxis(stack(tensors), -1, 0)


def mode_n_product(t: np.ndarray, a: np.ndarray, mode: int) -> np.ndarray:
    """``t x_n a``: unfold, left-multiply by ``a``, fold back."""
    t = np.asarray(t, dtype=float)
    a = np.asarray(a, dtype=float)
    ax = _check_mode(t, mode)
    if a.ndim != 2 or a.shape[1] != t.shape[ax]:
        raise ShapeError(f"matrix of shape {a.shape} cannot act on mode {mode} of size {t.shape[ax]}")
    shape = t.shape[:ax] + (a.shape[0],) + t.shape[ax + 1:]
    return fold(a @ unfold(t, mode), shape, mode)


def contract(x: np.ndarray, n: int, y: np.ndarray, m: int) -> np.ndarray:
    """Single-mode contraction; result modes are x's remaining then y's remaining."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ax, ay = _check_mode(x, n), _check_mode(y, m)
    if x.shape[ax] != y.shape[ay]:
        raise ShapeError(f"mode {n} of x has size {x.shape[ax]}, mode {m} of y has size {y.shape[ay]}")
    return np.tensordot(x, y, axes=([ax], [ay]))


def contract_block(
    x: np.ndarray, x_modes: Sequence[int], y: np.ndarray, y_modes: Sequence[int]
) -> np.ndarray:
    """Contract an ordered block of paired modes between ``x`` and ``y``.

    ``contract_block(F, range(2, L + 2), W, range(1, L + 1))`` evaluates every
    user's demand at once.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x_modes, y_modes = list(x_modes), list(y_modes)
    if len(x_modes) != len(y_modes):
        raise ShapeError(f"block lengths differ: {len(x_modes)} vs {len(y_modes)}")
    ax = [_check_mode(x, n) for n in x_modes]
    ay = [_check_mode(y, m) for m in y_modes]
    for n, m, i, j in zip(x_modes, y_modes, ax, ay):
        if x.shape[i] != y.shape[j]:
            raise ShapeError(f"mode {n} of x (size {x.shape[i]}) does not match mode {m} of y (size {y.shape[j]})")
    return np.tensordot(x, y, axes=(ax, ay))


def scalar_product(t: np.ndarray, s: np.ndarray) -> float:
    t, s = np.asarray(t, dtype=float), np.asarray(s, dtype=float)
    if t.shape != s.shape:
        raise ShapeError(f"shapes differ: {t.shape} vs {s.shape}")
    return float(np.dot(t.ravel(), s.ravel()))


def frobenius_norm(t: np.ndarray) -> float:
    """Square root of ``<t, t>``."""
    return float(np.sqrt(scalar_product(t, t)))
