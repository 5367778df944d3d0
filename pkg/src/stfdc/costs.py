"""Multiplication cost of evaluating a power term with an anchored exponent window."""

from __future__ import annotations


def power_cost(alpha: int, Lam: int) -> int:
    """Multiplications needed for ``W ** alpha`` when exponents are computed in windows of ``Lam``.

    ``alpha = q * Lam + r``; the anchor ``W ** (q * Lam + 1)`` costs
    ``floor(log2(q * Lam + 1))`` squarings and the remaining ``r - 1`` powers are
    one multiplication each.  A zero remainder is rewritten as ``(q - 1, Lam)``.
    """
    if alpha <= 1 or Lam < 1:
        if alpha < 0 or Lam < 1:
            raise ValueError(f"need alpha >= 0 and Lambda >= 1, got alpha={alpha}, Lambda={Lam}")
        return 0
    # divmod of alpha - 1 gives r - 1 in [0, Lam - 1] directly, which is the zero-remainder remap
    q, r1 = divmod(alpha - 1, Lam)
    anchor = q * Lam + 1
    return anchor.bit_length() - 1 + r1
