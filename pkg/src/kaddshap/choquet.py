"""Choquet integral evaluation: general form and the 2-additive closed form.

Inputs live in [0,1]^m. On binary inputs the integral returns the payoff of
the coalition encoded by the input, which is what lets a game double as an
interpretable local model over coalitions.
"""

from __future__ import annotations

import numpy as np

from .coalitions import Coalition
from .games import Game

_EMPTY_PAYOFF_TOL = 1e-9


def _check_unit_box(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("input must be a 1-d vector")
    if np.any((x < 0.0) | (x > 1.0)) or not np.all(np.isfinite(x)):
        raise ValueError("Choquet inputs must have every coordinate in [0, 1]")
    return x


def choquet_eval(x, game: Game) -> float:
    """Piecewise-linear aggregation of x under a dense game.

    Coordinates are sorted ascending (ties broken by ascending index, which
    cannot change the value because tied increments are zero) and each
    increment is paid the value of the coalition of coordinates at or above
    it. Requires the empty coalition's payoff to be (numerically) zero.
    """
    x = _check_unit_box(x)
    game._require_dense()
    m = game.m
    if len(x) != m:
        raise ValueError(f"input has {len(x)} coordinates, game has m={m}")
    by_mask = game.payoffs_by_mask()
    if abs(by_mask[0]) > _EMPTY_PAYOFF_TOL:
        raise ValueError(
            f"Choquet evaluation needs a game with zero empty-coalition payoff, "
            f"got {by_mask[0]!r}"
        )
    order = np.argsort(x, kind="stable")
    total = 0.0
    prev = 0.0
    tail = (1 << m) - 1
    for pos in range(m):
        j = int(order[pos])
        total += (x[j] - prev) * by_mask[tail]
        prev = x[j]
        tail &= ~(1 << j)
    return float(total)


def choquet_2add_eval(x, shapley_values, pair_interactions) -> float:
    """Closed form of the 2-additive integral from per-attribute values and
    a symmetric pairwise-interaction matrix (diagonal ignored).

    Negative interactions contribute through the maximum of the pair,
    positive ones through the minimum.
    """
    x = _check_unit_box(x)
    phi = np.asarray(shapley_values, dtype=float)
    inter = np.asarray(pair_interactions, dtype=float)
    m = len(x)
    if phi.shape != (m,):
        raise ValueError(f"expected {m} per-attribute values, got {phi.shape}")
    if inter.shape != (m, m):
        raise ValueError(f"interaction matrix must be {m}x{m}, got {inter.shape}")
    if not np.allclose(inter, inter.T, atol=1e-12):
        raise ValueError("interaction matrix must be symmetric")

    off = inter - np.diag(np.diag(inter))
    total = float(x @ (phi - 0.5 * np.sum(np.abs(off), axis=1)))
    for j in range(m):
        for jp in range(j + 1, m):
            v = off[j, jp]
            if v > 0:
                total += min(x[j], x[jp]) * v
            elif v < 0:
                total += max(x[j], x[jp]) * (-v)
    return total


def choquet_on_coalition(coalition: Coalition, game: Game) -> float:
    """Integral of the coalition's characteristic vector; equals the payoff."""
    return choquet_eval(coalition.characteristic_vector().astype(float), game)
