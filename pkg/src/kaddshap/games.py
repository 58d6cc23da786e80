"""Cooperative games, Shapley/interaction indices and the k-additive transform.

A game maps coalitions of m attributes to real payoffs. Exact operations
(Shapley value, interaction indices, the linear transform between payoffs
and interaction indices) require the dense representation: all 2^m payoffs
stored in cardinal-lexicographic rank order.

Coefficients (Bernoulli numbers, gamma terms) are computed in exact rational
arithmetic and converted to floating point only when matrices are assembled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .coalitions import (
    Coalition,
    binomial,
    cardinal_lex_masks,
    enumerate_powerset,
    popcount,
)
from .exceptions import SizeLimitError, UnsupportedRepresentationError

_CHUNK_ROWS = 256  # row block size for large transform assemblies


@lru_cache(maxsize=8)
def _bernoulli_fractions(n_max: int) -> tuple[Fraction, ...]:
    """First-kind Bernoulli numbers eta_0..eta_n_max via the defining recurrence."""
    eta = [Fraction(1)]
    for r in range(1, n_max + 1):
        acc = Fraction(0)
        for rp in range(r):
            acc += eta[rp] * binomial(r, rp) / (r - rp + 1)
        eta.append(-acc)
    return tuple(eta)


def bernoulli_numbers(n_max: int) -> np.ndarray:
    """Bernoulli numbers eta_0..eta_n_max as floats (eta_1 = -1/2 convention)."""
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    return np.array([float(v) for v in _bernoulli_fractions(n_max)])


@lru_cache(maxsize=None)
def gamma_fraction(r_prime: int, r: int) -> Fraction:
    """Exact rational transform coefficient for a column of order r_prime
    against a row whose coalition shares r members with it."""
    if not 0 <= r <= r_prime:
        raise ValueError(f"need 0 <= r <= r_prime, got r={r}, r_prime={r_prime}")
    eta = _bernoulli_fractions(r_prime)
    return sum(
        (binomial(r, l) * eta[r_prime - l] for l in range(r + 1)), Fraction(0)
    )


def gamma_coefficient(r_prime: int, r: int) -> float:
    return float(gamma_fraction(r_prime, r))


@lru_cache(maxsize=16)
def _gamma_table(k: int) -> np.ndarray:
    """Lower-triangular (k+1)x(k+1) table t[r', r] = gamma_coefficient(r', r)."""
    table = np.zeros((k + 1, k + 1))
    for rp in range(k + 1):
        for r in range(rp + 1):
            table[rp, r] = float(gamma_fraction(rp, r))
    return table


@dataclass(frozen=True, eq=False)
class Game:
    """Payoffs over coalitions of m attributes.

    Dense games store all 2^m payoffs indexed by cardinal-lexicographic rank;
    sparse games store a mask -> payoff mapping for a sampled coalition set.
    """

    m: int
    payoffs: np.ndarray | None = None
    sparse_payoffs: Mapping[int, float] | None = None

    def __post_init__(self):
        if (self.payoffs is None) == (self.sparse_payoffs is None):
            raise ValueError("exactly one of payoffs / sparse_payoffs must be given")
        if self.payoffs is not None:
            expected = 1 << self.m
            if len(self.payoffs) != expected:
                raise ValueError(
                    f"dense game on m={self.m} needs {expected} payoffs, "
                    f"got {len(self.payoffs)}"
                )

    @classmethod
    def dense(cls, m: int, payoffs: Sequence[float]) -> "Game":
        return cls(m=m, payoffs=np.asarray(payoffs, dtype=float))

    @classmethod
    def sparse(cls, m: int, mapping: Mapping[int, float]) -> "Game":
        return cls(m=m, sparse_payoffs=dict(mapping))

    @property
    def is_dense(self) -> bool:
        return self.payoffs is not None

    def value(self, coalition: Coalition | int) -> float:
        mask = coalition.mask if isinstance(coalition, Coalition) else coalition
        if self.is_dense:
            order = enumerate_powerset(self.m)
            return float(self.payoffs[order.rank(mask)])
        return float(self.sparse_payoffs[mask])

    def payoffs_by_mask(self) -> np.ndarray:
        """Dense payoffs re-indexed by coalition bit-mask."""
        self._require_dense()
        order = enumerate_powerset(self.m)
        by_mask = np.empty(1 << self.m)
        by_mask[order.masks_array()] = self.payoffs
        return by_mask

    def _require_dense(self):
        if not self.is_dense:
            raise UnsupportedRepresentationError(
                "this operation requires a dense game (all 2^m payoffs)"
            )


@dataclass(frozen=True, eq=False)
class InteractionVector:
    """Generalized interaction indices I(D) for all |D| <= k, cardinal-lex order.

    The first entry is I(empty set); entries 1..m are the per-attribute
    Shapley values.
    """

    m: int
    k: int
    values: np.ndarray

    def __post_init__(self):
        if not 1 <= self.k <= self.m:
            raise ValueError(f"need 1 <= k <= m, got k={self.k}, m={self.m}")
        expected = sum(binomial(self.m, r) for r in range(self.k + 1))
        if len(self.values) != expected:
            raise ValueError(
                f"interaction vector for m={self.m}, k={self.k} needs "
                f"{expected} entries, got {len(self.values)}"
            )

    def masks(self) -> list[int]:
        return cardinal_lex_masks(self.m, self.k)

    @property
    def empty_value(self) -> float:
        return float(self.values[0])

    def shapley_values(self) -> np.ndarray:
        """phi_j = I({j}) for each attribute j."""
        return np.asarray(self.values[1 : self.m + 1], dtype=float)

    def pair(self, j: int, j_prime: int) -> float:
        if self.k < 2:
            raise ValueError("pairwise indices require k >= 2")
        if j == j_prime:
            raise ValueError("pair interaction needs two distinct attributes")
        mask = (1 << j) | (1 << j_prime)
        return self.value_for(mask)

    def value_for(self, coalition: Coalition | int) -> float:
        mask = coalition.mask if isinstance(coalition, Coalition) else coalition
        idx = _truncated_rank(self.m, self.k)[mask]
        return float(self.values[idx])

    def pair_matrix(self) -> np.ndarray:
        """Symmetric m x m matrix of pairwise indices, zero diagonal."""
        out = np.zeros((self.m, self.m))
        if self.k < 2:
            return out
        for j in range(self.m):
            for jp in range(j + 1, self.m):
                v = self.value_for((1 << j) | (1 << jp))
                out[j, jp] = out[jp, j] = v
        return out


@lru_cache(maxsize=32)
def _truncated_rank(m: int, k: int) -> dict[int, int]:
    return {mask: i for i, mask in enumerate(cardinal_lex_masks(m, k))}


@dataclass(frozen=True, eq=False)
class TransformMatrix:
    """Linear map from truncated interaction vectors to payoffs.

    Rows follow the supplied coalition order; columns are all coalitions of
    cardinality <= k in cardinal-lex order. Entry (A, D) depends only on |D|
    and |A intersect D|.
    """

    m: int
    k: int
    row_masks: tuple[int, ...]
    values: np.ndarray

    @property
    def column_masks(self) -> list[int]:
        return cardinal_lex_masks(self.m, self.k)

    def as_fractions(self) -> list[list[Fraction]]:
        """Entry-exact rational form of the matrix."""
        cols = self.column_masks
        out = []
        for a in self.row_masks:
            row = [
                gamma_fraction(d.bit_count(), (a & d).bit_count()) for d in cols
            ]
            out.append(row)
        return out


def build_transform_matrix(
    coalitions: Sequence[Coalition | int], m: int, k: int
) -> TransformMatrix:
    """Assemble the interaction-to-payoff matrix over the given coalition rows."""
    if not 1 <= k <= m:
        raise ValueError(f"need 1 <= k <= m, got k={k}, m={m}")
    row_masks = tuple(
        c.mask if isinstance(c, Coalition) else int(c) for c in coalitions
    )
    for mask in row_masks:
        if mask < 0 or mask >> m:
            raise ValueError(f"coalition mask {mask:#x} invalid for m={m}")
    rows = np.asarray(row_masks, dtype=np.int64)
    cols = np.asarray(cardinal_lex_masks(m, k), dtype=np.int64)
    table = _gamma_table(k)
    card_d = popcount(cols)
    values = np.empty((len(rows), len(cols)))
    for start in range(0, len(rows), _CHUNK_ROWS):
        block = rows[start : start + _CHUNK_ROWS, None]
        inter = popcount(block & cols[None, :])
        values[start : start + _CHUNK_ROWS] = table[card_d[None, :], inter]
    return TransformMatrix(m=m, k=k, row_masks=row_masks, values=values)


def interactions_to_game(interactions: InteractionVector) -> Game:
    """Recover the dense game whose interaction indices truncate to the input."""
    m = interactions.m
    order = enumerate_powerset(m)  # enforces the dense cap
    t = build_transform_matrix(order.masks, m, interactions.k)
    return Game.dense(m, t.values @ interactions.values)


def _eq1_weight_table(m: int) -> np.ndarray:
    f = math.factorial
    return np.array(
        [float(Fraction(f(m - a - 1) * f(a), f(m))) for a in range(m)]
    )


def shapley_exact(game: Game) -> np.ndarray:
    """Per-attribute Shapley values of a dense game, by direct enumeration
    of marginal contributions over all coalitions."""
    game._require_dense()
    m = game.m
    by_mask = game.payoffs_by_mask()
    all_masks = np.arange(1 << m, dtype=np.int64)
    weights = _eq1_weight_table(m)
    phi = np.empty(m)
    for j in range(m):
        without_j = all_masks[(all_masks >> j) & 1 == 0]
        w = weights[popcount(without_j)]
        gains = by_mask[without_j | (1 << j)] - by_mask[without_j]
        phi[j] = float(w @ gains)
    return phi


def _eq2_weight_table(m: int) -> np.ndarray:
    f = math.factorial
    return np.array(
        [float(Fraction(f(m - a - 2) * f(a), f(m - 1))) for a in range(m - 1)]
    )


def interaction_pair(game: Game, j: int, j_prime: int) -> float:
    """Pairwise Shapley interaction index; negative = redundant effect,
    positive = complementary effect."""
    if j == j_prime:
        raise ValueError("pair interaction needs two distinct attributes")
    game._require_dense()
    m = game.m
    by_mask = game.payoffs_by_mask()
    bj, bjp = 1 << j, 1 << j_prime
    all_masks = np.arange(1 << m, dtype=np.int64)
    without = all_masks[(all_masks & (bj | bjp)) == 0]
    w = _eq2_weight_table(m)[popcount(without)]
    diff = (
        by_mask[without | bj | bjp]
        - by_mask[without | bj]
        - by_mask[without | bjp]
        + by_mask[without]
    )
    return float(w @ diff)


def _interaction_rows(m: int, row_masks: np.ndarray) -> np.ndarray:
    """Coefficient rows of the generalized interaction index.

    Row A against payoff column B carries
    (m-|B\\A|-|A|)! |B\\A|! / (m-|A|+1)! * (-1)^(|A|-|A&B|),
    the direct expansion of the defining double sum (every B splits uniquely
    into D = B\\A and D' = B&A).
    """
    f = math.factorial
    all_masks = np.arange(1 << m, dtype=np.int64)
    rows = np.empty((len(row_masks), 1 << m))
    # weight lookup indexed by (|A|, |D|)
    weight = np.zeros((m + 1, m + 1))
    for a in range(m + 1):
        for d in range(m - a + 1):
            weight[a, d] = float(Fraction(f(m - d - a) * f(d), f(m - a + 1)))
    for i, a_mask in enumerate(row_masks):
        a = int(a_mask).bit_count()
        d_card = popcount(all_masks & ~a_mask)
        dp_card = popcount(all_masks & a_mask)
        signs = np.where((a - dp_card) % 2 == 0, 1.0, -1.0)
        rows[i] = weight[a, d_card] * signs
    return rows


def interaction_general(game: Game, coalition: Coalition | int) -> float:
    """Generalized interaction index of an arbitrary coalition; coincides
    with the Shapley value at singletons and the pairwise index at pairs."""
    game._require_dense()
    mask = coalition.mask if isinstance(coalition, Coalition) else int(coalition)
    row = _interaction_rows(game.m, np.asarray([mask], dtype=np.int64))[0]
    return float(row @ game.payoffs_by_mask())


def game_to_interactions(game: Game, k: int) -> InteractionVector:
    """All interaction indices I(D), |D| <= k, from the defining sums.

    Deliberately a separate route from the matrix inverse so the two
    directions can cross-check each other.
    """
    game._require_dense()
    m = game.m
    if not 1 <= k <= m:
        raise ValueError(f"need 1 <= k <= m, got k={k}, m={m}")
    by_mask = game.payoffs_by_mask()
    row_masks = np.asarray(cardinal_lex_masks(m, k), dtype=np.int64)
    values = np.empty(len(row_masks))
    for start in range(0, len(row_masks), _CHUNK_ROWS):
        block = row_masks[start : start + _CHUNK_ROWS]
        values[start : start + len(block)] = _interaction_rows(m, block) @ by_mask
    return InteractionVector(m=m, k=k, values=values)


def is_k_additive(game: Game, k: int, tol: float = 1e-9) -> bool:
    """True iff every interaction index above cardinality k vanishes within tol."""
    game._require_dense()
    m = game.m
    if k >= m:
        return True
    by_mask = game.payoffs_by_mask()
    order = enumerate_powerset(m)
    high = np.asarray(
        [mask for mask in order.masks if mask.bit_count() > k], dtype=np.int64
    )
    for start in range(0, len(high), _CHUNK_ROWS):
        block = high[start : start + _CHUNK_ROWS]
        vals = _interaction_rows(m, block) @ by_mask
        if np.max(np.abs(vals)) > tol:
            return False
    return True
