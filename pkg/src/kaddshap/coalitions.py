"""Coalitions as bit-sets, power-set enumeration and binomial combinatorics.

A coalition is a subset of the attribute indices ``{0, ..., m-1}``, stored as
an integer bit-mask. All enumeration follows cardinal-lexicographic order:
subsets sorted by cardinality first, ties broken lexicographically by the
sorted member list. Internal indices are 0-based; display labels are 1-based.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from .exceptions import SizeLimitError

MAX_ATTRIBUTES = 64
DENSE_CAP = 26  # full power-set structures refuse larger m


def binomial(n: int, r: int) -> int:
    """Exact binomial coefficient C(n, r); 0 when r > n."""
    if n < 0 or r < 0:
        raise ValueError(f"binomial expects nonnegative arguments, got ({n}, {r})")
    return math.comb(n, r)


@dataclass(frozen=True)
class Coalition:
    """Immutable subset of ``{0, ..., m-1}`` backed by a bit-mask."""

    mask: int
    m: int

    def __post_init__(self):
        if not 1 <= self.m <= MAX_ATTRIBUTES:
            raise SizeLimitError(
                f"attribute count must be in [1, {MAX_ATTRIBUTES}], got {self.m}"
            )
        if self.mask < 0 or self.mask >> self.m:
            raise ValueError(
                f"coalition mask {self.mask:#x} has members outside 0..{self.m - 1}"
            )

    @classmethod
    def from_members(cls, members: Iterable[int], m: int) -> "Coalition":
        mask = 0
        for j in members:
            if not 0 <= j < m:
                raise ValueError(f"member {j} outside 0..{m - 1}")
            mask |= 1 << j
        return cls(mask, m)

    @classmethod
    def empty(cls, m: int) -> "Coalition":
        return cls(0, m)

    @classmethod
    def grand(cls, m: int) -> "Coalition":
        return cls((1 << m) - 1, m)

    def members(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.m) if self.mask >> j & 1)

    def cardinality(self) -> int:
        return self.mask.bit_count()

    def contains(self, j: int) -> bool:
        return bool(self.mask >> j & 1)

    def characteristic_vector(self) -> np.ndarray:
        """Binary vector of length m whose j-th coordinate is 1 iff j is a member."""
        return characteristic_vector(self.mask, self.m)

    def labels(self) -> tuple[int, ...]:
        """1-based member labels for display."""
        return tuple(j + 1 for j in self.members())

    def __iter__(self) -> Iterator[int]:
        return iter(self.members())

    def __str__(self) -> str:
        return "{" + ",".join(str(l) for l in self.labels()) + "}"


def characteristic_vector(mask: int, m: int) -> np.ndarray:
    vec = np.zeros(m, dtype=np.int8)
    for j in range(m):
        if mask >> j & 1:
            vec[j] = 1
    return vec


def mask_from_vector(vec: Sequence[int]) -> int:
    mask = 0
    for j, v in enumerate(vec):
        if v:
            mask |= 1 << j
    return mask


def cardinal_lex_masks(m: int, k: int | None = None) -> list[int]:
    """All subset masks with at most ``k`` members, in cardinal-lexicographic order.

    ``k=None`` means the full power set. ``itertools.combinations`` over the
    sorted index range yields each cardinality class already in lexicographic
    order of the sorted member lists.
    """
    if k is None:
        k = m
    masks = []
    for r in range(k + 1):
        for combo in itertools.combinations(range(m), r):
            mask = 0
            for j in combo:
                mask |= 1 << j
            masks.append(mask)
    return masks


@dataclass(frozen=True, eq=False)
class PowerSetOrder:
    """All 2^m coalitions of m attributes in cardinal-lexicographic order."""

    m: int
    masks: tuple[int, ...]
    _rank: dict[int, int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.masks)

    def rank(self, coalition: Coalition | int) -> int:
        mask = coalition.mask if isinstance(coalition, Coalition) else coalition
        return self._rank[mask]

    def coalition(self, rank: int) -> Coalition:
        return Coalition(self.masks[rank], self.m)

    def masks_array(self) -> np.ndarray:
        return np.asarray(self.masks, dtype=np.int64)

    def __iter__(self) -> Iterator[Coalition]:
        return (Coalition(mask, self.m) for mask in self.masks)


@lru_cache(maxsize=32)
def enumerate_powerset(m: int) -> PowerSetOrder:
    """Enumerate the full power set of m attributes in cardinal-lex order.

    Dense enumeration is capped at m <= 26 so the 2^m structures stay within
    addressable memory.
    """
    if not 1 <= m <= MAX_ATTRIBUTES:
        raise SizeLimitError(
            f"attribute count must be in [1, {MAX_ATTRIBUTES}], got {m}"
        )
    if m > DENSE_CAP:
        raise SizeLimitError(
            f"dense power-set enumeration is capped at m <= {DENSE_CAP}, got m={m}"
        )
    masks = tuple(cardinal_lex_masks(m))
    rank = {mask: i for i, mask in enumerate(masks)}
    return PowerSetOrder(m=m, masks=masks, _rank=rank)


def popcount(values: np.ndarray) -> np.ndarray:
    """Element-wise population count of an integer array."""
    return np.bitwise_count(values.astype(np.uint64)).astype(np.int64)
