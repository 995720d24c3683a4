"""Pair partitions and order-equivalence classes of index words.

Two kinds of combinatorial objects drive every moment formula here:

* perfect pairings of word positions ``{1..2k}`` together with their
  crossing count, which carry the Wick weights, and
* equivalence classes of integer words under order equivalence
  (``i(k) <= i(l)`` iff ``j(k) <= j(l)``), i.e. ordered set partitions,
  which index the coefficients of the moment limit theorem.

Everything is exact: enumeration orders are deterministic (lexicographic
on the canonical representations) and the per-class densities are
returned as ``Fraction`` values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import SizeLimitError

# Default guards keep desk-scale runs in seconds; callers may override.
MAX_PAIRING_WORD = 14
MAX_ORDER_WORD = 8


@dataclass(frozen=True)
class PairPartition:
    """Perfect pairing of ``{1..2k}``, pairs sorted by first element."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        seen = [e for pair in self.pairs for e in pair]
        n = 2 * len(self.pairs)
        if sorted(seen) != list(range(1, n + 1)):
            raise ValueError(f"pairs must cover 1..{n} exactly once: {self.pairs}")
        for a, b in self.pairs:
            if not a < b:
                raise ValueError(f"pair ({a}, {b}) must be increasing")
        if list(self.pairs) != sorted(self.pairs):
            raise ValueError("pairs must be sorted by first element")

    @property
    def k(self) -> int:
        """Number of blocks (pairs)."""
        return len(self.pairs)


@dataclass(frozen=True)
class OrderClass:
    """Canonical representative of an order-equivalence class.

    The representative is the rank-compressed word: each entry replaced
    by the rank (1-based) of its value among the distinct values.  The
    set of values is then exactly ``{1..k}`` where ``k`` is the number
    of blocks.
    """

    rep: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.rep:
            raise ValueError("empty word has no order class")
        values = set(self.rep)
        if values != set(range(1, len(values) + 1)):
            raise ValueError(
                f"representative {self.rep} is not rank-compressed; "
                f"use class_of() to canonicalize"
            )

    @property
    def k(self) -> int:
        """Number of blocks, i.e. distinct values in the word."""
        return len(set(self.rep))

    @property
    def n(self) -> int:
        """Word length."""
        return len(self.rep)

    def blocks(self) -> tuple[tuple[int, ...], ...]:
        """Positions (1-based) grouped by value, in value order."""
        out: list[list[int]] = [[] for _ in range(self.k)]
        for pos, v in enumerate(self.rep, start=1):
            out[v - 1].append(pos)
        return tuple(tuple(b) for b in out)


def enumerate_pair_partitions(
    n: int, *, max_n: int = MAX_PAIRING_WORD
) -> list[PairPartition]:
    """All perfect pairings of ``{1..n}`` in lexicographic order.

    Odd ``n`` yields the empty list (no pairing exists).
    """
    if n < 1:
        raise ValueError(f"word length must be positive, got {n}")
    if n > max_n:
        raise SizeLimitError(
            f"pairing enumeration guard: n={n} exceeds {max_n} "
            f"({_double_factorial(max_n - 1)} pairings); raise max_n to override"
        )
    if n % 2:
        return []
    return [PairPartition(p) for p in _pairings_raw(n)]


@lru_cache(maxsize=None)
def _pairings_raw(n: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    out: list[tuple[tuple[int, int], ...]] = []

    def rec(free: tuple[int, ...], acc: tuple[tuple[int, int], ...]) -> None:
        if not free:
            out.append(acc)
            return
        a = free[0]
        rest = free[1:]
        for i, b in enumerate(rest):
            rec(rest[:i] + rest[i + 1 :], acc + ((a, b),))

    rec(tuple(range(1, n + 1)), ())
    return tuple(out)


def _double_factorial(m: int) -> int:
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def crossings(p: PairPartition) -> int:
    """Number of crossing pairs ``a < c < b < d`` with (a,b), (c,d) in p."""
    count = 0
    pairs = p.pairs
    for i in range(len(pairs)):
        a, b = pairs[i]
        for j in range(i + 1, len(pairs)):
            c, d = pairs[j]
            # pairs are sorted, so a < c always
            if c < b < d:
                count += 1
    return count


def class_of(word: tuple[int, ...]) -> OrderClass:
    """Canonical order class of an integer word (rank compression)."""
    if not word:
        raise ValueError("empty word has no order class")
    if any(not isinstance(v, int) or v < 1 for v in word):
        raise ValueError(f"word entries must be positive integers: {word}")
    rank = {v: r for r, v in enumerate(sorted(set(word)), start=1)}
    return OrderClass(tuple(rank[v] for v in word))


def enumerate_order_classes(
    n: int, *, max_n: int = MAX_ORDER_WORD
) -> list[OrderClass]:
    """All order classes of words of length ``n``, lexicographic order.

    The count is the n-th Fubini number (1, 3, 13, 75, 541, ...).
    """
    if n < 1:
        raise ValueError(f"word length must be positive, got {n}")
    if n > max_n:
        raise SizeLimitError(
            f"order-class enumeration guard: n={n} exceeds {max_n}; "
            f"raise max_n to override"
        )
    return [OrderClass(rep) for rep in _order_reps(n)]


@lru_cache(maxsize=None)
def _order_reps(n: int) -> tuple[tuple[int, ...], ...]:
    # Depth-first in value order emits representatives lexicographically.
    # A prefix is viable when the values it skipped below its maximum can
    # still be filled by the remaining positions.
    out: list[tuple[int, ...]] = []
    word = [0] * n

    def rec(depth: int, used: frozenset[int], top: int) -> None:
        if depth == n:
            if len(used) == top:
                out.append(tuple(word))
            return
        remaining = n - depth - 1
        for v in range(1, n + 1):
            new_used = used | {v}
            new_top = max(top, v)
            if new_top - len(new_used) > remaining:
                continue
            word[depth] = v
            rec(depth + 1, new_used, new_top)

    rec(0, frozenset(), 0)
    return tuple(out)


def count_in_class(s: OrderClass, big_n: int) -> int:
    """Number of words ``{1..n} -> {1..big_n}`` order-equivalent to s.

    Picking which ``k`` values out of ``big_n`` realize the blocks
    determines the word, so the count is ``binomial(big_n, k)``.
    """
    if big_n < 1:
        raise ValueError(f"range size must be positive, got {big_n}")
    return math.comb(big_n, s.k)


def alpha(s: OrderClass) -> Fraction:
    """Asymptotic density of the class: ``1 / k!`` exactly."""
    return Fraction(1, math.factorial(s.k))


def pairing_of(s: OrderClass) -> PairPartition | None:
    """The pairing whose pairs are the blocks of s, if all blocks have size 2."""
    blocks = s.blocks()
    if any(len(b) != 2 for b in blocks):
        return None
    return PairPartition(tuple(sorted((b[0], b[1]) for b in blocks)))
