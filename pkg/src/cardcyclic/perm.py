"""Permutations of a deck, inversion statistics and the shuffle mechanics.

Positions and card numbers are 1-based everywhere in the public API: a
permutation ``p`` holds in ``p.entries[j - 1]`` the number of the card sitting
in position ``j``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations as _itertools_permutations
from typing import Iterable, Iterator, Sequence

import numpy as np

from cardcyclic import _rng


@dataclass(frozen=True, order=True)
class Permutation:
    """A deck state; ``entries[j - 1]`` is the card in position ``j``."""

    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        entries = tuple(int(c) for c in self.entries)
        object.__setattr__(self, "entries", entries)
        if sorted(entries) != list(range(1, len(entries) + 1)):
            raise ValueError(f"not a permutation of 1..{len(entries)}: {entries}")

    @property
    def n(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def card_at(self, pos: int) -> int:
        return self.entries[pos - 1]

    def position_of(self, card: int) -> int:
        return self.entries.index(card) + 1

    def positions(self) -> tuple[int, ...]:
        """Position of each card, ``result[c - 1]`` for card ``c``."""
        inv = [0] * self.n
        for pos, card in enumerate(self.entries, start=1):
            inv[card - 1] = pos
        return tuple(inv)

    def inverse(self) -> "Permutation":
        return Permutation(self.positions())

    def compose(self, other: "Permutation") -> "Permutation":
        """The deck ``(self[other[1]], ..., self[other[n]])``.

        This is the state reached from ``self`` when a shuffle moves the card
        in position ``other[p]`` to position ``p``.
        """
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        return Permutation(tuple(self.entries[k - 1] for k in other.entries))

    def __str__(self) -> str:
        return " ".join(map(str, self.entries))

    @classmethod
    def parse(cls, text: str) -> "Permutation":
        """Read the one-line form ``"3 1 2"``."""
        return cls(tuple(int(tok) for tok in text.split()))


def identity(n: int) -> Permutation:
    if n < 1:
        raise ValueError("deck size must be positive")
    return Permutation(tuple(range(1, n + 1)))


def reverse(n: int) -> Permutation:
    if n < 1:
        raise ValueError("deck size must be positive")
    return Permutation(tuple(range(n, 0, -1)))


def all_permutations(n: int) -> Iterator[Permutation]:
    """S_n in lexicographic order."""
    for entries in _itertools_permutations(range(1, n + 1)):
        yield Permutation(entries)


@dataclass(frozen=True)
class InversionProfile:
    """Counts ``I_j`` for ``j = 2..n-1``.

    ``I_j`` is the number of lower-numbered cards lying to the right of
    card ``j``.
    """

    n: int
    counts: tuple[int, ...]

    def __getitem__(self, j: int) -> int:
        if not 2 <= j <= self.n - 1:
            raise IndexError(f"I_j defined for 2 <= j <= {self.n - 1}, got {j}")
        return self.counts[j - 2]

    def as_dict(self) -> dict[int, int]:
        return {j: c for j, c in enumerate(self.counts, start=2)}


def inversion_profile(p: Permutation) -> InversionProfile:
    n = p.n
    if n < 3:
        return InversionProfile(n, ())
    pos = p.positions()
    counts = tuple(
        sum(1 for k in range(1, j) if pos[k - 1] > pos[j - 1]) for j in range(2, n)
    )
    return InversionProfile(n, counts)


@dataclass(frozen=True)
class LVector:
    """The vector ``(l_1, ..., l_{n-1})`` with ``j <= l_j <= n - 1``."""

    n: int
    l: tuple[int, ...]

    def __post_init__(self) -> None:
        l = tuple(int(v) for v in self.l)
        object.__setattr__(self, "l", l)
        if self.n < 1:
            raise ValueError("deck size must be positive")
        if len(l) != self.n - 1:
            raise ValueError(f"expected {self.n - 1} entries, got {len(l)}")
        for j, v in enumerate(l, start=1):
            if not j <= v <= self.n - 1:
                raise ValueError(f"l_{j} = {v} outside [{j}, {self.n - 1}]")

    def __str__(self) -> str:
        return "l: " + " ".join(map(str, self.l))

    @classmethod
    def parse(cls, text: str) -> "LVector":
        body = text.strip()
        if body.startswith("l:"):
            body = body[2:]
        l = tuple(int(tok) for tok in body.split())
        return cls(len(l) + 1, l)


def staircase(n: int) -> LVector:
    """``l = (1, 2, ..., n-1)``, the l-vector of the identity."""
    return LVector(n, tuple(range(1, n)))


def saturated(n: int) -> LVector:
    """``l = (n-1, ..., n-1)``, the l-vector of the reverse deck."""
    return LVector(n, (n - 1,) * (n - 1))


def l_vector(p: Permutation) -> LVector:
    n = p.n
    if n < 3:
        # l_{n-1} = n - 1 is the only coordinate
        return LVector(n, tuple(range(1, n)))
    prof = inversion_profile(p)
    l = [j + prof[n - j] for j in range(1, n - 1)]
    l.append(n - 1)
    return LVector(n, tuple(l))


def remove_reinsert(row: Permutation, card: int, pos: int) -> Permutation:
    """Take ``card`` out and put it back so that it ends in position ``pos``."""
    n = row.n
    if not 1 <= card <= n:
        raise ValueError(f"card {card} not in 1..{n}")
    if not 1 <= pos <= n:
        raise ValueError(f"position {pos} not in 1..{n}")
    rest = [c for c in row.entries if c != card]
    rest.insert(pos - 1, card)
    return Permutation(tuple(rest))


@dataclass(frozen=True)
class InsertionPlan:
    """One of the ``n**n`` ways to run a pass: who moves when, and where to."""

    order: Permutation
    positions: tuple[int, ...]

    def __post_init__(self) -> None:
        positions = tuple(int(w) for w in self.positions)
        object.__setattr__(self, "positions", positions)
        n = self.order.n
        if len(positions) != n:
            raise ValueError(f"expected {n} positions, got {len(positions)}")
        if any(not 1 <= w <= n for w in positions):
            raise ValueError(f"positions must lie in 1..{n}")

    @property
    def n(self) -> int:
        return self.order.n


def apply_plan(start: Permutation, plan: InsertionPlan) -> Permutation:
    if plan.n != start.n:
        raise ValueError(f"plan is for n={plan.n}, deck has n={start.n}")
    row = list(start.entries)
    for card, pos in zip(plan.order.entries, plan.positions):
        row.remove(card)
        row.insert(pos - 1, card)
    return Permutation(tuple(row))


def card_cyclic_plan_order(start: Permutation) -> Permutation:
    """Cards are taken in the left-to-right order of the starting deck."""
    return start


def stream_positions(n: int, seed: int, stream: int, count: int | None = None) -> np.ndarray:
    """Insertion positions in ``1..n`` drawn from the stream ``(seed, stream)``."""
    return _rng.uniform_positions(n, seed, stream, n if count is None else count)


def sample_shuffle(start: Permutation, seed: int, stream: int = 0) -> Permutation:
    """One card-cyclic pass with positions from the stream ``(seed, stream)``."""
    w = stream_positions(start.n, seed, stream)
    plan = InsertionPlan(card_cyclic_plan_order(start), tuple(int(v) for v in w))
    return apply_plan(start, plan)


def as_permutation(obj: Permutation | Sequence[int] | str) -> Permutation:
    if isinstance(obj, Permutation):
        return obj
    if isinstance(obj, str):
        return Permutation.parse(obj)
    return Permutation(tuple(obj))


def lex_rank(entries: Iterable[int]) -> int:
    """Index of a permutation in the lexicographic listing of S_n."""
    entries = list(entries)
    n = len(entries)
    rank = 0
    remaining = sorted(entries)
    fact = 1
    facts = [1] * (n + 1)
    for k in range(1, n + 1):
        fact *= k
        facts[k] = fact
    for i, c in enumerate(entries):
        idx = remaining.index(c)
        rank += idx * facts[n - 1 - i]
        remaining.pop(idx)
    return rank
