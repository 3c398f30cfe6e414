"""Counting nondecreasing l-paths and the extremal theory around them.

A nondecreasing l-path of length n is an integer sequence
``1 <= Y_1 <= ... <= Y_n = n`` that must rise strictly at step ``i`` whenever
``Y_i <= l_i``. The count ``N_n(l)`` is the numerator of every exact
probability of the shuffle.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import comb
from typing import Iterator

from cardcyclic.perm import LVector, Permutation, l_vector, saturated, staircase

ENUMERATE_MAX_N = 14
SCAN_MAX_N = 9
PERMS_MAX_N = 10


def count_paths(l: LVector) -> int:
    """``N_n(l)`` by a forward sweep over heights with running prefix sums.

    ``ways[y]`` is the number of admissible prefixes ending at height ``y``;
    one step costs O(n) big-integer additions.
    """
    n = l.n
    ways = [0] + [1] * n  # Y_1 is free in 1..n
    for i in range(1, n):
        bound = l.l[i - 1]
        nxt = [0] * (n + 1)
        below = 0  # sum of ways[y] over y < current height
        for y in range(1, n + 1):
            # come from strictly lower, or stay put when y exceeds l_i
            nxt[y] = below + (ways[y] if y > bound else 0)
            below += ways[y]
        ways = nxt
    return ways[n]


@dataclass(frozen=True)
class LPath:
    y: tuple[int, ...]

    def is_valid(self, l: LVector) -> bool:
        y, n = self.y, l.n
        if len(y) != n or y[-1] != n or y[0] < 1:
            return False
        for i in range(n - 1):
            if y[i + 1] < y[i]:
                return False
            if y[i] <= l.l[i] and y[i + 1] == y[i]:
                return False
        return all(v >= i for i, v in enumerate(y, start=1))


def iter_paths(l: LVector) -> Iterator[LPath]:
    n = l.n
    if n > ENUMERATE_MAX_N:
        raise ValueError(f"enumeration limited to n <= {ENUMERATE_MAX_N}")

    def extend(prefix: list[int]) -> Iterator[tuple[int, ...]]:
        i = len(prefix)
        if i == n:
            if prefix[-1] == n:
                yield tuple(prefix)
            return
        last = prefix[-1]
        lo = last + 1 if last <= l.l[i - 1] else last
        for y in range(lo, n + 1):
            prefix.append(y)
            yield from extend(prefix)
            prefix.pop()

    for y1 in range(1, n + 1):
        for path in extend([y1]):
            yield LPath(path)


def enumerate_paths(l: LVector) -> list[LPath]:
    return list(iter_paths(l))


def catalan(n: int) -> int:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return comb(2 * n, n) // (n + 1)


def perms_with_lvector(l: LVector) -> list[Permutation]:
    """The n permutations sharing ``l``, one per position of card ``n``.

    Card ``j`` is dropped into the row of cards ``1..j-1`` so that exactly
    ``I_j = l_{n-j} - (n-j)`` of them end up on its right; card ``n`` then goes
    anywhere.
    """
    n = l.n
    if n > PERMS_MAX_N:
        raise ValueError(f"limited to n <= {PERMS_MAX_N}")
    row: list[int] = []
    for j in range(1, n):
        inversions = l.l[n - j - 1] - (n - j) if 2 <= j <= n - 1 else 0
        row.insert(len(row) - inversions, j)
    out = []
    for pos in range(n):
        full = row[:pos] + [n] + row[pos:]
        out.append(Permutation(tuple(full)))
    return out


def all_lvectors(n: int) -> Iterator[LVector]:
    """Every valid l-vector of size n; there are (n-1)! of them."""
    ranges = [range(j, n) for j in range(1, n - 1)]
    for head in product(*ranges):
        yield LVector(n, head + ((n - 1,) if n >= 2 else ()))


@dataclass(frozen=True)
class ExtremalScan:
    n: int
    min: int
    argmin: tuple[LVector, ...]
    max: int
    argmax: tuple[LVector, ...]


def extremal_scan(n: int) -> ExtremalScan:
    if n < 1:
        raise ValueError("n must be positive")
    if n > SCAN_MAX_N:
        raise ValueError(f"exhaustive scan limited to n <= {SCAN_MAX_N}")
    counts = [(count_paths(l), l) for l in all_lvectors(n)]
    lo = min(c for c, _ in counts)
    hi = max(c for c, _ in counts)
    return ExtremalScan(
        n,
        lo,
        tuple(l for c, l in counts if c == lo),
        hi,
        tuple(l for c, l in counts if c == hi),
    )


def dyck_bijection(path: LPath) -> str:
    """Map a staircase l-path to a Dyck word over ``H``/``T``."""
    n = len(path.y)
    if not path.is_valid(staircase(n)):
        raise ValueError(f"{path.y} is not a nondecreasing path for l = (1..{n - 1})")
    parts = []
    prev = 0
    for y in path.y:
        parts.append("H" * (y - prev) + "T")
        prev = y
    return "".join(parts)


def is_dyck_word(word: str) -> bool:
    height = 0
    for ch in word:
        height += 1 if ch == "H" else -1
        if height < 0:
            return False
    return height == 0


def rises_histogram(n: int) -> dict[int, int]:
    """For ``l = (n-1, ..., n-1)``: paths grouped by their number of strict values.

    A path here climbs strictly to ``n`` in ``k`` distinct values and then
    stays, so ``k`` ranges over ``1..n``.
    """
    hist: dict[int, int] = {}
    for path in iter_paths(saturated(n)):
        k = len(set(path.y))
        hist[k] = hist.get(k, 0) + 1
    return hist


def path_count_of(p: Permutation) -> int:
    return count_paths(l_vector(p))
