"""Exact finite-n distribution of one card-cyclic pass started from the identity.

Probabilities are kept as integer numerators over an explicit denominator
(``n**n`` for the shuffle itself). The closed-form first/last position
marginals switch to a log-space float evaluation past ``EXACT_MAX_N``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, floor, isqrt
from typing import Iterator, Mapping

import numpy as np
from scipy.special import gammaln, logsumexp

from cardcyclic import _kernels
from cardcyclic.paths import catalan, count_paths
from cardcyclic.perm import (
    LVector,
    Permutation,
    all_permutations,
    identity,
    l_vector,
    lex_rank,
    reverse,
)

EXACT_MAX_N = 300
BRUTE_MAX_N = 8
TABLE_MAX_N = 8
REVERSAL_MAX_N = 7
RANDOM_ORDER_MAX_N = 5


class SizeError(ValueError):
    """Requested deck size exceeds an enumeration guard."""


def _guard(n: int, limit: int, what: str) -> None:
    if n < 1:
        raise ValueError("deck size must be positive")
    if n > limit:
        raise SizeError(f"{what} needs n <= {limit} ({limit}! states), got n={n}")


@dataclass(frozen=True, eq=False)
class ExactProb:
    """A probability, exact when ``mode == "exact"``, log-space float otherwise."""

    numerator: int | None
    denominator: int | None
    log: float
    mode: str = "exact"

    @classmethod
    def of(cls, numerator: int, denominator: int) -> "ExactProb":
        if denominator <= 0 or not 0 <= numerator <= denominator:
            raise ValueError(f"not a probability: {numerator}/{denominator}")
        return cls(numerator, denominator, _log_ratio(numerator, denominator), "exact")

    @classmethod
    def from_log(cls, log_value: float) -> "ExactProb":
        return cls(None, None, float(log_value), "log")

    @property
    def is_exact(self) -> bool:
        return self.mode == "exact"

    @property
    def fraction(self) -> Fraction:
        if not self.is_exact:
            raise ValueError("log-space probability has no exact value")
        return Fraction(self.numerator, self.denominator)

    @property
    def value(self) -> float:
        if self.is_exact:
            return float(self.fraction)
        return math.exp(self.log)

    def __float__(self) -> float:
        return self.value

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ExactProb):
            if self.is_exact and other.is_exact:
                return self.numerator * other.denominator == other.numerator * self.denominator
            return NotImplemented if not (self.is_exact or other.is_exact) else False
        if isinstance(other, (Fraction, int)) and self.is_exact:
            return self.fraction == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.fraction) if self.is_exact else hash(self.log)

    def __repr__(self) -> str:
        if self.is_exact:
            return f"ExactProb({self.numerator}/{self.denominator})"
        return f"ExactProb(log={self.log!r})"


def _log_ratio(num: int, den: int) -> float:
    if num == 0:
        return -math.inf
    # math.log accepts arbitrarily large ints
    return math.log(num) - math.log(den)


# --- single permutations -----------------------------------------------------


@lru_cache(maxsize=65536)
def _count_for(l: LVector) -> int:
    return count_paths(l)


def exact_prob(sigma: Permutation) -> ExactProb:
    """``N_n(l(sigma)) / n**n``."""
    n = sigma.n
    return ExactProb.of(_count_for(l_vector(sigma)), n**n)


# --- tables ------------------------------------------------------------------


@dataclass(frozen=True)
class DistributionTable:
    """Integer weights over S_n with a common denominator."""

    n: int
    counts: Mapping[Permutation, int]
    denominator: int
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        ordered = dict(sorted(self.counts.items()))
        object.__setattr__(self, "counts", ordered)

    def prob(self, sigma: Permutation) -> ExactProb:
        return ExactProb.of(self.counts.get(sigma, 0), self.denominator)

    def items(self) -> Iterator[tuple[Permutation, ExactProb]]:
        for sigma, c in self.counts.items():
            yield sigma, ExactProb.of(c, self.denominator)

    def total(self) -> Fraction:
        return Fraction(sum(self.counts.values()), self.denominator)

    def __len__(self) -> int:
        return len(self.counts)

    def marginal(self, key) -> dict[int, Fraction]:
        """Law of ``key(sigma)``, e.g. ``lambda s: s.card_at(1)``."""
        acc: dict[int, int] = {}
        for sigma, c in self.counts.items():
            k = key(sigma)
            acc[k] = acc.get(k, 0) + c
        return {k: Fraction(v, self.denominator) for k, v in sorted(acc.items())}


def _table_from_tally(n: int, tally: np.ndarray, denominator: int, label: str) -> DistributionTable:
    counts = {
        sigma: int(c) for sigma, c in zip(all_permutations(n), tally) if c
    }
    return DistributionTable(n, counts, denominator, label)


def brute_force_dist(n: int) -> DistributionTable:
    """Tally all ``n**n`` plans from the identity, cards taken in order 1..n."""
    _guard(n, BRUTE_MAX_N, "brute force")
    start = np.arange(1, n + 1, dtype=np.int64)
    tally = _kernels.tally_plans(start, start)
    return _table_from_tally(n, tally, n**n, "brute force")


def exact_table(n: int) -> DistributionTable:
    """``sigma -> N_n(l(sigma))`` over all of S_n."""
    _guard(n, TABLE_MAX_N, "full table")
    counts = {sigma: _count_for(l_vector(sigma)) for sigma in all_permutations(n)}
    return DistributionTable(n, counts, n**n, "path count")


def uniform_table(n: int) -> DistributionTable:
    _guard(n, TABLE_MAX_N, "uniform table")
    return DistributionTable(n, {s: 1 for s in all_permutations(n)}, factorial(n), "uniform")


def tv_to_uniform(n: int, table: DistributionTable | None = None) -> Fraction:
    """Half the L1 distance to the uniform law on S_n, as an exact rational."""
    table = exact_table(n) if table is None else table
    nf = factorial(n)
    den = table.denominator
    total = 0
    for sigma in all_permutations(n):
        total += abs(table.counts.get(sigma, 0) * nf - den)
    return Fraction(total, 2 * den * nf)


def separation_distance(n: int) -> Fraction:
    """``max_sigma (1 - p(sigma) / U(sigma))``.

    Exact maximisation over S_n up to ``TABLE_MAX_N``; beyond that the
    minimum of ``p`` is ``2**(n-1) / n**n``, so the value is closed form.
    """
    if n < 1:
        raise ValueError("deck size must be positive")
    nf = factorial(n)
    if n <= TABLE_MAX_N:
        smallest = min(exact_table(n).counts.values())
    else:
        smallest = 2 ** (n - 1)
    return 1 - Fraction(smallest * nf, n**n)


@dataclass(frozen=True)
class RatioBounds:
    n: int
    lower: Fraction  # min over sigma of p / U
    upper: Fraction  # max over sigma of p / U
    lower_asymptotic: float
    upper_asymptotic: float


def ratio_bounds(n: int) -> RatioBounds:
    """Extremes of ``p(sigma) * n!`` next to their large-n approximations."""
    nf = factorial(n)
    lower = Fraction(nf * 2 ** (n - 1), n**n)
    upper = Fraction(nf * catalan(n), n**n)
    return RatioBounds(
        n,
        lower,
        upper,
        math.sqrt(math.pi * n / 2) * (2 / math.e) ** n,
        math.sqrt(2) / n * (4 / math.e) ** n,
    )


# --- closed-form marginals ---------------------------------------------------


def _resolve_mode(n: int, mode: str) -> str:
    if mode == "auto":
        return "exact" if n <= EXACT_MAX_N else "log"
    if mode not in ("exact", "log"):
        raise ValueError(f"unknown mode {mode!r}")
    return mode


def _check_card(n: int, j: int) -> None:
    if n < 1:
        raise ValueError("deck size must be positive")
    if not 1 <= j <= n:
        raise ValueError(f"card {j} outside 1..{n}")


def first_pos_prob(n: int, j: int, mode: str = "auto") -> ExactProb:
    """Probability that card ``j`` ends in the first position.

    Card ``j`` either lands in front and is never overtaken, or lands at
    position ``k >= 2`` and the cards around it clear out; summed over ``k``
    with ``r = n - j - k + 1`` this is::

        (n-1)**(n-j) * n**(j-1) + sum_{r=0}^{n-j-1} (n-1)**r * (n-1)! / r!

    over ``n**n``.
    """
    _check_card(n, j)
    if j == n:
        return ExactProb.of(1, n)
    if _resolve_mode(n, mode) == "exact":
        head = (n - 1) ** (n - j) * n ** (j - 1)
        tail = 0
        if n - j - 1 >= 0:
            # T_r = (n-1)**r (n-1)!/r!, built upward from T_0 = (n-1)!
            t = factorial(n - 1)
            tail = t
            for r in range(1, n - j):
                t = t * (n - 1) // r
                tail += t
        return ExactProb.of(head + tail, n**n)
    if n == 1:
        return ExactProb.from_log(0.0)
    logs = [-math.log(n) + (n - j) * math.log1p(-1.0 / n)]
    if n - j - 1 >= 0:
        r = np.arange(0, n - j, dtype=np.float64)
        series = logsumexp(r * math.log(n - 1) - gammaln(r + 1))
        logs.append(gammaln(n) - n * math.log(n) + series)
    return ExactProb.from_log(float(logsumexp(logs)))


def last_pos_prob(n: int, j: int, mode: str = "auto") -> ExactProb:
    """Probability that card ``j`` ends in the last position.

    Numerator ``sum_{k=j}^{n} k**(j-1) (k-1)**(k-j) (n-1)!/(k-1)!`` over ``n**n``,
    with ``0**0 = 1``. Card ``n`` is uniform, so ``j = n`` gives ``1/n`` exactly.
    """
    _check_card(n, j)
    if j == n:
        return ExactProb.of(1, n)
    if _resolve_mode(n, mode) == "exact":
        total = 0
        falling = 1  # (n-1)!/(k-1)!
        for k in range(n, j - 1, -1):
            total += k ** (j - 1) * (k - 1) ** (k - j) * falling
            falling *= k - 1
        return ExactProb.of(total, n**n)
    m = np.arange(j - 1, n, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(m > 0, m * np.log(np.where(m > 0, m, 1.0)), 0.0) - gammaln(m + 1)
        if j > 1:
            terms = terms + (j - 1) * np.log1p(1.0 / m)
    log_sum = logsumexp(terms)
    return ExactProb.from_log(float(gammaln(n) - n * math.log(n) + log_sum))


def marginal_first(n: int, mode: str = "auto") -> list[ExactProb]:
    return [first_pos_prob(n, j, mode) for j in range(1, n + 1)]


def marginal_last(n: int, mode: str = "auto") -> list[ExactProb]:
    return [last_pos_prob(n, j, mode) for j in range(1, n + 1)]


def power_sum(n: int) -> float:
    """``log sum_{m=1}^{n-1} m**m / m!`` evaluated in log space."""
    if n < 2:
        raise ValueError("needs n >= 2")
    m = np.arange(1, n, dtype=np.float64)
    return float(logsumexp(m * np.log(m) - gammaln(m + 1)))


# --- reversed order and random order -----------------------------------------


def order_reversal_prob(sigma: Permutation) -> ExactProb:
    """Chance of reaching the identity from ``sigma`` moving cards n, n-1, ..., 1."""
    n = sigma.n
    _guard(n, REVERSAL_MAX_N, "order reversal")
    start = np.array(sigma.entries, dtype=np.int64)
    order = np.array(reverse(n).entries, dtype=np.int64)
    tally = _kernels.tally_plans(start, order)
    return ExactProb.of(int(tally[lex_rank(identity(n).entries)]), n**n)


def randomized_order_dist(n: int) -> DistributionTable:
    """Removal order drawn uniformly from S_n, then a uniform plan."""
    _guard(n, RANDOM_ORDER_MAX_N, "random order")
    start = np.arange(1, n + 1, dtype=np.int64)
    tally = np.zeros(factorial(n), dtype=np.int64)
    for tau in all_permutations(n):
        tally += _kernels.tally_plans(start, np.array(tau.entries, dtype=np.int64))
    return _table_from_tally(n, tally, factorial(n) * n**n, "random order")


# --- the events used for the total variation lower bound ----------------------


@dataclass(frozen=True)
class EventSpec:
    """Some card numbered ``<= M sqrt(n)`` sits in one of the first ``L`` positions."""

    M: float
    L: int

    def __post_init__(self) -> None:
        if not self.M > 0 or not math.isfinite(self.M):
            raise ValueError("M must be a positive real")
        if int(self.L) != self.L or self.L < 1:
            raise ValueError("L must be a positive integer")

    def cutoff(self, n: int) -> int:
        """``floor(M sqrt(n))``, computed without rounding error."""
        x = Fraction(self.M) ** 2 * n
        return isqrt(floor(x))

    def check(self, n: int) -> None:
        if not self.L < n:
            raise ValueError(f"need L < n, got L={self.L}, n={n}")

    def contains(self, sigma: Permutation) -> bool:
        k = self.cutoff(sigma.n)
        return any(c <= k for c in sigma.entries[: self.L])


def event_prob(spec: EventSpec, table: DistributionTable) -> ExactProb:
    spec.check(table.n)
    mass = sum(c for sigma, c in table.counts.items() if spec.contains(sigma))
    return ExactProb.of(mass, table.denominator)


def uniform_event_prob(n: int, spec: EventSpec) -> ExactProb:
    """``1 - C(n - K, L) / C(n, L)`` with ``K = floor(M sqrt(n))``."""
    spec.check(n)
    k = min(spec.cutoff(n), n)
    den = comb(n, spec.L)
    return ExactProb.of(den - comb(n - k, spec.L), den)

