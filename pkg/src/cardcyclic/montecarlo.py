"""Seeded simulation of the shuffle at large n.

Sample ``i`` of every run reads its insertion positions from stream ``i`` of
the run's seed, so results do not depend on how samples are batched or how
many worker threads are used. Workers only change wall time.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, isqrt
from typing import Callable, Sequence

import numpy as np

from cardcyclic import _kernels, _rng
from cardcyclic.exact import (
    EventSpec,
    exact_table,
    uniform_event_prob,
)
from cardcyclic.perm import all_permutations, lex_rank

WORDS_PER_CHUNK = 1 << 21  # insertion positions held in memory per batch
EXACT_WALK_MAX_N = 5


def _check_run(n: int, reps: int, seed: int) -> None:
    if n < 1:
        raise ValueError("deck size must be positive")
    if reps < 1:
        raise ValueError("reps must be positive")
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")


def _chunks(reps: int, per_row: int) -> list[range]:
    rows = max(1, WORDS_PER_CHUNK // max(per_row, 1))
    return [range(a, min(a + rows, reps)) for a in range(0, reps, rows)]


def _run(fn: Callable[[range], np.ndarray], reps: int, per_row: int, threads: int) -> np.ndarray:
    """Apply ``fn`` to stream ranges and stack the results in stream order."""
    if threads < 1:
        raise ValueError("threads must be positive")
    chunks = _chunks(reps, per_row)
    if threads == 1 or len(chunks) == 1:
        parts = [fn(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(fn, chunks))
    return np.concatenate(parts, axis=0)


def final_positions(n: int, reps: int, seed: int, threads: int = 1) -> np.ndarray:
    """``out[i, c - 1]``: position of card ``c`` after the shuffle drawn from stream ``i``."""
    _check_run(n, reps, seed)
    return _run(
        lambda s: _kernels.final_positions_batch(_rng.position_block(n, seed, s, n)),
        reps,
        n,
        threads,
    )


def leading_cards(n: int, L: int, reps: int, seed: int, threads: int = 1) -> np.ndarray:
    """``out[i, k - 1]``: card in position ``k <= L`` for stream ``i``."""
    _check_run(n, reps, seed)
    return _run(
        lambda s: _kernels.leading_cards_batch(_rng.position_block(n, seed, s, n), L),
        reps,
        n,
        threads,
    )


def trailing_cards(n: int, L: int, reps: int, seed: int, threads: int = 1) -> np.ndarray:
    """``out[i, k]``: card in position ``n - L + 1 + k`` for stream ``i``."""
    _check_run(n, reps, seed)
    return _run(
        lambda s: _kernels.trailing_cards_batch(_rng.position_block(n, seed, s, n), L),
        reps,
        n,
        threads,
    )


# --- histograms --------------------------------------------------------------


@dataclass(frozen=True)
class Histogram:
    """Counts over outcomes ``1..n``; ``bins[k - 1]`` counts outcome ``k``."""

    n: int
    bins: np.ndarray
    reps: int
    seed: int
    outcome: str = "position"
    label: str = ""

    def __post_init__(self) -> None:
        if len(self.bins) != self.n:
            raise ValueError("one bin per outcome expected")
        if int(self.bins.sum()) != self.reps:
            raise ValueError("bins must add up to reps")

    @property
    def fractions(self) -> np.ndarray:
        return self.bins / self.reps

    @property
    def stderr(self) -> np.ndarray:
        p = self.fractions
        return np.sqrt(p * (1.0 - p) / self.reps)

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.bins) / self.reps

    def window_mean(self, center: int, width: int | None = None) -> float:
        """Average fraction over ``width`` outcomes around ``center`` (default ``isqrt(n)``)."""
        width = max(1, isqrt(self.n) if width is None else width)
        lo = max(1, center - width // 2)
        hi = min(self.n, lo + width - 1)
        lo = max(1, hi - width + 1)
        return float(self.bins[lo - 1 : hi].sum()) / (self.reps * (hi - lo + 1))

    def config(self) -> dict:
        return {
            "n": self.n,
            "reps": self.reps,
            "seed": self.seed,
            "outcome": self.outcome,
            "label": self.label,
            "window": isqrt(self.n),
        }

    def rows(self) -> list[dict]:
        p, se = self.fractions, self.stderr
        return [
            {
                self.outcome: k,
                "count": int(self.bins[k - 1]),
                "fraction": float(p[k - 1]),
                "stderr": float(se[k - 1]),
            }
            for k in range(1, self.n + 1)
        ]


def _hist(values: np.ndarray, n: int, reps: int, seed: int, outcome: str, label: str) -> Histogram:
    bins = np.bincount(values, minlength=n + 1)[1:]
    return Histogram(n, bins.astype(np.int64), reps, seed, outcome, label)


def _check_card(n: int, j: int) -> None:
    if not 1 <= j <= n:
        raise ValueError(f"card {j} outside 1..{n}")


def sample_position_hist(n: int, j: int, reps: int, seed: int, threads: int = 1) -> Histogram:
    """Final position of card ``j`` over ``reps`` shuffles of the identity."""
    _check_card(n, j)
    pos = final_positions(n, reps, seed, threads)[:, j - 1]
    return _hist(pos, n, reps, seed, "position", f"card {j}")


def sample_first_card_hist(n: int, reps: int, seed: int, threads: int = 1) -> Histogram:
    cards = leading_cards(n, 1, reps, seed, threads)[:, 0]
    return _hist(cards, n, reps, seed, "card", "first position")


def sample_last_card_hist(n: int, reps: int, seed: int, threads: int = 1) -> Histogram:
    cards = trailing_cards(n, 1, reps, seed, threads)[:, -1]
    return _hist(cards, n, reps, seed, "card", "last position")


# --- joint positions ---------------------------------------------------------


@dataclass(frozen=True)
class JointSample:
    n: int
    cards: tuple[int, ...]
    positions: np.ndarray  # positions[i, k]: position of cards[k] in sample i
    reps: int
    seed: int

    def marginal(self, k: int) -> Histogram:
        return _hist(self.positions[:, k], self.n, self.reps, self.seed, "position", f"card {self.cards[k]}")

    def independence_gap(self, a: int = 0, b: int = 1) -> float:
        """Sup over the lattice of |joint CDF - product of marginal CDFs| for two columns."""
        n = self.n
        grid = np.zeros((n, n), dtype=np.int64)
        np.add.at(grid, (self.positions[:, a] - 1, self.positions[:, b] - 1), 1)
        joint = grid.cumsum(axis=0).cumsum(axis=1) / self.reps
        fa = np.cumsum(grid.sum(axis=1)) / self.reps
        fb = np.cumsum(grid.sum(axis=0)) / self.reps
        return float(np.max(np.abs(joint - np.outer(fa, fb))))

    def left_of_frequency(self, a: int = 0, b: int = 1) -> float:
        """Fraction of samples with ``cards[a]`` left of ``cards[b]``."""
        return float(np.mean(self.positions[:, a] < self.positions[:, b]))


def joint_position_sample(
    n: int, cards: Sequence[int], reps: int, seed: int, threads: int = 1
) -> JointSample:
    cards = tuple(int(c) for c in cards)
    if len(set(cards)) != len(cards):
        raise ValueError(f"duplicate cards in {cards}")
    if not cards:
        raise ValueError("at least one card needed")
    for c in cards:
        _check_card(n, c)
    cols = np.array(cards) - 1
    pos = final_positions(n, reps, seed, threads)[:, cols]
    return JointSample(n, cards, np.ascontiguousarray(pos), reps, seed)


def ecdf_sup_distance(samples: np.ndarray, cdf: Callable[[float], float]) -> float:
    """Kolmogorov distance between the empirical law of ``samples`` and ``cdf``.

    ``cdf`` must be continuous; both one-sided gaps are checked at every jump.
    """
    xs = np.sort(np.asarray(samples, dtype=np.float64))
    m = len(xs)
    uniq, first = np.unique(xs, return_index=True)
    last = np.append(first[1:], m)
    target = np.array([cdf(float(x)) for x in uniq])
    return float(max(np.max(np.abs(last / m - target)), np.max(np.abs(first / m - target))))


# --- the total variation event -----------------------------------------------


@dataclass(frozen=True)
class EventEstimate:
    n: int
    M: float
    L: int
    reps: int
    seed: int
    hits: int
    uniform: float

    @property
    def estimate(self) -> float:
        return self.hits / self.reps

    @property
    def stderr(self) -> float:
        p = self.estimate
        return math.sqrt(p * (1.0 - p) / self.reps)

    @property
    def gap(self) -> float:
        return self.estimate - self.uniform

    def __float__(self) -> float:
        return self.estimate


def estimate_event_A(n: int, M: float, L: int, reps: int, seed: int, threads: int = 1) -> EventEstimate:
    """Frequency of a card numbered ``<= M sqrt(n)`` among the first ``L`` positions."""
    spec = EventSpec(M, L)
    spec.check(n)
    head = leading_cards(n, L, reps, seed, threads)
    hits = int(np.count_nonzero((head <= spec.cutoff(n)).any(axis=1)))
    return EventEstimate(n, M, L, reps, seed, hits, uniform_event_prob(n, spec).value)


# --- repeated shuffles -------------------------------------------------------


@dataclass(frozen=True)
class WalkConfig:
    n: int
    m: int
    reps: int = 10_000
    seed: int = 0
    events: tuple[tuple[float, int], ...] = ((1.0, 1), (1.0, 4), (2.0, 16), (2.0, 48))
    pairs: tuple[tuple[float, float], ...] = ((0.3, 0.7), (0.5, 0.6), (0.1, 0.9))

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("deck size must be positive")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.reps < 1:
            raise ValueError("reps must be positive")


@dataclass(frozen=True)
class WalkStep:
    m: int
    tv: float
    stderr: float = 0.0
    statistic: str = "exact"
    tv_exact: Fraction | None = None


@dataclass(frozen=True)
class WalkReport:
    config: WalkConfig
    exact: bool
    steps: tuple[WalkStep, ...] = field(default=())

    @property
    def kind(self) -> str:
        return "exact" if self.exact else "lower bound (exploratory)"

    def tv(self) -> list[float]:
        return [s.tv for s in self.steps]


def _exact_walk(cfg: WalkConfig) -> WalkReport:
    n = cfg.n
    perms = list(all_permutations(n))
    size = len(perms)
    step_table = exact_table(n)
    weights = [step_table.counts.get(p, 0) for p in perms]
    after = [[lex_rank(s.compose(p).entries) for p in perms] for s in perms]
    nf = factorial(n)
    mu = [0] * size
    mu[lex_rank(range(1, n + 1))] = 1
    den = 1
    steps = []
    for m in range(1, cfg.m + 1):
        nxt = [0] * size
        for a, mass in enumerate(mu):
            if mass:
                row = after[a]
                for b, w in enumerate(weights):
                    nxt[row[b]] += mass * w
        mu = nxt
        den *= n**n
        tv = Fraction(sum(abs(c * nf - den) for c in mu), 2 * den * nf)
        steps.append(WalkStep(m, float(tv), 0.0, "exact", tv))
    return WalkReport(cfg, True, tuple(steps))


def _pair_cards(cfg: WalkConfig) -> list[tuple[int, int]]:
    """Card pairs for the left-of statistics; pairs that collapse at small n are dropped."""
    out = []
    for a, b in cfg.pairs:
        pair = (max(1, int(a * cfg.n)), max(1, int(b * cfg.n)))
        if pair[0] != pair[1] and pair not in out:
            out.append(pair)
    return out


def _walk_chunk(cfg: WalkConfig, streams: range) -> np.ndarray:
    """Indicator matrix ``[m, sample, statistic]`` for one batch of walks."""
    n, m = cfg.n, cfg.m
    W = _rng.position_block(n, cfg.seed, streams, n * m)
    rows = len(streams)
    cutoffs = [(EventSpec(M, L).cutoff(n), min(L, n - 1)) for M, L in cfg.events]
    pairs = _pair_cards(cfg)
    deck = np.tile(np.arange(1, n + 1, dtype=np.int64), (rows, 1))
    idx = np.arange(rows)[:, None]
    out = np.zeros((m, rows, len(cutoffs) + len(pairs)), dtype=np.bool_)
    for t in range(m):
        pos = _kernels.final_positions_batch(np.ascontiguousarray(W[:, t * n : (t + 1) * n]))
        shuffle = np.empty_like(pos)
        shuffle[idx, pos - 1] = np.arange(1, n + 1)
        deck = _kernels.compose_rows(deck, shuffle)
        col = 0
        for k, L in cutoffs:
            out[t, :, col] = (deck[:, :L] <= k).any(axis=1)
            col += 1
        where = np.empty_like(deck)
        where[idx, deck - 1] = np.arange(1, n + 1)
        for a, b in pairs:
            out[t, :, col] = where[:, a - 1] < where[:, b - 1]
            col += 1
    return out


def _sampled_walk(cfg: WalkConfig, threads: int) -> WalkReport:
    n = cfg.n
    names = [f"A(M={M:g},L={L})" for M, L in cfg.events]
    pairs = _pair_cards(cfg)
    names += [f"card {a} left of card {b}" for a, b in pairs]
    uniform = [uniform_event_prob(n, EventSpec(M, min(L, n - 1))).value for M, L in cfg.events]
    uniform += [0.5] * len(pairs)
    hits = _run(
        lambda s: _walk_chunk(cfg, s).transpose(1, 0, 2),
        cfg.reps,
        n * cfg.m,
        threads,
    ).sum(axis=0)
    steps = []
    for t in range(cfg.m):
        p = hits[t] / cfg.reps
        gaps = np.abs(p - np.array(uniform))
        best = int(np.argmax(gaps))
        se = math.sqrt(p[best] * (1.0 - p[best]) / cfg.reps)
        steps.append(WalkStep(t + 1, float(gaps[best]), se, names[best]))
    return WalkReport(cfg, False, tuple(steps))


def convolution_walk(cfg: WalkConfig, threads: int = 1) -> WalkReport:
    """Distance to uniform after ``1..m`` independent shuffles.

    Exact for ``n <= EXACT_WALK_MAX_N``. Beyond that each step reports
    ``max |p_hat(S) - U(S)|`` over a fixed family of events, a Monte Carlo
    lower bound on the total variation distance. Exploratory only.
    """
    if cfg.n <= EXACT_WALK_MAX_N:
        return _exact_walk(cfg)
    return _sampled_walk(cfg, threads)
