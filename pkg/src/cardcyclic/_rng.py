"""Counter-based random streams addressed by ``(seed, stream)``.

Every stream is a Philox4x64 generator keyed by the pair, so sample ``i`` of a
run always sees the same numbers no matter how the work is split up.
Bounded integers use Lemire's multiply-shift with rejection on 32-bit words,
which keeps them exactly uniform.
"""
from __future__ import annotations

import math

import numpy as np

from cardcyclic import _kernels

_MASK64 = (1 << 64) - 1


def _bitgen(seed: int, stream: int) -> np.random.Philox:
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    return np.random.Philox(key=key)


def _rekey(bg: np.random.Philox, seed: int, stream: int) -> None:
    bg.state = {
        "bit_generator": "Philox",
        "state": {
            "counter": np.zeros(4, dtype=np.uint64),
            "key": np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64),
        },
        "buffer": np.zeros(4, dtype=np.uint64),
        "buffer_pos": 4,
        "has_uint32": 0,
        "uinteger": 0,
    }


def _threshold(n: int) -> np.uint64:
    if not 1 <= n < 2**32:
        raise ValueError("n must lie in [1, 2**32)")
    return np.uint64(((1 << 32) - n) % n)


def _first_words(count: int) -> int:
    return (count + 1) // 2 + 1


def _draw(bg: np.random.Philox, n: int, count: int) -> np.ndarray:
    threshold = _threshold(n)
    n64 = np.uint64(n)
    parts = []
    have = 0
    words = _first_words(count)
    while have < count:
        cand = bg.random_raw(words).view(np.uint32).astype(np.uint64) * n64
        keep = (cand & np.uint64(0xFFFFFFFF)) >= threshold
        vals = (cand[keep] >> np.uint64(32)).astype(np.int64) + 1
        parts.append(vals)
        have += len(vals)
        words = (count - have + 1) // 2 + 1
    return np.concatenate(parts)[:count] if parts else np.empty(0, np.int64)


def uniform_positions(n: int, seed: int, stream: int, count: int) -> np.ndarray:
    """``count`` iid uniform draws from ``1..n`` off stream ``(seed, stream)``."""
    return _draw(_bitgen(seed, stream), n, count)


def position_block(n: int, seed: int, streams: range | np.ndarray, count: int) -> np.ndarray:
    """Rows of ``count`` draws, row ``r`` taken from stream ``streams[r]``.

    Same values as calling :func:`uniform_positions` once per stream: each
    row is the first ``count`` accepted words of its stream. Raw words for
    all rows, plus a margin for rejections, are drawn first and reduced
    together; a row that runs short is redrawn on its own.
    """
    streams = list(streams)
    rows = len(streams)
    out = np.empty((rows, count), dtype=np.int64)
    if not rows or not count:
        return out
    threshold = _threshold(n)
    expected = count * int(threshold) / 2**32
    margin = math.ceil(expected + 6.0 * math.sqrt(expected)) // 2 + 1
    words = _first_words(count) + margin
    raw = np.empty((rows, words), dtype=np.uint64)
    bg = _bitgen(seed, streams[0])
    for r, s in enumerate(streams):
        if r:
            _rekey(bg, seed, s)
        raw[r] = bg.random_raw(words)
    ok = _kernels.lemire_rows(raw.view(np.uint32), n, int(threshold), out)
    for r in np.flatnonzero(~ok):
        _rekey(bg, seed, streams[r])
        out[r] = _draw(bg, n, count)
    return out
