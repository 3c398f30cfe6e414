"""Compiled inner loops: brute-force plan tallies and the fast pass simulator."""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _fenwick_init(tree, n, size):
    """Unit weights on ``1..n`` plus one sentinel at ``n + 1`` that no query passes."""
    for i in range(1, size + 1):
        tree[i] = 0
    for i in range(1, size + 1):
        if i <= n:
            tree[i] += 1
        elif i == n + 1:
            tree[i] += 4 * n + 4
        parent = i + (i & (-i))
        if parent <= size:
            tree[parent] += tree[i]


@njit(cache=True)
def _fenwick_add(tree, size, i, delta):
    while i <= size:
        tree[i] += delta
        i += i & (-i)


@njit(cache=True)
def _fenwick_last_le(tree, size, target):
    """Largest index whose prefix sum is ``<= target`` (entries nonnegative)."""
    pos = 0
    step = size
    while step > 0:
        nxt = pos + step
        v = tree[nxt]
        if v <= target:
            pos = nxt
            target -= v
        step >>= 1
    return pos


@njit(cache=True)
def _pass_positions(w, n, size, tree, ranks, out):
    """Final position of every card after one pass from the identity.

    ``w[i - 1]`` is where card ``i`` is reinserted. Card ``i`` is always the
    leftmost card not yet moved, and unmoved cards keep their relative order,
    so the deck is described by ``c[u]``: how many moved cards sit left of
    unmoved card ``u``. The first tree stores ``1 + (c[u] - c[u-1])``, whose
    prefix sums are ``u + c[u]``. That gives each card's rank among the moved
    cards when it lands; a backward sweep over free slots turns ranks into
    final positions.
    """
    _fenwick_init(tree, n, size)
    for i in range(1, n + 1):
        left = w[i - 1] - 1
        u = _fenwick_last_le(tree, size, left + i)
        if u < i:
            u = i
        k = u - i  # unmoved cards left of the insertion point
        ranks[i - 1] = left - k
        if i + k + 1 <= n:
            _fenwick_add(tree, size, i + k + 1, 1)
    _fenwick_init(tree, n, size)
    for i in range(n, 0, -1):
        slot = _fenwick_last_le(tree, size, ranks[i - 1]) + 1
        _fenwick_add(tree, size, slot, -1)
        out[i - 1] = slot


@njit(cache=True, nogil=True)
def final_positions_batch(W):
    """Rows of card positions, ``out[r, c - 1]``, for each row of insertions."""
    reps, n = W.shape
    size = 1
    while size < n + 1:
        size *= 2
    out = np.empty((reps, n), dtype=np.int64)
    tree = np.zeros(size + 1, dtype=np.int32)
    ranks = np.zeros(n, dtype=np.int32)
    for r in range(reps):
        _pass_positions(W[r], n, size, tree, ranks, out[r])
    return out


@njit(cache=True, nogil=True)
def leading_cards_batch(W, L):
    """Cards in final positions ``1..L`` for each row of insertions.

    Only the ``L`` leftmost moved cards are tracked, each with the number of
    unmoved cards to its left; the moved cards' relative order never changes,
    so after the last step the list is the head of the deck. O(nL) per row.
    """
    reps, n = W.shape
    L = min(L, n)
    out = np.zeros((reps, L), dtype=np.int64)
    cards = np.zeros(L + 1, dtype=np.int64)
    unmoved_left = np.zeros(L + 1, dtype=np.int64)
    for r in range(reps):
        size = 0
        for i in range(1, n + 1):
            # card i is the leftmost unmoved card: it sits left of every
            # tracked card that still has an unmoved card on its left
            for g in range(size):
                if unmoved_left[g] > 0:
                    unmoved_left[g] -= 1
            left = W[r, i - 1] - 1
            rank = 0
            while rank < size and rank + 1 + unmoved_left[rank] <= left:
                rank += 1
            if rank == L:
                continue
            for g in range(min(size, L - 1), rank, -1):
                cards[g] = cards[g - 1]
                unmoved_left[g] = unmoved_left[g - 1]
            cards[rank] = i
            unmoved_left[rank] = left - rank
            if size < L:
                size += 1
        for g in range(L):
            out[r, g] = cards[g]
    return out


@njit(cache=True, nogil=True)
def trailing_cards_batch(W, L):
    """Cards in final positions ``n-L+1..n`` (left to right) for each row.

    Mirror image of :func:`leading_cards_batch`: track the ``L`` rightmost
    moved cards with the number of unmoved cards to their right.
    """
    reps, n = W.shape
    L = min(L, n)
    out = np.zeros((reps, L), dtype=np.int64)
    cards = np.zeros(L + 1, dtype=np.int64)
    unmoved_right = np.zeros(L + 1, dtype=np.int64)
    for r in range(reps):
        size = 0
        for i in range(1, n + 1):
            unmoved = n - i + 1  # including card i
            # card i lies right of a moved card only when no unmoved card is left of it
            for g in range(size):
                if unmoved_right[g] == unmoved:
                    unmoved_right[g] -= 1
            right = n - W[r, i - 1]
            rank = 0
            while rank < size and rank + 1 + unmoved_right[rank] <= right:
                rank += 1
            if rank == L:
                continue
            for g in range(min(size, L - 1), rank, -1):
                cards[g] = cards[g - 1]
                unmoved_right[g] = unmoved_right[g - 1]
            cards[rank] = i
            unmoved_right[rank] = right - rank
            if size < L:
                size += 1
        for g in range(L):
            out[r, L - 1 - g] = cards[g]
    return out


@njit(cache=True)
def _lex_rank(row, n, facts, used):
    for i in range(n + 1):
        used[i] = 0
    rank = 0
    for i in range(n):
        c = row[i]
        smaller = 0
        for v in range(1, c):
            if used[v] == 0:
                smaller += 1
        used[c] = 1
        rank += smaller * facts[n - 1 - i]
    return rank


@njit(cache=True)
def _apply(start, order, w, n, row):
    for i in range(n):
        row[i] = start[i]
    for t in range(n):
        card = order[t]
        i = 0
        while row[i] != card:
            i += 1
        # close the gap, then open one at w[t] - 1
        for k in range(i, n - 1):
            row[k] = row[k + 1]
        dest = w[t] - 1
        for k in range(n - 1, dest, -1):
            row[k] = row[k - 1]
        row[dest] = card


@njit(cache=True)
def tally_plans(start, order):
    """Counts of final decks, indexed by lexicographic rank, over all n**n plans."""
    n = start.shape[0]
    facts = np.ones(n + 1, dtype=np.int64)
    for k in range(1, n + 1):
        facts[k] = facts[k - 1] * k
    counts = np.zeros(facts[n], dtype=np.int64)
    w = np.ones(n, dtype=np.int64)
    row = np.empty(n, dtype=np.int64)
    used = np.zeros(n + 1, dtype=np.int64)
    while True:
        _apply(start, order, w, n, row)
        counts[_lex_rank(row, n, facts, used)] += 1
        # odometer over {1..n}^n
        t = n - 1
        while t >= 0 and w[t] == n:
            w[t] = 1
            t -= 1
        if t < 0:
            break
        w[t] += 1
    return counts


@njit(cache=True, nogil=True)
def compose_rows(decks, shuffles):
    """Row-wise ``deck[shuffle[p]]``: apply an identity-started pass to each deck."""
    reps, n = decks.shape
    out = np.empty_like(decks)
    for r in range(reps):
        for p in range(n):
            out[r, p] = decks[r, shuffles[r, p] - 1]
    return out


@njit(cache=True, nogil=True)
def lemire_rows(words, n, threshold, out):
    """Fill ``out[r]`` with the first accepted draws in ``1..n`` from ``words[r]``.

    Returns a flag per row, false when the row ran out of words.
    """
    rows, m = words.shape
    count = out.shape[1]
    n64 = np.uint64(n)
    low = np.uint64(0xFFFFFFFF)
    shift = np.uint64(32)
    thr = np.uint64(threshold)
    ok = np.ones(rows, dtype=np.bool_)
    for r in range(rows):
        k = 0
        i = 0
        while k < count and i < m:
            prod = np.uint64(words[r, i]) * n64
            if (prod & low) >= thr:
                out[r, k] = np.int64(prod >> shift) + 1
                k += 1
            i += 1
        if k < count:
            ok[r] = False
    return ok
