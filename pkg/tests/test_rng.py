import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from cardcyclic._rng import position_block, uniform_positions


def test_range():
    for n in (1, 2, 3, 17, 2000):
        x = uniform_positions(n, 9, 4, 5000)
        assert x.min() >= 1 and x.max() <= n
        assert x.dtype == np.int64


def test_rejects_bad_bound():
    with pytest.raises(ValueError):
        uniform_positions(0, 1, 1, 3)
    with pytest.raises(ValueError):
        uniform_positions(2**32, 1, 1, 3)


@given(st.integers(1, 500), st.integers(0, 2**64 - 1), st.integers(0, 2**20), st.integers(1, 300))
@settings(max_examples=60, deadline=None)
def test_prefix_consistent(n, seed, stream, count):
    full = uniform_positions(n, seed, stream, count)
    head = uniform_positions(n, seed, stream, count // 2)
    assert np.array_equal(full[: count // 2], head)


@given(st.integers(1, 300), st.integers(0, 2**64 - 1), st.integers(1, 50))
@settings(max_examples=40, deadline=None)
def test_block_equals_separate_streams(n, seed, rows):
    streams = range(7, 7 + rows)
    block = position_block(n, seed, streams, n)
    for r, s in enumerate(streams):
        assert np.array_equal(block[r], uniform_positions(n, seed, s, n))


def test_uniformity():
    # a bound that does not divide 2**32 exercises the rejection step
    n = 7
    x = uniform_positions(n, 2024, 0, 700_000)
    counts = np.bincount(x, minlength=n + 1)[1:]
    assert chisquare(counts).pvalue > 1e-4


def test_seeds_and_streams_are_distinct():
    a = uniform_positions(1000, 1, 0, 100)
    assert not np.array_equal(a, uniform_positions(1000, 2, 0, 100))
    assert not np.array_equal(a, uniform_positions(1000, 1, 1, 100))
