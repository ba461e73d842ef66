import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaitbench import FrameSequence
from gaitbench.errors import SequenceTooShort
from gaitbench.temporal import freeze, freeze_indices, freeze_source_map, sampling, sampling_source_map


def indexed_seq(n):
    """Frame t is filled with the value t, so outputs reveal their source index."""
    return FrameSequence(np.broadcast_to(np.arange(n, dtype=np.uint8)[:, None, None, None], (n, 4, 4, 3)).copy())


def sources(seq):
    return [int(f[0, 0, 0]) for f in seq]


def test_freeze_t10_sev3_replaces_one():
    seq = indexed_seq(10)
    out = sources(freeze(seq, 3, 0))
    assert len(out) == 10
    assert sum(a != b for a, b in zip(out, range(10))) == 1
    assert set(out) <= set(range(10))


@pytest.mark.parametrize("sev,k", [(1, 12), (2, 6), (3, 3), (4, 2), (5, 3)])
def test_freeze_counts_t30(sev, k):
    # round-half-away(p * 30), at least 1
    assert len(freeze_indices(30, sev, 0)) == k


def test_freeze_never_touches_frame0():
    for seed in range(20):
        assert freeze_source_map(12, 1, seed)[0] == 0


def test_freeze_too_short():
    with pytest.raises(SequenceTooShort):
        freeze(indexed_seq(1), 1, 0)


def test_freeze_two_frames():
    assert sources(freeze(indexed_seq(2), 4, 0)) == [0, 0]


def test_sampling_example():
    assert sampling_source_map(8, 1).tolist() == [0, 0, 2, 2, 4, 4, 6, 6]
    assert sources(sampling(indexed_seq(8), 1)) == [0, 0, 2, 2, 4, 4, 6, 6]


def test_sampling_rate_exceeds_length():
    assert sources(sampling(indexed_seq(20), 5)) == [0] * 20


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 60), st.integers(1, 5), st.integers(0, 2**32))
def test_freeze_map_properties(n, sev, seed):
    src = freeze_source_map(n, sev, seed)
    assert len(src) == n and src[0] == 0
    # non-decreasing, each output either itself or a hold of its predecessor
    assert np.all(np.diff(src) >= 0)
    assert all(src[i] == i or src[i] == src[i - 1] for i in range(1, n))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 80), st.integers(1, 5))
def test_sampling_map_properties(n, sev):
    src = sampling_source_map(n, sev)
    rate = 2**sev
    assert len(src) == n
    assert all(s % rate == 0 and s <= i < s + rate for i, s in enumerate(src))
