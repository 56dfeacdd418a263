import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chronoalign.align import Anchor, AnchoredWord, TimedWord
from chronoalign.chunker import (ChunkStats, corpus_stats, filter_chunks, globalize,
                                 greedy_partition, split_train_val)
from chronoalign.errors import ConfigError, ValidationError
from chronoalign.timeline import Interval


def aw(s, e, text="w"):
    return AnchoredWord(text, Interval.from_seconds(s, e), Anchor.DIRECT)


def test_globalize():
    assert globalize([TimedWord.from_seconds("a", 0, 1)], 28000) == [TimedWord.from_seconds("a", 28, 29)]
    words = [TimedWord.from_seconds("a", 0.5, 1)]
    assert globalize(words, 0) == words
    assert globalize([], 5000) == []


def test_partition_example():
    words = [aw(0, 10), aw(12, 20), aw(22, 27.5), aw(27.8, 29.0)]
    chunks = greedy_partition(words, 28)
    assert [len(c.words) for c in chunks] == [3, 1]
    assert chunks[0].span == Interval(0, 27500)
    assert not any(c.over_length for c in chunks)


def test_partition_singleton_and_over_length():
    (c,) = greedy_partition([aw(0, 5)])
    assert c.span == Interval(0, 5000) and not c.over_length
    (c,) = greedy_partition([aw(0, 30)], 28)
    assert c.over_length


def test_partition_boundary_is_inclusive():
    chunks = greedy_partition([aw(0, 10), aw(20, 28)], 28)
    assert len(chunks) == 1 and chunks[0].duration == 28.0


def test_partition_rejects_unsorted_and_bad_max():
    with pytest.raises(ValidationError):
        greedy_partition([aw(5, 6), aw(1, 2)])
    with pytest.raises(ConfigError):
        greedy_partition([aw(0, 1)], 0)


def test_filter_examples():
    chunks = greedy_partition([aw(0, 27.5), aw(30, 31.2)], 28)
    kept = filter_chunks(chunks, 20, 28)
    assert [c.duration for c in kept] == [27.5]
    assert filter_chunks(chunks, 0, math.inf) == chunks
    exact = greedy_partition([aw(0, 20)])
    assert filter_chunks(exact) == exact


def test_filter_renumbers_densely():
    chunks = greedy_partition([aw(0, 1), aw(30, 55), aw(60, 61), aw(90, 112)], 28)
    kept = filter_chunks(chunks)
    assert [c.chunk_id for c in kept] == [0, 1]
    assert [c.duration for c in kept] == [25.0, 22.0]


def test_stats_examples():
    (one,) = greedy_partition([aw(0, 25)])
    assert corpus_stats([one]) == ChunkStats(1, 25 / 3600, 25.0, 25.0)
    two = greedy_partition([aw(0, 20), aw(30, 58)])
    st_ = corpus_stats(two)
    assert (st_.mean_duration, st_.min_duration) == (24.0, 20.0)
    with pytest.raises(ValidationError):
        corpus_stats([])


def test_stats_table_formatting():
    stats = ChunkStats(1234, 9.5, 26.5, 20.0)
    assert stats.rows() == [
        ("Total chunks", "1,234"),
        ("Total duration", "9.50 hours"),
        ("Average chunk duration", "26.50 seconds"),
        ("Shortest chunk", "20.00 seconds"),
    ]
    assert stats.format_table().splitlines()[0].startswith("Total chunks")


@st.composite
def word_stream(draw):
    n = draw(st.integers(0, 60))
    t, out = 0, []
    for i in range(n):
        t += draw(st.integers(0, 3000))
        d = draw(st.integers(1, 2000))
        out.append(AnchoredWord(f"t{i}", Interval(t, t + d), Anchor.DIRECT))
        t += d
    return out


@settings(max_examples=300)
@given(word_stream(), st.integers(2000, 30000))
def test_partition_properties(words, max_ms):
    chunks = greedy_partition(words, max_ms / 1000)
    assert [w for c in chunks for w in c.words] == words
    for c in chunks:
        assert c.span.start_ms == c.words[0].span.start_ms
        assert c.span.end_ms == c.words[-1].span.end_ms
        assert c.over_length or c.duration_ms <= max_ms
        assert c.over_length == (c.duration_ms > max_ms)
        if c.over_length:
            assert len(c.words) == 1
    kept = filter_chunks(chunks, 0.5, max_ms / 1000)
    assert filter_chunks(kept, 0.5, max_ms / 1000) == kept
    assert all(500 <= c.duration_ms <= max_ms for c in kept)


def test_split_is_deterministic_partition():
    items = list(range(100))
    train, val = split_train_val(items, 0.1, seed=3)
    assert len(val) == 10 and sorted(train + val) == items
    assert split_train_val(items, 0.1, seed=3) == (train, val)
    assert split_train_val(items, 0.1, seed=4) != (train, val)
    with pytest.raises(ConfigError):
        split_train_val(items, 1.5)
