"""Word-boundary chunking of aligned transcripts and corpus statistics."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace
from typing import Sequence

from .align import AnchoredWord, TimedWord
from .errors import ConfigError, ValidationError
from .timeline import Interval, to_ms

DEFAULT_CHUNK_MAX = 28.0
DEFAULT_CHUNK_MIN = 20.0


@dataclass(frozen=True)
class Chunk:
    chunk_id: int
    source_id: str
    words: tuple[AnchoredWord, ...]
    over_length: bool = False

    def __post_init__(self) -> None:
        if not self.words:
            raise ValidationError("a chunk needs at least one word")
        if any(w.span is None for w in self.words):
            raise ValidationError("chunk words must all carry spans")

    @property
    def span(self) -> Interval:
        return Interval(self.words[0].span.start_ms, self.words[-1].span.end_ms)

    @property
    def duration_ms(self) -> int:
        return self.span.duration_ms

    @property
    def duration(self) -> float:
        return self.span.duration

    @property
    def text(self) -> str:
        return " ".join(w.text for w in self.words)


@dataclass(frozen=True)
class ChunkStats:
    total_chunks: int
    total_duration_hours: float
    mean_duration: float
    min_duration: float

    def rows(self) -> list[tuple[str, str]]:
        """The four statistics as (label, value) rows."""
        return [
            ("Total chunks", f"{self.total_chunks:,}"),
            ("Total duration", f"{self.total_duration_hours:.2f} hours"),
            ("Average chunk duration", f"{self.mean_duration:.2f} seconds"),
            ("Shortest chunk", f"{self.min_duration:.2f} seconds"),
        ]

    def format_table(self) -> str:
        width = max(len(label) for label, _ in self.rows())
        return "\n".join(f"{label:<{width}}  {value}" for label, value in self.rows())

    def to_dict(self) -> dict:
        return {
            "total_chunks": self.total_chunks,
            "total_duration_hours": self.total_duration_hours,
            "mean_duration_s": self.mean_duration,
            "min_duration_s": self.min_duration,
        }


def globalize(words: Sequence[TimedWord], window_start_ms: int) -> list[TimedWord]:
    """Shift window-local word spans onto the recording timeline."""
    return [TimedWord(w.text, w.span.shift(window_start_ms)) for w in words]


def greedy_partition(words: Sequence[AnchoredWord], max_dur: float = DEFAULT_CHUNK_MAX,
                     source_id: str = "") -> list[Chunk]:
    """Cut a word stream into chunks no longer than ``max_dur`` seconds.

    A word joins the open chunk iff its end minus the chunk's first start
    stays within ``max_dur``; otherwise it opens a new chunk. A single word
    longer than ``max_dur`` becomes its own chunk marked ``over_length``.
    """
    max_ms = to_ms(max_dur)
    if max_ms <= 0:
        raise ConfigError(f"max_dur must be positive, got {max_dur!r}")
    for k in range(1, len(words)):
        if words[k].span.start_ms < words[k - 1].span.start_ms:
            raise ValidationError(f"words not sorted by start at index {k}")

    groups: list[list[AnchoredWord]] = []
    for w in words:
        if groups and w.span.end_ms - groups[-1][0].span.start_ms <= max_ms:
            groups[-1].append(w)
        else:
            groups.append([w])
    chunks = []
    for i, g in enumerate(groups):
        over = g[-1].span.end_ms - g[0].span.start_ms > max_ms
        chunks.append(Chunk(i, source_id, tuple(g), over_length=over))
    return chunks


def filter_chunks(chunks: Sequence[Chunk], min_dur: float = DEFAULT_CHUNK_MIN,
                  max_dur: float = DEFAULT_CHUNK_MAX) -> list[Chunk]:
    """Keep chunks whose duration lies in ``[min_dur, max_dur]``; renumber densely."""
    lo = to_ms(min_dur)
    hi = math.inf if max_dur == math.inf else to_ms(max_dur)
    if lo > hi:
        raise ConfigError(f"min_dur {min_dur!r} exceeds max_dur {max_dur!r}")
    kept = [c for c in chunks if lo <= c.duration_ms <= hi]
    return [replace(c, chunk_id=i) for i, c in enumerate(kept)]


def corpus_stats(chunks: Sequence[Chunk]) -> ChunkStats:
    if not chunks:
        raise ValidationError("corpus_stats needs at least one chunk")
    durations = [c.duration_ms for c in chunks]
    total = sum(durations)
    return ChunkStats(
        total_chunks=len(chunks),
        total_duration_hours=total / 3_600_000,
        mean_duration=total / len(chunks) / 1000,
        min_duration=min(durations) / 1000,
    )


def split_train_val(items: Sequence, val_ratio: float = 0.1, seed: int = 0) -> tuple[list, list]:
    """Deterministic seeded shuffle split; returns ``(train, val)``."""
    if not 0.0 <= val_ratio <= 1.0:
        raise ConfigError(f"val_ratio must be in [0, 1], got {val_ratio!r}")
    order = list(range(len(items)))
    random.Random(seed).shuffle(order)
    n_val = int(round(len(items) * val_ratio))
    val_idx = set(order[:n_val])
    train = [x for i, x in enumerate(items) if i not in val_idx]
    val = [x for i, x in enumerate(items) if i in val_idx]
    return train, val
