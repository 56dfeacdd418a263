"""Diarization post-processing: exclusivity, gap merging, pruning, clustering."""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, PreconditionError, ValidationError
from .timeline import Interval, Timeline, to_ms

DEFAULT_CLUSTER_THRESHOLD = 0.58
DEFAULT_MIN_DURATION_OFF = 0.05
DEFAULT_TRANSIENT = 0.15
# allowed gap moves by this many seconds per unit of density away from 0.5
DENSITY_SLOPE = Fraction(4, 5)


@dataclass(frozen=True, order=True)
class SpeakerSegment:
    span: Interval
    speaker: str

    def __post_init__(self) -> None:
        if not self.speaker or any(c.isspace() for c in self.speaker):
            raise ValidationError(f"speaker label must be non-empty without whitespace, got {self.speaker!r}")

    @classmethod
    def from_seconds(cls, start: float, end: float, speaker: str) -> "SpeakerSegment":
        return cls(Interval.from_seconds(start, end), speaker)

    @property
    def start_ms(self) -> int:
        return self.span.start_ms

    @property
    def end_ms(self) -> int:
        return self.span.end_ms

    @property
    def duration_ms(self) -> int:
        return self.span.duration_ms


def _sort_key(seg: SpeakerSegment) -> tuple[int, int, str]:
    return (seg.span.start_ms, seg.span.end_ms, seg.speaker)


class Diarization:
    """Speaker-labelled segments kept sorted by ``(start, end, speaker)``."""

    __slots__ = ("segments",)

    def __init__(self, segments: Iterable[SpeakerSegment] = ()) -> None:
        self.segments: tuple[SpeakerSegment, ...] = tuple(sorted(segments, key=_sort_key))

    @classmethod
    def from_seconds(cls, rows: Iterable[tuple[float, float, str]]) -> "Diarization":
        return cls(SpeakerSegment.from_seconds(s, e, spk) for s, e, spk in rows)

    def __iter__(self):
        return iter(self.segments)

    def __len__(self) -> int:
        return len(self.segments)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Diarization):
            return NotImplemented
        return self.segments == other.segments

    def __hash__(self) -> int:
        return hash(self.segments)

    def __repr__(self) -> str:
        body = ", ".join(f"{s.speaker}[{s.span.start}, {s.span.end}]" for s in self.segments)
        return f"Diarization({body})"

    @property
    def speakers(self) -> list[str]:
        return sorted({s.speaker for s in self.segments})

    @property
    def exclusive(self) -> bool:
        """No two segments overlap (touching is allowed)."""
        reach = -1
        for seg in self.segments:
            if seg.span.is_empty:
                continue
            if seg.span.start_ms < reach:
                return False
            reach = max(reach, seg.span.end_ms)
        return True

    def timeline(self) -> Timeline:
        return Timeline(s.span for s in self.segments)

    def speaker_timeline(self, speaker: str) -> Timeline:
        return Timeline(s.span for s in self.segments if s.speaker == speaker)

    def by_speaker(self) -> dict[str, list[SpeakerSegment]]:
        groups: dict[str, list[SpeakerSegment]] = defaultdict(list)
        for seg in self.segments:
            groups[seg.speaker].append(seg)
        return dict(groups)

    def relabel(self, mapping: dict[str, str]) -> "Diarization":
        return Diarization(SpeakerSegment(s.span, mapping.get(s.speaker, s.speaker))
                           for s in self.segments)


def exclusive_assign(d: Diarization) -> Diarization:
    """Resolve overlap by giving each contested region to the earliest starter.

    Among active segments the winner is the one with the earliest start, then
    the longer one, then the smaller speaker label. Losing segments keep only
    the parts nobody with higher precedence covers.
    """
    segs = [s for s in d.segments if not s.span.is_empty]
    if not segs:
        return Diarization()
    priority = {i: (s.start_ms, -s.duration_ms, s.speaker, i) for i, s in enumerate(segs)}
    bounds = sorted({b for s in segs for b in (s.start_ms, s.end_ms)})
    starts = sorted(range(len(segs)), key=lambda i: segs[i].start_ms)

    heap: list[tuple] = []
    nxt = 0
    # pieces[i] = list of [start, end] won by segment i, merged when contiguous
    pieces: dict[int, list[list[int]]] = defaultdict(list)
    for lo, hi in zip(bounds, bounds[1:]):
        while nxt < len(starts) and segs[starts[nxt]].start_ms <= lo:
            heapq.heappush(heap, priority[starts[nxt]])
            nxt += 1
        while heap and segs[heap[0][3]].end_ms <= lo:
            heapq.heappop(heap)
        if not heap:
            continue
        winner = heap[0][3]
        runs = pieces[winner]
        if runs and runs[-1][1] == lo:
            runs[-1][1] = hi
        else:
            runs.append([lo, hi])

    return Diarization(SpeakerSegment(Interval(a, b), segs[i].speaker)
                       for i, runs in pieces.items() for a, b in runs)


def _require_exclusive(d: Diarization, op: str) -> None:
    if not d.exclusive:
        raise PreconditionError(f"{op} requires an exclusive (non-overlapping) diarization")


def _gap_occupied(others: Timeline, lo: int, hi: int) -> bool:
    return lo < hi and bool(others.clip(Interval(lo, hi)))


def _merge_same_speaker(d: Diarization, allow) -> Diarization:
    """Left-to-right pass merging consecutive same-speaker segments.

    ``allow(prev_end, next_start)`` decides each gap; gaps containing another
    speaker's speech are never merged.
    """
    out: list[SpeakerSegment] = []
    for speaker, segs in d.by_speaker().items():
        others = Timeline(s.span for s in d.segments if s.speaker != speaker)
        cur = segs[0].span
        for seg in segs[1:]:
            lo, hi = cur.end_ms, seg.span.start_ms
            if not _gap_occupied(others, lo, hi) and allow(lo, hi):
                cur = Interval(cur.start_ms, max(cur.end_ms, seg.span.end_ms))
            else:
                out.append(SpeakerSegment(cur, speaker))
                cur = seg.span
        out.append(SpeakerSegment(cur, speaker))
    return Diarization(out)


def fill_intra_speaker_gaps(d: Diarization, min_duration_off: float = DEFAULT_MIN_DURATION_OFF) -> Diarization:
    """Merge same-speaker neighbours separated by less than ``min_duration_off``."""
    _require_exclusive(d, "fill_intra_speaker_gaps")
    limit = to_ms(min_duration_off)
    return _merge_same_speaker(d, lambda lo, hi: hi - lo < limit)


@dataclass(frozen=True)
class MergeConfig:
    min_gap: float = 0.15
    anchor_gap: float = 0.4
    max_gap: float = 0.8
    density_window: float = 10.0

    def __post_init__(self) -> None:
        if not 0 <= self.min_gap <= self.anchor_gap <= self.max_gap:
            raise ConfigError("need 0 <= min_gap <= anchor_gap <= max_gap")
        if not self.density_window > 0:
            raise ConfigError("density_window must be positive")


def allowed_gap_ms(density: Fraction, cfg: MergeConfig) -> Fraction:
    """Merge gap for a local speech density: linear in density, clamped."""
    g = Fraction(to_ms(cfg.anchor_gap)) + (Fraction(1, 2) - density) * DENSITY_SLOPE * 1000
    return min(max(g, Fraction(to_ms(cfg.min_gap))), Fraction(to_ms(cfg.max_gap)))


def local_density(speech: Timeline, center_x2: int, window_ms: int) -> Fraction:
    """Speech fraction of a window centred on ``center_x2 / 2`` ms.

    The centre is passed doubled so that half-millisecond gap midpoints stay
    exact. Parts of the window before time zero count as silence.
    """
    lo2, hi2 = center_x2 - window_ms, center_x2 + window_ms
    covered2 = 0
    for iv in speech:
        a, b = max(2 * iv.start_ms, lo2), min(2 * iv.end_ms, hi2)
        if a < b:
            covered2 += b - a
    return Fraction(covered2, 2 * window_ms)


def adaptive_merge(d: Diarization, cfg: MergeConfig = MergeConfig()) -> Diarization:
    """Merge same-speaker gaps up to a density-dependent length.

    The allowed gap is ``clamp(anchor + (0.5 - density) * 0.8 s, min, max)``
    where density is the speech fraction (over the unmerged timeline) of a
    ``density_window`` centred on the gap midpoint: sparse talk tolerates
    longer pauses than dense talk.
    """
    _require_exclusive(d, "adaptive_merge")
    speech = d.timeline()
    window = to_ms(cfg.density_window)

    def allow(lo: int, hi: int) -> bool:
        rho = local_density(speech, lo + hi, window)
        return hi - lo <= allowed_gap_ms(rho, cfg)

    return _merge_same_speaker(d, allow)


def purge_transients(d: Diarization, min_dur: float = DEFAULT_TRANSIENT) -> Diarization:
    """Drop segments shorter than ``min_dur`` seconds."""
    limit = to_ms(min_dur)
    return Diarization(s for s in d.segments if s.duration_ms >= limit and not s.span.is_empty)


def intersect_with_vad(d: Diarization, vad: Timeline, min_dur: float = DEFAULT_TRANSIENT) -> Diarization:
    """Clip every segment to the VAD mask, then purge slivers below ``min_dur``."""
    pieces = []
    for seg in d.segments:
        for iv in Timeline([seg.span]).intersect(vad):
            pieces.append(SpeakerSegment(iv, seg.speaker))
    return purge_transients(Diarization(pieces), min_dur)


@dataclass(frozen=True)
class Embedding:
    vector: tuple[float, ...]
    segment_ref: int


def _unit_rows(embs: Sequence[Embedding]) -> np.ndarray:
    if not embs:
        raise ValidationError("need at least one embedding")
    dim = len(embs[0].vector)
    for k, e in enumerate(embs):
        if len(e.vector) != dim:
            raise ValidationError(f"embedding {k} has dimension {len(e.vector)}, expected {dim}")
    x = np.asarray([e.vector for e in embs], dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValidationError("embeddings must be finite")
    norms = np.linalg.norm(x, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ValidationError(f"zero-norm embedding at index {int(zero[0])}")
    return x / norms[:, None]


def agglomerative_cluster(embs: Sequence[Embedding],
                          threshold: float = DEFAULT_CLUSTER_THRESHOLD) -> list[int]:
    """Average-linkage agglomerative clustering under cosine distance.

    Vectors are unit-normalized first, so the linkage between two clusters is
    ``1 - mean_a . mean_b`` (the mean pairwise cosine distance). The closest
    pair merges while its distance is at most ``threshold``; equal distances
    go to the pair with the smallest member indices. Labels are numbered by
    first appearance.
    """
    x = _unit_rows(embs)
    n = len(x)
    dist = 1.0 - x @ x.T
    np.fill_diagonal(dist, np.inf)
    dist[np.tril_indices(n, -1)] = np.inf
    sizes = np.ones(n)
    members = {i: [i] for i in range(n)}

    while len(members) > 1:
        flat = int(np.argmin(dist))  # row-major: smallest (a, b) wins ties
        a, b = divmod(flat, n)
        if not dist[a, b] <= threshold:
            break
        # average linkage update; row/col a keeps the merged cluster
        full = np.minimum(dist, dist.T)
        merged = (sizes[a] * full[a] + sizes[b] * full[b]) / (sizes[a] + sizes[b])
        sizes[a] += sizes[b]
        members[a] = sorted(members[a] + members.pop(b))
        dist[b, :] = np.inf
        dist[:, b] = np.inf
        alive = np.array(sorted(members))
        for c in alive:
            if c == a:
                continue
            lo, hi = (a, c) if a < c else (c, a)
            dist[lo, hi] = merged[c]

    owner = {}
    for key, mem in members.items():
        for i in mem:
            owner[i] = key
    labels: dict[int, int] = {}
    out = []
    for i in range(n):
        out.append(labels.setdefault(owner[i], len(labels)))
    return out


def apply_cluster_labels(d: Diarization, embs: Sequence[Embedding], labels: Sequence[int],
                         prefix: str = "SPEAKER_") -> Diarization:
    """Relabel segments referenced by embeddings with their cluster ids."""
    segs = list(d.segments)
    new = {}
    for emb, lab in zip(embs, labels):
        if not 0 <= emb.segment_ref < len(segs):
            raise ValidationError(f"embedding refers to missing segment {emb.segment_ref}")
        new[emb.segment_ref] = f"{prefix}{lab:02d}"
    return Diarization(SpeakerSegment(s.span, new.get(i, s.speaker)) for i, s in enumerate(segs))


@dataclass(frozen=True)
class PostConfig:
    exclusive: bool = True
    min_duration_off: float = DEFAULT_MIN_DURATION_OFF
    merge: MergeConfig = field(default_factory=MergeConfig)
    transient: float = DEFAULT_TRANSIENT
    repurge: bool = True


def postprocess(d: Diarization, vad: Timeline | None = None,
                cfg: PostConfig = PostConfig()) -> Diarization:
    """Exclusive assignment, gap filling, adaptive merge, purge, VAD mask."""
    if cfg.exclusive:
        d = exclusive_assign(d)
    if d.exclusive:
        d = fill_intra_speaker_gaps(d, cfg.min_duration_off)
        d = adaptive_merge(d, cfg.merge)
    d = purge_transients(d, cfg.transient)
    if vad is not None:
        d = intersect_with_vad(d, vad, cfg.transient if cfg.repurge else 0.0)
    return d
