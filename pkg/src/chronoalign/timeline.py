"""Exact time values, intervals and canonical interval sets.

Every time in the package is an integer number of milliseconds. Seconds
only appear at the edges (parsing, rendering, user-facing constructors),
where :func:`to_ms` quantizes with round-half-up and :func:`format_seconds`
renders exactly three decimals, so that a render/parse cycle is lossless.

Intervals are half-open, ``[start, end)``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal, InvalidOperation
from fractions import Fraction
from typing import Iterable, Iterator, Union

from .errors import DomainError, ValidationError

Seconds = Union[int, float, str, Decimal, Fraction]

_MS = Decimal("0.001")


def to_ms(seconds: Seconds) -> int:
    """Quantize a time given in seconds to integer milliseconds (round half up)."""
    if isinstance(seconds, bool):
        raise ValidationError(f"not a time value: {seconds!r}")
    if isinstance(seconds, Fraction):
        num = seconds * 1000
        return int(math.floor(num + Fraction(1, 2)))
    if isinstance(seconds, float):
        if not math.isfinite(seconds):
            raise ValidationError(f"time must be finite, got {seconds!r}")
        seconds = repr(seconds)
    try:
        dec = Decimal(seconds) if not isinstance(seconds, Decimal) else seconds
    except (InvalidOperation, TypeError, ValueError) as exc:
        raise ValidationError(f"not a time value: {seconds!r}") from exc
    if not dec.is_finite():
        raise ValidationError(f"time must be finite, got {seconds!r}")
    return int((dec * 1000).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def ms_to_seconds(ms: int) -> float:
    return ms / 1000.0


def format_seconds(ms: int) -> str:
    """Render milliseconds as seconds with exactly three decimals."""
    sign = "-" if ms < 0 else ""
    q, r = divmod(abs(ms), 1000)
    return f"{sign}{q}.{r:03d}"


@dataclass(frozen=True, order=True)
class Interval:
    """Half-open span ``[start_ms, end_ms)`` on the millisecond clock."""

    start_ms: int
    end_ms: int

    def __post_init__(self) -> None:
        if not isinstance(self.start_ms, int) or not isinstance(self.end_ms, int):
            raise ValidationError(
                f"interval bounds must be integer ms, got {self.start_ms!r}, {self.end_ms!r}")
        if self.start_ms < 0:
            raise ValidationError(f"interval start must be >= 0, got {self.start_ms} ms")
        if self.end_ms < self.start_ms:
            raise ValidationError(
                f"interval end precedes start: [{self.start_ms}, {self.end_ms}] ms")

    @classmethod
    def from_seconds(cls, start: Seconds, end: Seconds) -> "Interval":
        return cls(to_ms(start), to_ms(end))

    @property
    def start(self) -> float:
        return self.start_ms / 1000.0

    @property
    def end(self) -> float:
        return self.end_ms / 1000.0

    @property
    def duration_ms(self) -> int:
        return self.end_ms - self.start_ms

    @property
    def duration(self) -> float:
        return self.duration_ms / 1000.0

    @property
    def is_empty(self) -> bool:
        return self.end_ms == self.start_ms

    def contains(self, ms: int) -> bool:
        return self.start_ms <= ms < self.end_ms

    def overlaps(self, other: "Interval") -> bool:
        return max(self.start_ms, other.start_ms) < min(self.end_ms, other.end_ms)

    def intersection(self, other: "Interval") -> "Interval | None":
        lo = max(self.start_ms, other.start_ms)
        hi = min(self.end_ms, other.end_ms)
        return Interval(lo, hi) if lo < hi else None

    def shift(self, ms: int) -> "Interval":
        return Interval(self.start_ms + ms, self.end_ms + ms)

    def __repr__(self) -> str:
        return f"Interval({format_seconds(self.start_ms)}, {format_seconds(self.end_ms)})"


def _canonical(intervals: Iterable[Interval]) -> tuple[Interval, ...]:
    out: list[list[int]] = []
    for iv in sorted(i for i in intervals if not i.is_empty):
        if out and iv.start_ms <= out[-1][1]:
            if iv.end_ms > out[-1][1]:
                out[-1][1] = iv.end_ms
        else:
            out.append([iv.start_ms, iv.end_ms])
    return tuple(Interval(s, e) for s, e in out)


class Timeline:
    """Immutable, canonical set of disjoint intervals.

    Construction sorts, drops empty intervals and coalesces overlapping or
    touching ones, so two timelines covering the same set compare equal.
    """

    __slots__ = ("_intervals", "_starts")

    def __init__(self, intervals: Iterable[Interval] = ()) -> None:
        self._intervals = _canonical(intervals)
        self._starts = [iv.start_ms for iv in self._intervals]

    @classmethod
    def from_seconds(cls, pairs: Iterable[tuple[Seconds, Seconds]]) -> "Timeline":
        return cls(Interval.from_seconds(s, e) for s, e in pairs)

    @classmethod
    def _trusted(cls, intervals: tuple[Interval, ...]) -> "Timeline":
        tl = cls.__new__(cls)
        tl._intervals = intervals
        tl._starts = [iv.start_ms for iv in intervals]
        return tl

    @property
    def intervals(self) -> tuple[Interval, ...]:
        return self._intervals

    def __iter__(self) -> Iterator[Interval]:
        return iter(self._intervals)

    def __len__(self) -> int:
        return len(self._intervals)

    def __bool__(self) -> bool:
        return bool(self._intervals)

    def __getitem__(self, idx: int) -> Interval:
        return self._intervals[idx]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Timeline):
            return NotImplemented
        return self._intervals == other._intervals

    def __hash__(self) -> int:
        return hash(self._intervals)

    def __repr__(self) -> str:
        body = ", ".join(f"[{format_seconds(i.start_ms)}, {format_seconds(i.end_ms)}]"
                         for i in self._intervals)
        return f"Timeline([{body}])"

    @property
    def duration_ms(self) -> int:
        return sum(iv.duration_ms for iv in self._intervals)

    @property
    def duration(self) -> float:
        return self.duration_ms / 1000.0

    def to_seconds(self) -> list[tuple[float, float]]:
        return [(iv.start, iv.end) for iv in self._intervals]

    def extent(self) -> Interval | None:
        """Smallest interval covering the whole timeline."""
        if not self._intervals:
            return None
        return Interval(self._intervals[0].start_ms, self._intervals[-1].end_ms)

    def contains(self, ms: int) -> bool:
        idx = bisect.bisect_right(self._starts, ms) - 1
        return idx >= 0 and self._intervals[idx].contains(ms)

    def covers(self, iv: Interval) -> bool:
        """True if ``iv`` lies inside a single member interval."""
        if iv.is_empty:
            return True
        idx = bisect.bisect_right(self._starts, iv.start_ms) - 1
        return idx >= 0 and self._intervals[idx].end_ms >= iv.end_ms

    def union(self, other: "Timeline") -> "Timeline":
        return Timeline(self._intervals + other._intervals)

    def intersect(self, other: "Timeline") -> "Timeline":
        a, b = self._intervals, other._intervals
        i = j = 0
        out: list[Interval] = []
        while i < len(a) and j < len(b):
            lo = max(a[i].start_ms, b[j].start_ms)
            hi = min(a[i].end_ms, b[j].end_ms)
            if lo < hi:
                out.append(Interval(lo, hi))
            if a[i].end_ms < b[j].end_ms:
                i += 1
            else:
                j += 1
        # pieces from a sweep over two canonical sets are already disjoint
        # and cannot touch, since touching pieces would imply touching inputs
        return Timeline._trusted(tuple(out))

    def difference(self, other: "Timeline") -> "Timeline":
        out: list[Interval] = []
        b = other._intervals
        j = 0
        for iv in self._intervals:
            cur = iv.start_ms
            while j < len(b) and b[j].end_ms <= cur:
                j += 1
            k = j
            while k < len(b) and b[k].start_ms < iv.end_ms:
                if b[k].start_ms > cur:
                    out.append(Interval(cur, b[k].start_ms))
                cur = max(cur, b[k].end_ms)
                k += 1
            if cur < iv.end_ms:
                out.append(Interval(cur, iv.end_ms))
        return Timeline(out)

    def clip(self, window: Interval) -> "Timeline":
        return self.intersect(Timeline([window]))

    def gaps(self) -> "Timeline":
        """Interior gaps between consecutive member intervals."""
        return Timeline(Interval(a.end_ms, b.start_ms)
                        for a, b in zip(self._intervals, self._intervals[1:]))

    __or__ = union
    __and__ = intersect
    __sub__ = difference


def timeline_union(a: Timeline, b: Timeline) -> Timeline:
    return a.union(b)


def timeline_intersect(a: Timeline, b: Timeline) -> Timeline:
    return a.intersect(b)


def timeline_duration(t: Timeline) -> float:
    return t.duration


class TimeMap:
    """Piecewise-linear map between concatenated speech time and original time.

    Concatenating the regions of ``speech`` back to back gives a continuous
    stream of length ``speech.duration_ms``. Point ``t`` in that stream
    belongs to region ``k`` when ``offsets[k] <= t < offsets[k] + len_k``.
    """

    __slots__ = ("speech", "offsets", "total_ms")

    def __init__(self, speech: Timeline) -> None:
        self.speech = speech
        offsets = []
        acc = 0
        for iv in speech:
            offsets.append(acc)
            acc += iv.duration_ms
        self.offsets: tuple[int, ...] = tuple(offsets)
        self.total_ms = acc

    def to_original(self, t_concat: int) -> int:
        if not 0 <= t_concat < self.total_ms:
            raise DomainError(
                f"concatenated time {format_seconds(t_concat)} s outside "
                f"[0, {format_seconds(self.total_ms)}) s")
        k = bisect.bisect_right(self.offsets, t_concat) - 1
        return self.speech[k].start_ms + (t_concat - self.offsets[k])

    def to_concat(self, t_orig: int) -> int:
        k = bisect.bisect_right(self.speech._starts, t_orig) - 1
        if k < 0 or not self.speech[k].contains(t_orig):
            raise DomainError(f"original time {format_seconds(t_orig)} s is not inside speech")
        return self.offsets[k] + (t_orig - self.speech[k].start_ms)

    def interval_to_original(self, iv: Interval) -> Interval:
        """Map a concatenated-time span; the end maps through its last millisecond.

        A span crossing a region boundary maps to the original span from the
        start's image to the end's image, which includes the removed silence.
        """
        start = self.to_original(min(iv.start_ms, self.total_ms - 1))
        if iv.is_empty:
            return Interval(start, start)
        end = self.to_original(min(iv.end_ms, self.total_ms) - 1) + 1
        return Interval(start, end)


def build_time_map(speech: Timeline) -> TimeMap:
    return TimeMap(speech)


def map_to_original(m: TimeMap, t_concat: int) -> int:
    return m.to_original(t_concat)
