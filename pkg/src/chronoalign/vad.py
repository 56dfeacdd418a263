"""Hysteresis speech segmentation and bounded inference windows."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import ConfigError, ValidationError
from .timeline import Interval, Timeline, to_ms

DEFAULT_ONSET = 0.4
DEFAULT_OFFSET = 0.25
DEFAULT_MAX_WINDOW = 30.0
DEFAULT_WINDOW_OVERLAP = 1.0


@dataclass(frozen=True)
class FrameProbs:
    """Per-frame speech probabilities.

    Frame ``i`` covers ``[origin + i/frame_rate, origin + (i+1)/frame_rate)``;
    boundaries are quantized to the millisecond clock.
    """

    frame_rate: float
    probs: tuple[float, ...]
    origin_ms: int = 0

    def __post_init__(self) -> None:
        if not self.frame_rate > 0:
            raise ValidationError(f"frame_rate must be positive, got {self.frame_rate!r}")
        if self.origin_ms < 0:
            raise ValidationError(f"origin must be >= 0, got {self.origin_ms} ms")
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        for i, p in enumerate(self.probs):
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"probability out of [0, 1] at frame {i}: {p!r}")

    def boundary_ms(self, i: int) -> int:
        """Start of frame ``i`` (end of frame ``i - 1``) in ms."""
        rate = Fraction(str(self.frame_rate)) if isinstance(self.frame_rate, float) \
            else Fraction(self.frame_rate)
        return self.origin_ms + to_ms(Fraction(i) / rate)

    def support(self) -> Interval:
        return Interval(self.origin_ms, self.boundary_ms(len(self.probs)))


@dataclass(frozen=True)
class VadConfig:
    onset: float = DEFAULT_ONSET
    offset: float = DEFAULT_OFFSET
    min_speech: float = 0.0
    min_silence: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.offset <= self.onset <= 1.0:
            raise ConfigError(
                f"need 0 <= offset <= onset <= 1, got onset={self.onset}, offset={self.offset}")
        if self.min_speech < 0 or self.min_silence < 0:
            raise ConfigError("min_speech and min_silence must be >= 0")


def hysteresis_segment(frames: FrameProbs, cfg: VadConfig = VadConfig()) -> Timeline:
    """Segment speech with a two-threshold automaton.

    Speech starts at the first frame with ``p >= onset`` and ends at the first
    later frame with ``p < offset``. Silences shorter than ``min_silence`` are
    then bridged and speech regions shorter than ``min_speech`` dropped.
    """
    regions: list[tuple[int, int]] = []
    active = False
    begin = 0
    for i, p in enumerate(frames.probs):
        if not active and p >= cfg.onset:
            active, begin = True, i
        elif active and p < cfg.offset:
            active = False
            regions.append((begin, i))
    if active:
        regions.append((begin, len(frames.probs)))

    spans = [Interval(frames.boundary_ms(a), frames.boundary_ms(b)) for a, b in regions]
    tl = Timeline(spans)

    min_silence = to_ms(cfg.min_silence)
    if min_silence > 0 and len(tl) > 1:
        bridges = [g for g in tl.gaps() if g.duration_ms < min_silence]
        tl = tl.union(Timeline(bridges))
    min_speech = to_ms(cfg.min_speech)
    if min_speech > 0:
        tl = Timeline(iv for iv in tl if iv.duration_ms >= min_speech)
    return tl


def _split_region(iv: Interval, max_len: int, step: int) -> list[Interval]:
    out = []
    start = iv.start_ms
    while start + max_len < iv.end_ms:
        out.append(Interval(start, start + max_len))
        start += step
    out.append(Interval(start, iv.end_ms))
    return out


def merge_windows(speech: Timeline, max_len: float = DEFAULT_MAX_WINDOW,
                  overlap: float = DEFAULT_WINDOW_OVERLAP) -> list[Interval]:
    """Group speech regions into windows no longer than ``max_len`` seconds.

    Consecutive regions share a window while the window's span stays within
    ``max_len``. A single region longer than that is cut into ``max_len``
    windows stepping by ``max_len - overlap``; the last one ends at the
    region's end.
    """
    max_ms, overlap_ms = to_ms(max_len), to_ms(overlap)
    if max_ms <= 0:
        raise ConfigError(f"max_len must be positive, got {max_len!r}")
    if overlap_ms < 0 or overlap_ms >= max_ms:
        raise ConfigError(f"need 0 <= overlap < max_len, got overlap={overlap!r}, max_len={max_len!r}")
    step = max_ms - overlap_ms

    windows: list[Interval] = []
    group: Interval | None = None
    for iv in speech:
        if iv.duration_ms > max_ms:
            if group is not None:
                windows.append(group)
                group = None
            windows.extend(_split_region(iv, max_ms, step))
        elif group is not None and iv.end_ms - group.start_ms <= max_ms:
            group = Interval(group.start_ms, iv.end_ms)
        else:
            if group is not None:
                windows.append(group)
            group = iv
    if group is not None:
        windows.append(group)
    return windows


def simple_threshold(frames: FrameProbs, threshold: float) -> Timeline:
    """Frames with ``p >= threshold`` as a timeline."""
    spans = [Interval(frames.boundary_ms(i), frames.boundary_ms(i + 1))
             for i, p in enumerate(frames.probs) if p >= threshold]
    return Timeline(spans)


def frames_from_sequence(probs: Sequence[float], frame_rate: float,
                         origin: float = 0.0) -> FrameProbs:
    return FrameProbs(frame_rate=frame_rate, probs=tuple(probs), origin_ms=to_ms(origin))
