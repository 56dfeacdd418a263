"""Transfer word timestamps from an ASR hypothesis onto ground-truth words.

The hypothesis and reference word sequences are diffed. Matching words keep
the hypothesis timestamps (``direct``), mis-recognized words borrow the span
of the hypothesis word they replaced (``borrowed``), reference words the
hypothesis missed get spans interpolated between neighbouring anchors
(``interpolated``), and hypothesis words with no reference counterpart are
dropped.
"""

from __future__ import annotations

import difflib
import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import CannotInterpolateError, ValidationError
from .text import normalize_text
from .timeline import Interval


class Anchor(str, enum.Enum):
    DIRECT = "direct"
    BORROWED = "borrowed"
    INTERPOLATED = "interpolated"


@dataclass(frozen=True)
class TimedWord:
    text: str
    span: Interval

    def __post_init__(self) -> None:
        if not self.text or self.text != self.text.strip():
            raise ValidationError(f"word text must be non-empty and unpadded, got {self.text!r}")

    @classmethod
    def from_seconds(cls, text: str, start: float, end: float) -> "TimedWord":
        return cls(text, Interval.from_seconds(start, end))


@dataclass(frozen=True)
class AnchoredWord:
    """A ground-truth word with a time span and where the span came from.

    ``span`` is ``None`` only for placeholders awaiting interpolation.
    """

    text: str
    span: Interval | None
    anchor: Anchor

    @property
    def is_placeholder(self) -> bool:
        return self.span is None


@dataclass(frozen=True)
class MatchOp:
    """One diff opcode; ``hyp`` and ``ref`` are half-open index ranges."""

    kind: str  # equal | replace | delete | insert
    hyp: tuple[int, int]
    ref: tuple[int, int]


def diff_match(hyp_tokens: Sequence[str], ref_tokens: Sequence[str]) -> list[MatchOp]:
    """Ratcliff-Obershelp diff of two token sequences.

    ``insert`` ops cover reference words absent from the hypothesis, ``delete``
    ops hypothesis words absent from the reference. The junk heuristics of
    :class:`difflib.SequenceMatcher` are disabled so results depend only on
    the tokens.
    """
    matcher = difflib.SequenceMatcher(None, list(hyp_tokens), list(ref_tokens), autojunk=False)
    return [MatchOp(tag, (i1, i2), (j1, j2)) for tag, i1, i2, j1, j2 in matcher.get_opcodes()]


def _check_order(hyp: Sequence[TimedWord]) -> None:
    for k in range(1, len(hyp)):
        if hyp[k].span.start_ms < hyp[k - 1].span.start_ms:
            raise ValidationError(
                f"hypothesis words out of order at index {k}: "
                f"{hyp[k].span!r} starts before {hyp[k - 1].span!r}")


def transfer_anchors(hyp: Sequence[TimedWord], ref_tokens: Sequence[str]) -> list[AnchoredWord]:
    """Give every reference token a time span taken from the hypothesis.

    Inside a ``replace`` block the i-th hypothesis word lends its span to the
    i-th reference word; surplus reference words are interpolated and surplus
    hypothesis words discarded.
    """
    _check_order(hyp)
    if not ref_tokens:
        return []
    hyp_norm = [normalize_text(w.text) for w in hyp]
    ref_norm = [normalize_text(t) for t in ref_tokens]

    out: list[AnchoredWord] = []
    for op in diff_match(hyp_norm, ref_norm):
        h0, h1 = op.hyp
        r0, r1 = op.ref
        if op.kind == "equal":
            out.extend(AnchoredWord(ref_tokens[r0 + k], hyp[h0 + k].span, Anchor.DIRECT)
                       for k in range(r1 - r0))
        elif op.kind == "replace":
            paired = min(h1 - h0, r1 - r0)
            out.extend(AnchoredWord(ref_tokens[r0 + k], hyp[h0 + k].span, Anchor.BORROWED)
                       for k in range(paired))
            out.extend(AnchoredWord(ref_tokens[r], None, Anchor.INTERPOLATED)
                       for r in range(r0 + paired, r1))
        elif op.kind == "insert":
            out.extend(AnchoredWord(ref_tokens[r], None, Anchor.INTERPOLATED)
                       for r in range(r0, r1))
        # delete: hallucinated hypothesis words have no reference slot
    return interpolate_gaps(out)


def _even_split(lo: int, hi: int, k: int) -> list[Interval]:
    width = hi - lo
    cuts = [lo + int(Fraction(width * j, k) + Fraction(1, 2)) for j in range(k + 1)]
    return [Interval(cuts[j], cuts[j + 1]) for j in range(k)]


def _mean_duration(words: Sequence[AnchoredWord]) -> int:
    spans = [w.span for w in words if w.span is not None]
    total = sum(s.duration_ms for s in spans)
    return int(Fraction(total, len(spans)) + Fraction(1, 2))


def interpolate_gaps(words: Sequence[AnchoredWord]) -> list[AnchoredWord]:
    """Fill placeholder spans from the surrounding anchored words.

    A run of ``k`` placeholders between an anchor ending at ``e`` and one
    starting at ``s`` divides ``[e, s]`` into ``k`` equal parts. Leading and
    trailing runs are laid out backwards / forwards from the nearest anchor
    using the mean anchored-word duration, clamped at time zero. If the
    bounding anchors overlap (``s < e``) the run collapses to zero-length
    spans at ``s``.
    """
    words = list(words)
    anchored = [i for i, w in enumerate(words) if w.span is not None]
    if not words:
        return []
    if not anchored:
        raise CannotInterpolateError("no anchored word to interpolate from")

    mean = _mean_duration(words)
    spans: list[Interval | None] = [w.span for w in words]

    first = anchored[0]
    start = spans[first].start_ms
    for j in range(first):
        k = first - j
        spans[j] = Interval(max(0, start - k * mean), max(0, start - (k - 1) * mean))

    for left, right in zip(anchored, anchored[1:]):
        gap = right - left - 1
        if gap == 0:
            continue
        e, s = spans[left].end_ms, spans[right].start_ms
        pieces = _even_split(e, s, gap) if s >= e else [Interval(s, s)] * gap
        spans[left + 1:right] = pieces

    last = anchored[-1]
    end = spans[last].end_ms
    for j in range(last + 1, len(words)):
        k = j - last
        spans[j] = Interval(end + (k - 1) * mean, end + k * mean)

    return [w if w.span is not None else AnchoredWord(w.text, spans[i], w.anchor)
            for i, w in enumerate(words)]


def anchor_counts(words: Sequence[AnchoredWord]) -> dict[str, int]:
    counts = {a.value: 0 for a in Anchor}
    for w in words:
        counts[w.anchor.value] += 1
    return counts
