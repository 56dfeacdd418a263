"""File-level WER and DER, corpus aggregation and grid sweeps."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .diarization import Diarization
from .errors import UndefinedMetricError, ValidationError
from .text import normalize_text
from .timeline import Interval, Timeline, to_ms


@dataclass(frozen=True)
class WerBreakdown:
    substitutions: int
    deletions: int
    insertions: int
    ref_len: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def wer(self) -> float:
        return self.errors / self.ref_len


def wer(ref_tokens: Sequence[str], hyp_tokens: Sequence[str]) -> WerBreakdown:
    """Word error rate from a minimal unit-cost edit script.

    Tokens are NFC-normalized before comparison. On backtrace ties a
    substitution is preferred over an insertion/deletion pair.
    """
    ref = [normalize_text(t) for t in ref_tokens]
    hyp = [normalize_text(t) for t in hyp_tokens]
    n, m = len(ref), len(hyp)
    if n == 0:
        raise UndefinedMetricError("WER is undefined for an empty reference")

    cost = [list(range(m + 1))]
    for i in range(1, n + 1):
        r = ref[i - 1]
        prev = cost[-1]
        row = [i] * (m + 1)
        for j in range(1, m + 1):
            row[j] = min(prev[j - 1] + (r != hyp[j - 1]), prev[j] + 1, row[j - 1] + 1)
        cost.append(row)

    s = d = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        here = cost[i][j]
        if i > 0 and j > 0 and here == cost[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]):
            s += ref[i - 1] != hyp[j - 1]
            i, j = i - 1, j - 1
        elif i > 0 and here == cost[i - 1][j] + 1:
            d += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return WerBreakdown(s, d, ins, n)


@dataclass(frozen=True)
class DerBreakdown:
    missed_ms: int
    false_alarm_ms: int
    confusion_ms: int
    ref_speech_ms: int
    mapping: dict[str, str] = field(default_factory=dict)  # hyp -> ref

    @property
    def missed(self) -> float:
        return self.missed_ms / 1000

    @property
    def false_alarm(self) -> float:
        return self.false_alarm_ms / 1000

    @property
    def confusion(self) -> float:
        return self.confusion_ms / 1000

    @property
    def ref_speech(self) -> float:
        return self.ref_speech_ms / 1000

    @property
    def error_ms(self) -> int:
        return self.missed_ms + self.false_alarm_ms + self.confusion_ms

    @property
    def der(self) -> float:
        return self.error_ms / self.ref_speech_ms


def _speaker_timelines(d: Diarization, region: Timeline | None) -> dict[str, Timeline]:
    out = {}
    for spk in d.speakers:
        tl = d.speaker_timeline(spk)
        out[spk] = tl.intersect(region) if region is not None else tl
    return out


def scoring_region(ref: Diarization, hyp: Diarization, collar: float) -> Timeline | None:
    """Time that counts towards DER: all of it minus ``collar`` around ref boundaries.

    Returns ``None`` for a zero collar (nothing excluded).
    """
    c = to_ms(collar)
    if c <= 0:
        return None
    end = max([s.end_ms for s in ref.segments] + [s.end_ms for s in hyp.segments] + [0]) + c
    excluded = Timeline(Interval(max(0, b - c), b + c)
                        for s in ref.segments for b in (s.start_ms, s.end_ms))
    return Timeline([Interval(0, end)]).difference(excluded)


def _overlap_matrix(ref_tl: dict[str, Timeline], hyp_tl: dict[str, Timeline]) -> tuple[list[str], list[str], np.ndarray]:
    refs, hyps = sorted(ref_tl), sorted(hyp_tl)
    mat = np.zeros((len(refs), len(hyps)), dtype=np.int64)
    for i, r in enumerate(refs):
        for j, h in enumerate(hyps):
            mat[i, j] = ref_tl[r].intersect(hyp_tl[h]).duration_ms
    return refs, hyps, mat


def _assign(refs: list[str], hyps: list[str], mat: np.ndarray) -> dict[str, str]:
    if mat.size == 0 or not mat.any():
        return {}
    # scale overlaps so a small preference for earlier (ref, hyp) pairs can
    # break ties without ever beating a real millisecond of overlap
    nr, nh = mat.shape
    pref = np.arange(nr * nh, 0, -1, dtype=np.float64).reshape(nr, nh)
    weight = mat.astype(np.float64) * (nr * nh * min(nr, nh) + 1) + pref
    rows, cols = linear_sum_assignment(weight, maximize=True)
    return {hyps[j]: refs[i] for i, j in zip(rows, cols) if mat[i, j] > 0}


def optimal_speaker_mapping(ref: Diarization, hyp: Diarization,
                            region: Timeline | None = None) -> dict[str, str]:
    """One-to-one hyp->ref mapping maximizing total overlapped duration."""
    refs, hyps, mat = _overlap_matrix(_speaker_timelines(ref, region), _speaker_timelines(hyp, region))
    return _assign(refs, hyps, mat)


def der(ref: Diarization, hyp: Diarization, collar: float = 0.0) -> DerBreakdown:
    """Diarization error rate with optimal one-to-one speaker mapping.

    With ``n_ref`` / ``n_hyp`` active speakers and ``n_hit`` correctly mapped
    ones at an instant, missed speech accrues ``max(0, n_ref - n_hyp)``, false
    alarm ``max(0, n_hyp - n_ref)`` and confusion ``min(n_ref, n_hyp) - n_hit``;
    reference speech accrues ``n_ref``, so overlapped reference speech counts
    once per speaker.
    """
    region = scoring_region(ref, hyp, collar)
    ref_tl = _speaker_timelines(ref, region)
    hyp_tl = _speaker_timelines(hyp, region)
    refs, hyps, mat = _overlap_matrix(ref_tl, hyp_tl)
    mapping = _assign(refs, hyps, mat)

    ref_speech = sum(tl.duration_ms for tl in ref_tl.values())
    if ref_speech == 0:
        raise UndefinedMetricError("DER is undefined without reference speech in the scoring region")
    hit = sum(ref_tl[r].intersect(hyp_tl[h]).duration_ms for h, r in mapping.items())

    bounds = sorted({b for tl in (*ref_tl.values(), *hyp_tl.values())
                     for iv in tl for b in (iv.start_ms, iv.end_ms)})
    missed = fa = both = 0
    for lo, hi in zip(bounds, bounds[1:]):
        n_ref = sum(tl.contains(lo) for tl in ref_tl.values())
        n_hyp = sum(tl.contains(lo) for tl in hyp_tl.values())
        width = hi - lo
        missed += max(0, n_ref - n_hyp) * width
        fa += max(0, n_hyp - n_ref) * width
        both += min(n_ref, n_hyp) * width
    return DerBreakdown(missed, fa, both - hit, ref_speech, mapping)


def aggregate(per_file: Sequence[tuple[str, float]], weights: Mapping[str, float] | None = None) -> float:
    """Corpus rate from per-file rates: plain mean, or weighted by ``weights[id]``."""
    if not per_file:
        raise UndefinedMetricError("cannot aggregate an empty set of files")
    if weights is None:
        return sum(rate for _, rate in per_file) / len(per_file)
    total = sum(weights[fid] for fid, _ in per_file)
    if total <= 0:
        raise UndefinedMetricError("aggregation weights sum to zero")
    return sum(weights[fid] * rate for fid, rate in per_file) / total


@dataclass
class SweepRow:
    params: dict[str, Any]
    score: float | None
    error: str | None = None
    best: bool = False

    def sort_key(self) -> tuple:
        score = self.score if self.score is not None else math.inf
        return (score, sorted((k, repr(v)) for k, v in self.params.items()))


def expand_grid(grid: Mapping[str, Sequence[Any]]) -> list[dict[str, Any]]:
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ValidationError("parameter grid must name at least one value per parameter")
    names = sorted(grid)
    return [dict(zip(names, combo)) for combo in itertools.product(*(grid[n] for n in names))]


def sweep(grid: Mapping[str, Sequence[Any]], evaluate: Callable[[dict[str, Any]], float]) -> list[SweepRow]:
    """Evaluate every grid point; lowest score first, best row flagged.

    A point whose evaluation raises is kept with its error message and sorts
    after all scored rows.
    """
    rows = []
    for params in expand_grid(grid):
        try:
            rows.append(SweepRow(params, float(evaluate(dict(params)))))
        except Exception as exc:  # one bad grid point must not stop the sweep
            rows.append(SweepRow(params, None, f"{type(exc).__name__}: {exc}"))
    rows.sort(key=SweepRow.sort_key)
    if rows and rows[0].score is not None:
        rows[0].best = True
    return rows
