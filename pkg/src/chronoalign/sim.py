"""Synthetic conversations with known ground truth and recorded corruptions.

Everything is driven by one seeded :class:`random.Random`, so a seed plus a
config always reproduces the same scenario. Truth times sit on the frame
grid, which makes the generated probability stream segment back to exactly
the truth speech timeline.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .align import TimedWord
from .diarization import Diarization, SpeakerSegment
from .errors import ConfigError
from .timeline import Interval, Timeline, to_ms
from .vad import FrameProbs


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    n_speakers: int = 3
    total_duration: float = 120.0
    word_duration: float = 0.4
    word_duration_spread: float = 0.5  # relative half-width of the uniform draw
    word_gap: float = 0.1  # mean gap between words of one turn
    turn_gap: float = 0.8  # mean gap between turns
    words_per_turn: int = 12
    frame_rate: int = 100
    noise: float = 0.0
    vocab_size: int | None = 200  # None: every truth token is unique
    substitution: float = 0.0
    deletion: float = 0.0
    insertion: float = 0.0
    timestamp_jitter: float = 0.0
    boundary_jitter: float = 0.0
    spurious_speaker: float = 0.0

    def __post_init__(self) -> None:
        for name in ("substitution", "deletion", "insertion", "spurious_speaker"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1]")
        if self.substitution + self.deletion > 1.0:
            raise ConfigError("substitution + deletion must not exceed 1")
        if self.n_speakers < 1 or self.words_per_turn < 1:
            raise ConfigError("n_speakers and words_per_turn must be >= 1")
        if not self.total_duration > 0 or not self.word_duration > 0:
            raise ConfigError("durations must be positive")
        if min(self.word_gap, self.turn_gap, self.timestamp_jitter, self.boundary_jitter) < 0:
            raise ConfigError("gaps and jitters must be >= 0")
        if not 0.0 <= self.word_duration_spread < 1.0:
            raise ConfigError("word_duration_spread must be in [0, 1)")
        if self.frame_rate <= 0 or 1000 % self.frame_rate:
            raise ConfigError("frame_rate must divide 1000 so frames fall on whole milliseconds")
        if not 0.0 <= self.noise < 0.25:
            raise ConfigError("noise must be in [0, 0.25)")

    @property
    def frame_ms(self) -> int:
        return 1000 // self.frame_rate


@dataclass(frozen=True)
class Truth:
    diarization: Diarization
    words: tuple[TimedWord, ...]
    frames: FrameProbs
    word_speakers: tuple[str, ...] = ()

    @property
    def speech(self) -> Timeline:
        return self.diarization.timeline()

    @property
    def tokens(self) -> list[str]:
        return [w.text for w in self.words]


@dataclass
class EditRecord:
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    kept: int = 0
    n_boundaries: int = 0
    boundary_jitter_ms: int = 0
    spurious_ms: int = 0
    speaker_map: dict[str, str] = field(default_factory=dict)  # truth -> hyp label

    @property
    def word_errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions


@dataclass(frozen=True)
class Perturbed:
    words: tuple[TimedWord, ...]
    diarization: Diarization
    edits: EditRecord


def _grid(ms: float, step: int) -> int:
    return int(round(ms / step)) * step


def _draw(rng: random.Random, mean_ms: int, step: int) -> int:
    if mean_ms <= 0:
        return 0
    return _grid(rng.uniform(0, 2 * mean_ms), step)


def generate_truth(cfg: SimConfig) -> Truth:
    rng = random.Random(cfg.seed)
    step = cfg.frame_ms
    total = to_ms(cfg.total_duration)
    wd, spread = to_ms(cfg.word_duration), cfg.word_duration_spread
    wgap, tgap = to_ms(cfg.word_gap), to_ms(cfg.turn_gap)

    words: list[TimedWord] = []
    word_spk: list[str] = []
    segs: list[SpeakerSegment] = []
    t = _draw(rng, tgap, step)
    prev_spk = None
    done = False
    while not done:
        choices = [k for k in range(cfg.n_speakers) if k != prev_spk] or [0]
        spk = rng.choice(choices)
        prev_spk = spk
        label = f"spk{spk}"
        n_words = rng.randint(1, 2 * cfg.words_per_turn - 1)
        first = None
        for _ in range(n_words):
            dur = max(step, _grid(rng.uniform(wd * (1 - spread), wd * (1 + spread)), step))
            if t + dur > total:
                done = True
                break
            idx = len(words)
            tok = f"w{idx:05d}" if cfg.vocab_size is None else f"w{rng.randrange(cfg.vocab_size)}"
            words.append(TimedWord(tok, Interval(t, t + dur)))
            word_spk.append(label)
            if first is None:
                first = t
            t += dur
            last_end = t
            t += _draw(rng, wgap, step)
        if first is not None:
            segs.append(SpeakerSegment(Interval(first, last_end), label))
            t = last_end + _draw(rng, tgap, step)
        if t >= total:
            done = True

    # same-speaker segments that touch are one segment
    merged: dict[str, Timeline] = {}
    for s in segs:
        merged[s.speaker] = merged.get(s.speaker, Timeline()) | Timeline([s.span])
    diar = Diarization(SpeakerSegment(iv, spk) for spk, tl in merged.items() for iv in tl)

    speech = diar.timeline()
    n_frames = total // step
    probs = []
    for i in range(n_frames):
        inside = speech.covers(Interval(i * step, (i + 1) * step))
        jitter = rng.uniform(0, cfg.noise) if cfg.noise else 0.0
        probs.append(1.0 - jitter if inside else jitter)
    frames = FrameProbs(cfg.frame_rate, tuple(probs), 0)
    return Truth(diar, tuple(words), frames, tuple(word_spk))


def _jitter_span(rng: random.Random, span: Interval, j: int, floor: int) -> Interval:
    start = max(floor, span.start_ms + rng.randint(-j, j))
    end = max(start, span.end_ms + rng.randint(-j, j))
    return Interval(start, end)


def perturb(truth: Truth, cfg: SimConfig) -> Perturbed:
    """Corrupt the truth and record exactly what was done.

    Word edits: each word is substituted (by a token that occurs nowhere
    else), deleted or kept. An insertion may only follow an unmodified word
    whose successor is also unmodified, so every edit is isolated. With
    unique truth tokens (``vocab_size=None``) the minimal edit distance then
    equals the recorded edit count; with a shared vocabulary the count is an
    upper bound.
    """
    rng = random.Random(cfg.seed * 7919 + 1)
    rec = EditRecord()
    ops = []
    for _ in truth.words:
        r = rng.random()
        ops.append("sub" if r < cfg.substitution
                   else "del" if r < cfg.substitution + cfg.deletion else "keep")

    hyp: list[TimedWord] = []
    n = len(truth.words)
    for i, w in enumerate(truth.words):
        if ops[i] == "sub":
            rec.substitutions += 1
            hyp.append(TimedWord(f"sub{rec.substitutions:05d}", w.span))
        elif ops[i] == "del":
            rec.deletions += 1
        else:
            rec.kept += 1
            hyp.append(w)
        if (cfg.insertion and ops[i] == "keep" and (i + 1 == n or ops[i + 1] == "keep")
                and rng.random() < cfg.insertion):
            rec.insertions += 1
            nxt = truth.words[i + 1].span.start_ms if i + 1 < n else w.span.end_ms
            hyp.append(TimedWord(f"ins{rec.insertions:05d}", Interval(w.span.end_ms, nxt)))

    j = to_ms(cfg.timestamp_jitter)
    if j:
        jittered: list[TimedWord] = []
        floor = 0
        for w in hyp:
            span = _jitter_span(rng, w.span, j, floor)
            floor = span.start_ms
            jittered.append(TimedWord(w.text, span))
        hyp = jittered

    speakers = truth.diarization.speakers
    order = list(range(len(speakers)))
    rng.shuffle(order)
    rec.speaker_map = {spk: f"S{order[k]}" for k, spk in enumerate(speakers)}

    bj = to_ms(cfg.boundary_jitter)
    rec.boundary_jitter_ms = bj
    segs = []
    for s in truth.diarization.segments:
        span = _jitter_span(rng, s.span, bj, 0) if bj else s.span
        rec.n_boundaries += 2
        if not span.is_empty:
            segs.append(SpeakerSegment(span, rec.speaker_map[s.speaker]))

    if cfg.spurious_speaker:
        min_gap = 2 * cfg.frame_ms
        for gap in truth.speech.gaps():
            if gap.duration_ms >= min_gap and rng.random() < cfg.spurious_speaker:
                quarter = gap.duration_ms // 4
                span = Interval(gap.start_ms + quarter, gap.end_ms - quarter)
                rec.spurious_ms += span.duration_ms
                segs.append(SpeakerSegment(span, "SPURIOUS"))

    return Perturbed(tuple(hyp), Diarization(segs), rec)
