"""Readers and writers for every file the toolkit consumes or produces.

JSON documents (words, frame probabilities, VAD, embeddings, score reports)
carry ``schema_version``; unknown keys are ignored on read. Line formats
(RTTM, annotation CSV, chunk manifest) are parsed strictly: a bad row raises
:class:`ParseError` unless ``strict=False``, which logs and skips it.

All times are written in seconds with three decimals, matching the internal
millisecond clock, so every writer/reader pair round-trips exactly.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from .align import Anchor, AnchoredWord, TimedWord
from .chunker import Chunk
from .diarization import Diarization, Embedding, SpeakerSegment
from .errors import ParseError, ValidationError
from .timeline import Interval, Timeline, format_seconds, to_ms
from .vad import FrameProbs

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CSV_HEADER = ("start_time", "end_time", "speaker_id")


def _seconds_value(ms: int) -> float:
    # ms / 1000 prints as the shortest repr, which re-parses to the same ms
    return ms / 1000


def _time_field(obj: dict, key: str, source: str | None, line: int | None = None) -> int:
    if key not in obj:
        raise ParseError("missing field", source=source, line=line, field=key)
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float, str)):
        raise ParseError(f"expected seconds, got {val!r}", source=source, line=line, field=key)
    try:
        ms = to_ms(val)
    except ValidationError as exc:
        raise ParseError(str(exc), source=source, line=line, field=key) from None
    if ms < 0:
        raise ParseError(f"negative time {val!r}", source=source, line=line, field=key)
    return ms


def _load_json(text: str, source: str | None) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, source=source, line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("top-level value must be an object", source=source)
    version = doc.get("schema_version", SCHEMA_VERSION)
    if not isinstance(version, int) or version > SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {version!r}", source=source, field="schema_version")
    return doc


def _dump_json(doc: dict) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, **doc}, ensure_ascii=False, indent=2) + "\n"


def _read(path: str | Path) -> str:
    return Path(path).read_text(encoding="utf-8")


# -- words -------------------------------------------------------------------

@dataclass(frozen=True)
class WordEntry:
    text: str
    span: Interval
    confidence: float | None = None
    anchor: Anchor | None = None


@dataclass(frozen=True)
class WordsDocument:
    """Timestamped words for one recording (or one window of it).

    ``offset_ms`` is the window start the word times are relative to.
    """

    audio_id: str
    words: tuple[WordEntry, ...]
    offset_ms: int = 0

    def __post_init__(self) -> None:
        for k, w in enumerate(self.words):
            if k and w.span.start_ms < self.words[k - 1].span.start_ms:
                raise ValidationError(
                    f"words must be ordered by start_s: word {k} starts before word {k - 1}")

    def timed_words(self) -> list[TimedWord]:
        return [TimedWord(w.text, w.span) for w in self.words]

    def anchored_words(self) -> list[AnchoredWord]:
        return [AnchoredWord(w.text, w.span, w.anchor or Anchor.DIRECT) for w in self.words]

    @classmethod
    def from_timed(cls, audio_id: str, words: Iterable[TimedWord], offset_ms: int = 0) -> "WordsDocument":
        return cls(audio_id, tuple(WordEntry(w.text, w.span) for w in words), offset_ms)

    @classmethod
    def from_anchored(cls, audio_id: str, words: Iterable[AnchoredWord]) -> "WordsDocument":
        return cls(audio_id, tuple(WordEntry(w.text, w.span, anchor=w.anchor) for w in words))


def parse_words(text: str, source: str | None = None, strict: bool = True) -> WordsDocument:
    doc = _load_json(text, source)
    audio_id = doc.get("audio_id")
    if not isinstance(audio_id, str) or not audio_id:
        raise ParseError("audio_id must be a non-empty string", source=source, field="audio_id")
    offset = _time_field(doc, "offset_s", source) if "offset_s" in doc else 0
    raw = doc.get("words")
    if not isinstance(raw, list):
        raise ParseError("words must be a list", source=source, field="words")
    entries = []
    for k, w in enumerate(raw):
        try:
            if not isinstance(w, dict):
                raise ParseError("word must be an object", source=source, field=f"words[{k}]")
            txt = w.get("text")
            if not isinstance(txt, str) or not txt.strip() or txt != txt.strip():
                raise ParseError(f"bad text {txt!r}", source=source, field=f"words[{k}].text")
            start = _time_field(w, "start_s", source)
            end = _time_field(w, "end_s", source)
            if end < start:
                raise ValidationError(f"words[{k}]: end_s precedes start_s")
            conf = w.get("confidence")
            if conf is not None and (isinstance(conf, bool) or not isinstance(conf, (int, float))
                                     or not math.isfinite(conf)):
                raise ParseError(f"bad confidence {conf!r}", source=source, field=f"words[{k}].confidence")
            anchor = w.get("anchor")
            if anchor is not None:
                try:
                    anchor = Anchor(anchor)
                except ValueError:
                    raise ParseError(f"unknown anchor {anchor!r}", source=source,
                                     field=f"words[{k}].anchor") from None
            entries.append(WordEntry(txt, Interval(start, end), conf, anchor))
        except ValidationError as exc:
            if strict:
                raise
            log.warning("skipping word %d in %s: %s", k, source or "<words>", exc)
    return WordsDocument(audio_id, tuple(entries), offset)


def dump_words(doc: WordsDocument) -> str:
    words = []
    for w in doc.words:
        rec: dict[str, Any] = {"text": w.text, "start_s": _seconds_value(w.span.start_ms),
                               "end_s": _seconds_value(w.span.end_ms)}
        if w.confidence is not None:
            rec["confidence"] = w.confidence
        if w.anchor is not None:
            rec["anchor"] = w.anchor.value
        words.append(rec)
    body: dict[str, Any] = {"audio_id": doc.audio_id}
    if doc.offset_ms:
        body["offset_s"] = _seconds_value(doc.offset_ms)
    body["words"] = words
    return _dump_json(body)


# -- frame probabilities -----------------------------------------------------

@dataclass(frozen=True)
class ProbsDocument:
    audio_id: str
    frames: FrameProbs


def parse_frame_probs(text: str, source: str | None = None) -> ProbsDocument:
    doc = _load_json(text, source)
    audio_id = doc.get("audio_id")
    if not isinstance(audio_id, str) or not audio_id:
        raise ParseError("audio_id must be a non-empty string", source=source, field="audio_id")
    rate = doc.get("frame_rate")
    if isinstance(rate, bool) or not isinstance(rate, (int, float)):
        raise ParseError(f"bad frame_rate {rate!r}", source=source, field="frame_rate")
    probs = doc.get("probs")
    if not isinstance(probs, list) or any(isinstance(p, bool) or not isinstance(p, (int, float))
                                          for p in probs):
        raise ParseError("probs must be a list of numbers", source=source, field="probs")
    origin = _time_field(doc, "origin_s", source) if "origin_s" in doc else 0
    return ProbsDocument(audio_id, FrameProbs(rate, tuple(probs), origin))


def dump_frame_probs(doc: ProbsDocument) -> str:
    f = doc.frames
    return _dump_json({"audio_id": doc.audio_id, "frame_rate": f.frame_rate,
                       "origin_s": _seconds_value(f.origin_ms), "probs": list(f.probs)})


# -- VAD timelines -----------------------------------------------------------

@dataclass(frozen=True)
class VadDocument:
    audio_id: str
    speech: Timeline
    windows: tuple[Interval, ...] = ()


def _pairs(raw: Any, key: str, source: str | None) -> list[Interval]:
    if not isinstance(raw, list):
        raise ParseError("must be a list of [start_s, end_s] pairs", source=source, field=key)
    out = []
    for k, pair in enumerate(raw):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ParseError("expected [start_s, end_s]", source=source, field=f"{key}[{k}]")
        start = _time_field({"start": pair[0]}, "start", source)
        end = _time_field({"end": pair[1]}, "end", source)
        if end < start:
            raise ValidationError(f"{key}[{k}]: end precedes start")
        out.append(Interval(start, end))
    return out


def parse_vad(text: str, source: str | None = None) -> VadDocument:
    doc = _load_json(text, source)
    audio_id = doc.get("audio_id")
    if not isinstance(audio_id, str) or not audio_id:
        raise ParseError("audio_id must be a non-empty string", source=source, field="audio_id")
    speech = _pairs(doc.get("speech"), "speech", source)
    for a, b in zip(speech, speech[1:]):
        if b.start_ms <= a.end_ms:
            raise ValidationError("speech intervals must be sorted, disjoint and non-touching")
    windows = _pairs(doc.get("windows", []), "windows", source)
    return VadDocument(audio_id, Timeline(speech), tuple(windows))


def dump_vad(doc: VadDocument) -> str:
    body: dict[str, Any] = {
        "audio_id": doc.audio_id,
        "speech": [[_seconds_value(iv.start_ms), _seconds_value(iv.end_ms)] for iv in doc.speech],
    }
    if doc.windows:
        body["windows"] = [[_seconds_value(iv.start_ms), _seconds_value(iv.end_ms)] for iv in doc.windows]
    return _dump_json(body)


# -- embeddings --------------------------------------------------------------

def parse_embeddings(text: str, source: str | None = None) -> list[Embedding]:
    doc = _load_json(text, source)
    raw = doc.get("embeddings")
    if not isinstance(raw, list):
        raise ParseError("embeddings must be a list", source=source, field="embeddings")
    out = []
    for k, e in enumerate(raw):
        if not isinstance(e, dict):
            raise ParseError("embedding must be an object", source=source, field=f"embeddings[{k}]")
        seg = e.get("segment")
        vec = e.get("vector")
        if isinstance(seg, bool) or not isinstance(seg, int) or seg < 0:
            raise ParseError(f"bad segment index {seg!r}", source=source, field=f"embeddings[{k}].segment")
        if not isinstance(vec, list) or not vec or any(
                isinstance(v, bool) or not isinstance(v, (int, float)) for v in vec):
            raise ParseError("vector must be a non-empty list of numbers", source=source,
                             field=f"embeddings[{k}].vector")
        out.append(Embedding(tuple(float(v) for v in vec), seg))
    return out


def dump_embeddings(embs: Sequence[Embedding], audio_id: str = "") -> str:
    return _dump_json({"audio_id": audio_id,
                       "embeddings": [{"segment": e.segment_ref, "vector": list(e.vector)} for e in embs]})


# -- RTTM --------------------------------------------------------------------

def _parse_seconds_token(tok: str, source: str | None, line: int, name: str) -> int:
    try:
        ms = to_ms(tok)
    except ValidationError:
        raise ParseError(f"non-numeric time {tok!r}", source=source, line=line, field=name) from None
    if ms < 0:
        raise ParseError(f"negative time {tok!r}", source=source, line=line, field=name)
    return ms


def read_rttm(text: str, source: str | None = None, strict: bool = True) -> dict[str, Diarization]:
    """Parse RTTM text into one diarization per file id (first-seen order)."""
    segs: dict[str, list[SpeakerSegment]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith(";;"):
            continue
        parts = line.split()
        try:
            if len(parts) != 10:
                raise ParseError(f"expected 10 fields, got {len(parts)}", source=source, line=lineno)
            if parts[0] != "SPEAKER":
                continue
            start = _parse_seconds_token(parts[3], source, lineno, "tbeg")
            dur = _parse_seconds_token(parts[4], source, lineno, "tdur")
            if dur <= 0:
                raise ParseError("tdur must be positive", source=source, line=lineno, field="tdur")
            segs.setdefault(parts[1], []).append(SpeakerSegment(Interval(start, start + dur), parts[7]))
        except ValidationError as exc:
            if strict:
                raise
            log.warning("skipping RTTM line: %s", exc)
    return {fid: Diarization(s) for fid, s in segs.items()}


def write_rttm(d: Diarization, file_id: str) -> str:
    if not file_id or any(c.isspace() for c in file_id):
        raise ValidationError(f"bad RTTM file id {file_id!r}")
    lines = []
    for s in d.segments:
        if s.span.is_empty:
            continue
        lines.append(f"SPEAKER {file_id} 1 {format_seconds(s.start_ms)} "
                     f"{format_seconds(s.duration_ms)} <NA> <NA> {s.speaker} <NA> <NA>\n")
    return "".join(lines)


# -- annotation CSV ----------------------------------------------------------

def read_annotation_csv(text: str, source: str | None = None, strict: bool = True) -> Diarization:
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
        raise ParseError(f"header must be {','.join(CSV_HEADER)!r}, got {header!r}", source=source, line=1)
    segs = []
    for lineno, row in enumerate(rows, 2):
        if not row or not any(c.strip() for c in row):
            continue
        try:
            if len(row) != 3:
                raise ParseError(f"expected 3 columns, got {len(row)}", source=source, line=lineno)
            start = _parse_seconds_token(row[0].strip(), source, lineno, "start_time")
            end = _parse_seconds_token(row[1].strip(), source, lineno, "end_time")
            if start >= end:
                raise ValidationError(f"line {lineno}: start_time must be < end_time")
            segs.append(SpeakerSegment(Interval(start, end), row[2].strip()))
        except ValidationError as exc:
            if strict:
                raise
            log.warning("skipping CSV row: %s", exc)
    return Diarization(segs)


def write_annotation_csv(d: Diarization) -> str:
    out = [",".join(CSV_HEADER) + "\n"]
    for s in d.segments:
        out.append(f"{format_seconds(s.start_ms)},{format_seconds(s.end_ms)},{s.speaker}\n")
    return "".join(out)


# -- chunk manifest ----------------------------------------------------------

@dataclass(frozen=True)
class ManifestRecord:
    chunk_id: int
    source_id: str
    span: Interval
    text: str

    @classmethod
    def from_chunk(cls, c: Chunk) -> "ManifestRecord":
        return cls(c.chunk_id, c.source_id, c.span, c.text)


def write_manifest(records: Sequence[ManifestRecord | Chunk]) -> str:
    recs = [ManifestRecord.from_chunk(r) if isinstance(r, Chunk) else r for r in records]
    for a, b in zip(recs, recs[1:]):
        if (a.source_id, a.span.start_ms) > (b.source_id, b.span.start_ms):
            raise ValidationError("manifest records must be ordered by (source_id, start_s)")
    lines = []
    for r in recs:
        lines.append(json.dumps({
            "chunk_id": r.chunk_id,
            "source_id": r.source_id,
            "start_s": _seconds_value(r.span.start_ms),
            "end_s": _seconds_value(r.span.end_ms),
            "duration_s": _seconds_value(r.span.duration_ms),
            "text": r.text,
        }, ensure_ascii=False) + "\n")
    return "".join(lines)


def read_manifest(text: str, source: str | None = None, strict: bool = True) -> list[ManifestRecord]:
    out: list[ManifestRecord] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(exc.msg, source=source, line=lineno) from None
            if not isinstance(obj, dict):
                raise ParseError("record must be an object", source=source, line=lineno)
            cid = obj.get("chunk_id")
            if isinstance(cid, bool) or not isinstance(cid, int):
                raise ParseError(f"bad chunk_id {cid!r}", source=source, line=lineno, field="chunk_id")
            sid = obj.get("source_id")
            txt = obj.get("text")
            if not isinstance(sid, str) or not isinstance(txt, str):
                raise ParseError("source_id and text must be strings", source=source, line=lineno)
            start = _time_field(obj, "start_s", source, lineno)
            end = _time_field(obj, "end_s", source, lineno)
            dur = _time_field(obj, "duration_s", source, lineno)
            if end < start:
                raise ValidationError(f"line {lineno}: end_s precedes start_s")
            if abs(dur - (end - start)) > 1:
                raise ValidationError(f"line {lineno}: duration_s differs from end_s - start_s by more than 1 ms")
            rec = ManifestRecord(cid, sid, Interval(start, end), txt)
            if out and (out[-1].source_id, out[-1].span.start_ms) > (sid, start):
                raise ValidationError(f"line {lineno}: records not ordered by (source_id, start_s)")
            out.append(rec)
        except ValidationError as exc:
            if strict:
                raise
            log.warning("skipping manifest line: %s", exc)
    return out


# -- reference transcripts and score reports ----------------------------------

def read_transcript(path: str | Path) -> str:
    return _read(path)


@dataclass
class ScoreReport:
    metric: str
    files: list[dict[str, Any]] = field(default_factory=list)
    corpus: float | None = None

    def to_json(self) -> str:
        return _dump_json({"metric": self.metric, "corpus": self.corpus, "files": self.files})

    def to_table(self) -> str:
        cols = ["id", self.metric] + sorted({k for f in self.files for k in f} - {"id", self.metric})
        lines = ["\t".join(cols)]
        for f in self.files:
            lines.append("\t".join(_cell(f.get(c)) for c in cols))
        if self.corpus is not None:
            lines.append(f"corpus\t{self.corpus:.3f}")
        return "\n".join(lines) + "\n"


def _cell(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.3f}"
    return "" if v is None else str(v)


def parse_score_report(text: str, source: str | None = None) -> ScoreReport:
    doc = _load_json(text, source)
    metric = doc.get("metric")
    if not isinstance(metric, str):
        raise ParseError("metric must be a string", source=source, field="metric")
    files = doc.get("files", [])
    if not isinstance(files, list):
        raise ParseError("files must be a list", source=source, field="files")
    return ScoreReport(metric, files, doc.get("corpus"))
