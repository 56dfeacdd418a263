"""Command-line front end.

Every command reads and writes the documents in :mod:`chronoalign.formats`.
Batch commands process files independently (``--jobs N`` runs them in a
process pool) and write results in input order, so output bytes never depend
on scheduling. Each output directory gets a ``run.json`` listing the config
digest and the sha256 of every input and output.

Exit status: 0 success, 1 invalid input or a failed file, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable, Sequence

from . import __version__
from .align import anchor_counts, transfer_anchors
from .chunker import corpus_stats, filter_chunks, globalize, greedy_partition, split_train_val
from .config import PipelineConfig, field_names, load_config
from .diarization import Diarization, agglomerative_cluster, apply_cluster_labels, postprocess
from .errors import ChronoAlignError
from .formats import (ManifestRecord, ProbsDocument, ScoreReport, VadDocument, WordsDocument,
                      dump_frame_probs, dump_vad, dump_words, parse_embeddings,
                      parse_frame_probs, parse_vad, parse_words, read_annotation_csv, read_rttm,
                      write_manifest, write_rttm)
from .metrics import aggregate, der, sweep, wer
from .sim import SimConfig, generate_truth, perturb
from .text import DEFAULT_BLACKLIST, apply_blacklist, collapse_repetitions, normalize_text, normalize_tokens
from .timeline import TimeMap, format_seconds
from .vad import hysteresis_segment, merge_windows

log = logging.getLogger("chronoalign")


class UsageError(Exception):
    pass


# -- file helpers -------------------------------------------------------------

def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def read_text(path: Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def resolve_sidecar(base: Path | None, audio_id: str, suffixes: Sequence[str]) -> Path | None:
    """``base`` itself if it is a file, else the first ``base/<id><suffix>`` that exists."""
    if base is None:
        return None
    if base.is_file():
        return base
    for suf in suffixes:
        cand = base / f"{audio_id}{suf}"
        if cand.exists():
            return cand
    raise FileNotFoundError(f"no {'/'.join(suffixes)} file for {audio_id!r} in {base}")


def strip_suffixes(path: Path) -> str:
    name = path.name
    for suf in (".aligned.json", ".words.json", ".probs.json", ".vad.json", ".json",
                ".rttm", ".csv", ".txt"):
        if name.endswith(suf):
            return name[: -len(suf)]
    return path.stem


@dataclass
class Outcome:
    outputs: list[tuple[str, str]] = field(default_factory=list)  # (relative name, text)
    messages: list[str] = field(default_factory=list)
    error: str | None = None


def run_jobs(fn: Callable[..., Outcome], tasks: list[tuple], jobs: int) -> list[Outcome]:
    if jobs <= 1 or len(tasks) <= 1:
        return [_safe_call(fn, t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_safe_call, [fn] * len(tasks), tasks))


def _safe_call(fn: Callable[..., Outcome], task: tuple) -> Outcome:
    try:
        return fn(*task)
    except (ChronoAlignError, OSError, ValueError) as exc:
        return Outcome(error=f"{task[0]}: {exc}")


def finish(out_dir: Path, cfg: PipelineConfig, command: str, inputs: Sequence[Path],
           outcomes: Sequence[Outcome], extra: Sequence[tuple[str, str]] = ()) -> int:
    written = []
    failed = 0
    for o in outcomes:
        for msg in o.messages:
            print(msg)
        if o.error:
            failed += 1
            print(f"error: {o.error}", file=sys.stderr)
            continue
        for name, text in o.outputs:
            atomic_write(out_dir / name, text)
            written.append((name, sha256_text(text)))
    for name, text in extra:
        atomic_write(out_dir / name, text)
        written.append((name, sha256_text(text)))
    manifest = {
        "schema_version": 1,
        "tool": f"chronoalign {__version__}",
        "command": command,
        "config_sha256": cfg.digest(),
        "config": cfg.to_dict(),
        "inputs": [{"name": p.name, "sha256": sha256_file(p)} for p in inputs],
        "outputs": [{"name": n, "sha256": h} for n, h in written],
        "failed": failed,
    }
    atomic_write(out_dir / "run.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return 1 if failed else 0


# -- commands -----------------------------------------------------------------

def _vad_one(path: Path, cfg: PipelineConfig) -> Outcome:
    doc = parse_frame_probs(read_text(path), str(path))
    speech = hysteresis_segment(doc.frames, cfg.vad())
    windows = merge_windows(speech, cfg.max_window, cfg.window_overlap) if speech else []
    out = dump_vad(VadDocument(doc.audio_id, speech, tuple(windows)))
    return Outcome([(f"{doc.audio_id}.vad.json", out)],
                   [f"{doc.audio_id}: {len(speech)} speech regions, {speech.duration:.3f} s, "
                    f"{len(windows)} windows"])


def cmd_vad_segment(args, cfg: PipelineConfig) -> int:
    tasks = [(p, cfg) for p in args.inputs]
    return finish(args.out_dir, cfg, "vad-segment", args.inputs, run_jobs(_vad_one, tasks, args.jobs))


def _align_one(audio_id: str, paths: list[Path], ref_path: Path, vad_path: Path | None) -> Outcome:
    docs = [parse_words(read_text(p), str(p)) for p in paths]
    docs.sort(key=lambda d: d.offset_ms)
    words = []
    for d in docs:
        words.extend(globalize(d.timed_words(), d.offset_ms))
    if vad_path is not None:
        tmap = TimeMap(parse_vad(read_text(vad_path), str(vad_path)).speech)
        words = [type(w)(w.text, tmap.interval_to_original(w.span)) for w in words]
    words.sort(key=lambda w: w.span.start_ms)
    ref = normalize_tokens(read_text(ref_path))
    aligned = transfer_anchors(words, ref)
    counts = anchor_counts(aligned)
    msg = f"{audio_id}: " + ", ".join(f"{k} {v}" for k, v in counts.items())
    return Outcome([(f"{audio_id}.aligned.json", dump_words(WordsDocument.from_anchored(audio_id, aligned)))], [msg])


def cmd_align(args, cfg: PipelineConfig) -> int:
    groups: dict[str, list[Path]] = {}
    for p in args.inputs:
        audio_id = parse_words(read_text(p), str(p)).audio_id
        groups.setdefault(audio_id, []).append(p)
    tasks = []
    for audio_id in sorted(groups):
        ref = resolve_sidecar(args.ref_dir, audio_id, (".txt", ".ref.txt"))
        vad = resolve_sidecar(args.vad_dir, audio_id, (".vad.json", ".json")) if args.vad_dir else None
        tasks.append((audio_id, groups[audio_id], ref, vad))
    return finish(args.out_dir, cfg, "align", args.inputs, run_jobs(_align_one, tasks, args.jobs))


def _chunk_one(path: Path, cfg: PipelineConfig) -> tuple[str, list]:
    doc = parse_words(read_text(path), str(path))
    chunks = greedy_partition(doc.anchored_words(), cfg.chunk_max, doc.audio_id)
    return doc.audio_id, chunks


def cmd_chunk(args, cfg: PipelineConfig) -> int:
    per_source = {}
    failed = []
    for p in args.inputs:
        try:
            sid, chunks = _chunk_one(p, cfg)
        except (ChronoAlignError, OSError) as exc:
            failed.append(f"{p}: {exc}")
            continue
        per_source[sid] = chunks
    kept = []
    flagged = 0
    for sid in sorted(per_source):
        flagged += sum(c.over_length for c in per_source[sid])
        kept.extend(filter_chunks(per_source[sid], cfg.chunk_min, cfg.chunk_max))
    for msg in failed:
        print(f"error: {msg}", file=sys.stderr)
    if flagged:
        print(f"{flagged} over-length single-word chunk(s) dropped")
    extra = [("manifest.jsonl", write_manifest(kept))]
    train, val = split_train_val([ManifestRecord.from_chunk(c) for c in kept], cfg.val_ratio, cfg.split_seed)
    extra += [("train.jsonl", write_manifest(train)), ("val.jsonl", write_manifest(val))]
    if kept:
        stats = corpus_stats(kept)
        print(stats.format_table())
        extra.append(("stats.json", json.dumps({"schema_version": 1, **stats.to_dict(),
                                                 "table": stats.rows()}, indent=2) + "\n"))
    else:
        print("no chunks retained")
    code = finish(args.out_dir, cfg, "chunk", args.inputs, [], extra)
    return 1 if failed else code


def _filter_one(path: Path, phrases: tuple[str, ...], cfg: PipelineConfig) -> Outcome:
    raw = normalize_text(read_text(path))
    cleaned = apply_blacklist(raw, phrases)
    tokens = normalize_tokens(cleaned)
    collapsed = collapse_repetitions(tokens, cfg.repetition())
    name = strip_suffixes(path)
    dropped = len(normalize_tokens(raw)) - len(collapsed)
    return Outcome([(f"{name}.txt", " ".join(collapsed) + "\n")], [f"{name}: {dropped} token(s) removed"])


def cmd_filter_text(args, cfg: PipelineConfig) -> int:
    if args.blacklist:
        phrases = tuple(line.strip() for line in read_text(args.blacklist).splitlines() if line.strip())
    else:
        phrases = DEFAULT_BLACKLIST
    tasks = [(p, phrases, cfg) for p in args.inputs]
    return finish(args.out_dir, cfg, "filter-text", args.inputs, run_jobs(_filter_one, tasks, args.jobs))


def load_diarizations(path: Path) -> dict[str, Diarization]:
    text = read_text(path)
    if path.suffix == ".csv":
        return {strip_suffixes(path): read_annotation_csv(text, str(path))}
    return read_rttm(text, str(path))


def _post_one(path: Path, vad_base: Path | None, emb_base: Path | None, cfg: PipelineConfig) -> Outcome:
    out_lines = []
    msgs = []
    for file_id, d in load_diarizations(path).items():
        if emb_base is not None:
            emb_path = resolve_sidecar(emb_base, file_id, (".emb.json", ".json"))
            embs = parse_embeddings(read_text(emb_path), str(emb_path))
            labels = agglomerative_cluster(embs, cfg.cluster_threshold)
            d = apply_cluster_labels(d, embs, labels)
        vad = None
        if vad_base is not None:
            vad_path = resolve_sidecar(vad_base, file_id, (".vad.json", ".json"))
            vad = parse_vad(read_text(vad_path), str(vad_path)).speech
        before = len(d)
        d = postprocess(d, vad, cfg.post())
        out_lines.append(write_rttm(d, file_id))
        msgs.append(f"{file_id}: {before} -> {len(d)} segments, {len(d.speakers)} speaker(s)")
    return Outcome([(f"{strip_suffixes(path)}.rttm", "".join(out_lines))], msgs)


def cmd_diar_post(args, cfg: PipelineConfig) -> int:
    tasks = [(p, args.vad, args.embeddings, cfg) for p in args.inputs]
    return finish(args.out_dir, cfg, "diar-post", args.inputs, run_jobs(_post_one, tasks, args.jobs))


def _pair_paths(ref: Path, hyp: Path, suffixes: Sequence[str]) -> list[tuple[str, Path, Path]]:
    for p in (ref, hyp):
        if not p.exists():
            raise FileNotFoundError(f"no such file or directory: {p}")
    if ref.is_file() and hyp.is_file():
        return [(strip_suffixes(ref), ref, hyp)]
    if ref.is_dir() and hyp.is_dir():
        pairs = []
        for r in sorted(p for p in ref.iterdir() if p.name.endswith(tuple(suffixes))):
            key = strip_suffixes(r)
            matches = [hyp / f"{key}{s}" for s in suffixes if (hyp / f"{key}{s}").exists()]
            if not matches:
                raise FileNotFoundError(f"no hypothesis for {key!r} in {hyp}")
            pairs.append((key, r, matches[0]))
        return pairs
    raise UsageError("--ref and --hyp must both be files or both be directories")


def cmd_score(args, cfg: PipelineConfig) -> int:
    if args.metric == "wer":
        report = ScoreReport("wer")
        weights = {}
        for key, r, h in _pair_paths(args.ref, args.hyp, (".txt",)):
            b = wer(normalize_tokens(read_text(r)), normalize_tokens(read_text(h)))
            report.files.append({"id": key, "wer": b.wer, "substitutions": b.substitutions,
                                 "deletions": b.deletions, "insertions": b.insertions, "ref_len": b.ref_len})
            weights[key] = b.ref_len
            print(f"{key}\twer {b.wer:.3f}\tS={b.substitutions} D={b.deletions} I={b.insertions} N={b.ref_len}")
        rates = [(f["id"], f["wer"]) for f in report.files]
    else:
        report = ScoreReport("der")
        weights = {}
        bad = 0
        collar = cfg.collar
        for key, r, h in _pair_paths(args.ref, args.hyp, (".rttm", ".csv")):
            refs, hyps = load_diarizations(r), load_diarizations(h)
            for file_id in refs:
                hd = hyps.get(file_id, Diarization())
                if args.self_check:
                    bad += self_check(file_id, hd, args.vad, cfg)
                b = der(refs[file_id], hd, collar)
                report.files.append({"id": file_id, "der": b.der, "missed": b.missed,
                                     "false_alarm": b.false_alarm, "confusion": b.confusion,
                                     "ref_speech": b.ref_speech})
                weights[file_id] = b.ref_speech
                print(f"{file_id}\tder {b.der:.3f}\tmiss={b.missed:.3f} fa={b.false_alarm:.3f} "
                      f"conf={b.confusion:.3f} ref={b.ref_speech:.3f}")
        rates = [(f["id"], f["der"]) for f in report.files]
        if bad:
            print(f"self-check failed for {bad} file(s)", file=sys.stderr)
    report.corpus = aggregate(rates, weights if args.weighted else None)
    if len(rates) > 1:
        print(f"corpus\t{args.metric} {report.corpus:.3f}")
    if args.report:
        atomic_write(args.report, report.to_json())
    if args.metric == "der" and bad:
        return 1
    return 0


def self_check(file_id: str, d: Diarization, vad_base: Path | None, cfg: PipelineConfig) -> int:
    problems = []
    if not d.exclusive:
        problems.append("segments overlap")
    if vad_base is not None:
        vad_path = resolve_sidecar(vad_base, file_id, (".vad.json", ".json"))
        vad = parse_vad(read_text(vad_path), str(vad_path)).speech
        outside = [s for s in d.segments if not vad.covers(s.span)]
        if outside:
            problems.append(f"{len(outside)} segment(s) outside the VAD mask")
    for p in problems:
        print(f"self-check {file_id}: {p}", file=sys.stderr)
    if not problems:
        print(f"self-check {file_id}: ok")
    return 1 if problems else 0


def parse_grid(specs: Sequence[str], base: PipelineConfig) -> dict[str, list]:
    grid: dict[str, list] = {}
    types = {f.name: f.type for f in fields(PipelineConfig)}
    for entry in specs:
        name, sep, values = entry.partition("=")
        name = name.strip().replace("-", "_")
        if not sep or name not in field_names():
            raise UsageError(f"bad --grid entry {entry!r}; expected NAME=V1,V2 with a config key")
        conv = {"int": int, "bool": _to_bool}.get(types[name], float)
        try:
            grid[name] = [conv(v.strip()) for v in values.split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"bad value in --grid {entry!r}") from None
    return grid


def _to_bool(s: str) -> bool:
    if s.lower() in ("1", "true", "yes", "on"):
        return True
    if s.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(s)


def cmd_sweep(args, cfg: PipelineConfig) -> int:
    grid = parse_grid(args.grid, cfg)
    if not grid:
        raise UsageError("sweep needs at least one --grid NAME=V1,V2")
    pairs = _pair_paths(args.ref, args.hyp, (".rttm", ".csv"))
    loaded = [(load_diarizations(r), load_diarizations(h)) for _, r, h in pairs]

    def evaluate(params: dict[str, Any]) -> float:
        run_cfg = cfg.override(params)
        per_file = []
        for refs, hyps in loaded:
            for file_id, ref in refs.items():
                hd = hyps.get(file_id, Diarization())
                if args.embeddings is not None:
                    emb_path = resolve_sidecar(args.embeddings, file_id, (".emb.json", ".json"))
                    embs = parse_embeddings(read_text(emb_path), str(emb_path))
                    hd = apply_cluster_labels(hd, embs, agglomerative_cluster(embs, run_cfg.cluster_threshold))
                vad = None
                if args.vad is not None:
                    vad_path = resolve_sidecar(args.vad, file_id, (".vad.json", ".json"))
                    vad = parse_vad(read_text(vad_path), str(vad_path)).speech
                hd = postprocess(hd, vad, run_cfg.post())
                per_file.append((file_id, der(ref, hd, run_cfg.collar).der))
        return aggregate(per_file)

    rows = sweep(grid, evaluate)
    names = sorted(grid)
    print("\t".join(names + ["der", "best"]))
    for row in rows:
        score = f"{row.score:.4f}" if row.score is not None else f"error: {row.error}"
        print("\t".join([repr(row.params[n]) for n in names] + [score, "*" if row.best else ""]))
    if args.out:
        body = {"schema_version": 1, "metric": "der", "config_sha256": cfg.digest(),
                "rows": [{"params": r.params, "score": r.score, "error": r.error, "best": r.best}
                         for r in rows]}
        atomic_write(args.out, json.dumps(body, indent=2, sort_keys=True) + "\n")
    return 1 if any(r.error for r in rows) else 0


def _sim_one(index: int, base: SimConfig) -> Outcome:
    sc = replace(base, seed=base.seed + index)
    rid = f"rec{index:03d}"
    truth = generate_truth(sc)
    hyp = perturb(truth, sc)
    e = hyp.edits
    edits = {"schema_version": 1, "audio_id": rid, "substitutions": e.substitutions,
             "deletions": e.deletions, "insertions": e.insertions, "kept": e.kept,
             "n_boundaries": e.n_boundaries, "boundary_jitter_s": e.boundary_jitter_ms / 1000,
             "spurious_s": e.spurious_ms / 1000, "speaker_map": e.speaker_map}
    return Outcome([
        (f"probs/{rid}.json", dump_frame_probs(ProbsDocument(rid, truth.frames))),
        (f"ref/{rid}.txt", " ".join(truth.tokens) + "\n"),
        (f"truth/{rid}.words.json", dump_words(WordsDocument.from_timed(rid, truth.words))),
        (f"truth/{rid}.rttm", write_rttm(truth.diarization, rid)),
        (f"words/{rid}.json", dump_words(WordsDocument.from_timed(rid, hyp.words))),
        (f"hyp/{rid}.rttm", write_rttm(hyp.diarization, rid)),
        (f"edits/{rid}.json", json.dumps(edits, indent=2, sort_keys=True) + "\n"),
    ], [f"{rid}: {len(truth.words)} words, {len(truth.diarization)} segments, "
        f"speech {format_seconds(truth.speech.duration_ms)} s"])


def cmd_simulate(args, cfg: PipelineConfig) -> int:
    names = {f.name for f in fields(SimConfig)}
    overrides = {k: v for k, v in vars(args).items() if k.startswith("sim_") and v is not None}
    values = {k[4:]: v for k, v in overrides.items() if k[4:] in names}
    if values.get("vocab_size") == 0:
        values["vocab_size"] = None  # 0 on the command line means unique tokens
    sc = SimConfig(**values)
    tasks = [(i, sc) for i in range(args.n_recordings)]
    return finish(args.out_dir, cfg, "simulate", [], run_jobs(_sim_one, tasks, args.jobs))


# -- argument parsing ---------------------------------------------------------

_ALIASES = {"chunk_min": ["--min-dur"], "chunk_max": ["--max-dur"]}


def add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline config (overrides --config)")
    for f in fields(PipelineConfig):
        flags = [f"--{f.name.replace('_', '-')}"] + _ALIASES.get(f.name, [])
        if f.type == "bool":
            g.add_argument(*flags, dest=f"cfg_{f.name}", action=argparse.BooleanOptionalAction, default=None)
        else:
            g.add_argument(*flags, dest=f"cfg_{f.name}", type=int if f.type == "int" else float,
                           default=None, metavar=f.name.upper())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chronoalign", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None,
                        help="flat JSON config file (default: $CHRONOALIGN_CONFIG)")
    common.add_argument("-v", "--verbose", action="store_true")
    add_config_flags(common)
    batch = argparse.ArgumentParser(add_help=False)
    batch.add_argument("--out-dir", type=Path, required=True)
    batch.add_argument("--jobs", type=int, default=1, help="files processed in parallel")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vad-segment", parents=[common, batch], help="frame probabilities -> speech timeline + windows")
    p.add_argument("inputs", nargs="+", type=Path)
    p.set_defaults(func=cmd_vad_segment)

    p = sub.add_parser("align", parents=[common, batch], help="transfer word timestamps onto reference text")
    p.add_argument("inputs", nargs="+", type=Path, help="hypothesis words documents")
    p.add_argument("--ref-dir", type=Path, required=True, help="reference <audio_id>.txt files (or one file)")
    p.add_argument("--vad-dir", type=Path, default=None,
                   help="VAD documents; word times are then read as concatenated-speech times")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("chunk", parents=[common, batch], help="aligned words -> chunk manifest + split")
    p.add_argument("inputs", nargs="+", type=Path)
    p.set_defaults(func=cmd_chunk)

    p = sub.add_parser("filter-text", parents=[common, batch], help="blacklist + repetition filters")
    p.add_argument("inputs", nargs="+", type=Path)
    p.add_argument("--blacklist", type=Path, default=None, help="one phrase per line")
    p.set_defaults(func=cmd_filter_text)

    p = sub.add_parser("diar-post", parents=[common, batch], help="diarization post-processing chain")
    p.add_argument("inputs", nargs="+", type=Path, help="RTTM or annotation CSV files")
    p.add_argument("--vad", type=Path, default=None, help="VAD document or directory of them")
    p.add_argument("--embeddings", type=Path, default=None, help="embedding document or directory")
    p.set_defaults(func=cmd_diar_post)

    p = sub.add_parser("score", parents=[common], help="WER or DER")
    p.add_argument("metric", choices=["wer", "der"])
    p.add_argument("--ref", type=Path, required=True)
    p.add_argument("--hyp", type=Path, required=True)
    p.add_argument("--report", type=Path, default=None, help="write a JSON score report")
    p.add_argument("--weighted", action="store_true", help="weight files by reference size")
    p.add_argument("--self-check", action="store_true", help="der: verify hyp is exclusive and inside --vad")
    p.add_argument("--vad", type=Path, default=None)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("sweep", parents=[common], help="grid search of diar-post parameters by DER")
    p.add_argument("--ref", type=Path, required=True)
    p.add_argument("--hyp", type=Path, required=True)
    p.add_argument("--grid", action="append", default=[], metavar="NAME=V1,V2")
    p.add_argument("--vad", type=Path, default=None)
    p.add_argument("--embeddings", type=Path, default=None)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", parents=[common, batch], help="write a synthetic corpus")
    p.add_argument("--n-recordings", type=int, default=5)
    for f in fields(SimConfig):
        kind = {"int": int, "float": float}.get(f.type, float)
        if f.name == "vocab_size":
            kind = int
        help_text = "0 gives every word a unique token" if f.name == "vocab_size" else None
        p.add_argument(f"--{f.name.replace('_', '-')}", dest=f"sim_{f.name}", type=kind, default=None,
                       help=help_text)
    p.set_defaults(func=cmd_simulate)
    return parser


def config_from_args(args) -> PipelineConfig:
    cfg = load_config(args.config)
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("cfg_") and v is not None}
    return cfg.override(overrides) if overrides else cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be >= 1")
        return args.func(args, cfg)
    except UsageError as exc:
        parser.error(str(exc))
    except (ChronoAlignError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
