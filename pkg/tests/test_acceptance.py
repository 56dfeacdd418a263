"""The ten acceptance criteria, each at its stated scale and tolerance.

Every test reports one PASS/FAIL line (collected into the pytest terminal
summary) and then asserts it.
"""

import itertools
import random
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

import fuzz
from chronoalign.align import Anchor, AnchoredWord, transfer_anchors
from chronoalign.chunker import ChunkStats, corpus_stats, filter_chunks, greedy_partition
from chronoalign.cli import main
from chronoalign.config import PipelineConfig
from chronoalign.diarization import (Diarization, Embedding, SpeakerSegment, agglomerative_cluster,
                                     exclusive_assign, intersect_with_vad)
from chronoalign.formats import (dump_frame_probs, dump_words, parse_frame_probs, parse_words,
                                 read_annotation_csv, read_manifest, read_rttm, write_annotation_csv,
                                 write_manifest, write_rttm)
from chronoalign.metrics import der, wer
from chronoalign.sim import SimConfig, generate_truth, perturb
from chronoalign.timeline import Interval, Timeline
from chronoalign.vad import DEFAULT_OFFSET, DEFAULT_ONSET, VadConfig, frames_from_sequence, hysteresis_segment
from oracles import edit_distance, frame_der, mask


def test_criterion_01_wer_oracle(criterion):
    rng = random.Random(1)
    cases = []
    for _ in range(1000):
        ref = [rng.choice("abcde") for _ in range(rng.randint(1, 30))]
        hyp = [rng.choice("abcde") for _ in range(rng.randint(0, 30))]
        cases.append((ref, hyp))
    t0 = time.perf_counter()
    got = [wer(r, h) for r, h in cases]
    elapsed = time.perf_counter() - t0
    mismatches = sum(b.errors != edit_distance(tuple(r), tuple(h)) for b, (r, h) in zip(got, cases))
    mismatches += sum(b.wer != b.errors / len(r) for b, (r, _) in zip(got, cases))
    criterion(1, "WER oracle", mismatches == 0 and elapsed < 5.0,
              f"1000 cases, {mismatches} mismatches, {elapsed:.2f} s (limit 5 s)")


def _random_scenario(rng):
    length = rng.randint(5_000, 60_000)

    def rows(n_spk, n_seg):
        out = []
        for _ in range(n_seg):
            s = rng.randrange(0, length - 10)
            out.append((s, min(length, s + rng.randint(10, 10_000)), f"s{rng.randrange(n_spk)}"))
        return out

    ref = rows(rng.randint(1, 4), rng.randint(1, 12))
    hyp = rows(rng.randint(1, 4), rng.randint(0, 12))
    return length, ref, hyp


def _diar(rows):
    return Diarization(SpeakerSegment(Interval(s, e), k) for s, e, k in rows)


def test_criterion_02_der_oracle(criterion):
    rng = random.Random(2)
    scenarios = [_random_scenario(rng) for _ in range(200)]
    worst = 0.0
    t0 = time.perf_counter()
    results = [der(_diar(ref), _diar(hyp), 0.0) for _, ref, hyp in scenarios]
    elapsed = time.perf_counter() - t0
    for b, (length, ref, hyp) in zip(results, scenarios):
        missed, fa, conf, speech = frame_der(ref, hyp, length)
        worst = max(worst, abs(b.der - (missed + fa + conf) / speech))
    criterion(2, "DER oracle", worst <= 1e-3 and elapsed < 30.0,
              f"200 scenarios, max |der - oracle| = {worst:.2e} (tol 1e-3), {elapsed:.2f} s (limit 30 s)")


def _overlapping_diarization(rng, length=30_000):
    segs = []
    for _ in range(rng.randint(1, 12)):
        s = rng.randrange(0, length - 10)
        segs.append(SpeakerSegment(Interval(s, min(length, s + rng.randint(1, 8000))),
                                   rng.choice("ABCD")))
    return Diarization(segs)


def _speaker_masks(d, length):
    return {k: mask([(s.start_ms, s.end_ms) for s in d if s.speaker == k], length) for k in "ABCD"}


def test_criterion_03_exclusivity(criterion):
    rng = random.Random(3)
    failures = []
    for case in range(500):
        d = _overlapping_diarization(rng)
        out = exclusive_assign(d)
        spans = [s.span for s in out]
        overlap = any(a.overlaps(b) for a, b in itertools.combinations(spans, 2))
        union_diff = (d.timeline() - out.timeline()).duration_ms + (out.timeline() - d.timeline()).duration_ms
        before, after = _speaker_masks(d, 30_000), _speaker_masks(out, 30_000)
        wrong = any(np.any(after[k] & ~before[k]) for k in "ABCD")
        if overlap or union_diff > 1 or wrong or exclusive_assign(out) != out:
            failures.append(case)
    criterion(3, "exclusivity", not failures,
              f"500 diarizations, {len(failures)} failing (overlap / union / label / idempotence)")


def test_criterion_04_vad_intersection(criterion):
    rng = random.Random(4)
    failures = []
    for case in range(500):
        d = _overlapping_diarization(rng)
        vad = Timeline(Interval(s, s + rng.randint(1, 6000))
                       for s in (rng.randrange(0, 30_000) for _ in range(rng.randint(0, 8))))
        out = intersect_with_vad(d, vad)
        inside = all(vad.covers(s.span) for s in out)
        short = any(s.duration_ms < 150 for s in out)
        if not inside or short or intersect_with_vad(out, vad) != out:
            failures.append(case)
    criterion(4, "dual-VAD intersection", not failures,
              f"500 pairs, {len(failures)} failing (subset / idempotence / 0.15 s re-purge)")


STATS_LABELS = ["Total chunks", "Total duration", "Average chunk duration", "Shortest chunk"]


def test_criterion_05_chunking(criterion):
    problems = []
    kept_all = []
    for rec in range(50):
        truth = generate_truth(SimConfig(seed=500 + rec, total_duration=300))
        words = [AnchoredWord(w.text, w.span, Anchor.DIRECT) for w in truth.words]
        chunks = greedy_partition(words, 28.0, f"rec{rec:02d}")
        if [w.text for c in chunks for w in c.words] != truth.tokens:
            problems.append(f"rec{rec}: token stream not reproduced")
        starts = {w.span.start_ms for w in words}
        ends = {w.span.end_ms for w in words}
        kept = filter_chunks(chunks, 20.0, 28.0)
        for c in kept:
            if not 20_000 <= c.duration_ms <= 28_000:
                problems.append(f"rec{rec}: chunk of {c.duration} s")
            if c.span.start_ms not in starts or c.span.end_ms not in ends:
                problems.append(f"rec{rec}: chunk off word boundary")
        kept_all.extend(kept)
    stats = corpus_stats(kept_all)
    schema_ok = [label for label, _ in stats.rows()] == STATS_LABELS and isinstance(stats, ChunkStats)
    criterion(5, "chunking", not problems and schema_ok and len(kept_all) > 0,
              f"50 recordings, {len(kept_all)} chunks kept, {len(problems)} violations, "
              f"stats rows {'match' if schema_ok else 'differ from'} the four-statistic table")


def test_criterion_06_alignment(criterion):
    problems = []
    truth = generate_truth(SimConfig(seed=60, total_duration=120, vocab_size=None))
    identity = transfer_anchors(list(truth.words), truth.tokens)
    if any(w.anchor is not Anchor.DIRECT for w in identity):
        problems.append("identity case not all direct")
    checked = 0
    for seed in range(20):
        for p in (0.05, 0.2, 0.5):
            cfg = SimConfig(seed=600 + seed, total_duration=120, vocab_size=None, substitution=p)
            truth = generate_truth(cfg)
            hyp = perturb(truth, cfg)
            out = transfer_anchors(list(hyp.words), truth.tokens)
            n = len(truth.words)
            direct = sum(w.anchor is Anchor.DIRECT for w in out)
            if Fraction(direct, n) != 1 - Fraction(hyp.edits.substitutions, n):
                problems.append(f"seed {seed} p {p}: direct fraction {direct}/{n}")
            if [w.text for w in out] != truth.tokens:
                problems.append(f"seed {seed} p {p}: tokens differ")
            checked += 1
        # deletions and insertions force interpolation between anchors
        cfg = SimConfig(seed=700 + seed, total_duration=120, vocab_size=None, substitution=0.1,
                        deletion=0.2, insertion=0.1)
        truth = generate_truth(cfg)
        out = transfer_anchors(list(perturb(truth, cfg).words), truth.tokens)
        if [w.text for w in out] != truth.tokens:
            problems.append(f"seed {seed}: tokens differ with deletions")
        anchored = [i for i, w in enumerate(out) if w.anchor is not Anchor.INTERPOLATED]
        for left, right in zip(anchored, anchored[1:]):
            lo, hi = out[left].span.end_ms, out[right].span.start_ms
            for w in out[left + 1:right]:
                ok = lo <= w.span.start_ms <= w.span.end_ms <= hi if hi >= lo else w.span == Interval(hi, hi)
                if not ok:
                    problems.append(f"seed {seed}: interpolated span {w.span} outside [{lo}, {hi}]")
        checked += 1
    criterion(6, "alignment", not problems,
              f"identity all direct, {checked} perturbed recordings, {len(problems)} violations")


def test_criterion_07_hysteresis(criterion):
    problems = []
    for seed in range(20):
        truth = generate_truth(SimConfig(seed=70 + seed, total_duration=120, noise=0.0))
        if hysteresis_segment(truth.frames, VadConfig(0.4, 0.25)) != truth.speech:
            problems.append(f"closure seed {seed}")
    rng = random.Random(7)
    for case in range(200):
        probs = [rng.random() for _ in range(rng.randint(0, 300))]
        frames = frames_from_sequence(probs, 100)
        offset = rng.uniform(0, 0.5)
        lo, hi = sorted(rng.uniform(offset, 1) for _ in range(2))
        low_out = hysteresis_segment(frames, VadConfig(lo, offset))
        high_out = hysteresis_segment(frames, VadConfig(hi, offset))
        if high_out - low_out:
            problems.append(f"monotonicity case {case}")
    cfg = PipelineConfig()
    defaults_ok = ((cfg.onset, cfg.offset) == (0.4, 0.25) == (DEFAULT_ONSET, DEFAULT_OFFSET)
                   and (VadConfig().onset, VadConfig().offset) == (0.4, 0.25))
    criterion(7, "hysteresis VAD", not problems and defaults_ok,
              f"20 closure recordings, 200 onset-monotonicity streams, {len(problems)} violations, "
              f"defaults onset {cfg.onset} / offset {cfg.offset}")


def _planted(rng: np.random.Generator):
    """Clusters around random directions; redrawn until the separation condition holds."""
    while True:
        k = int(rng.integers(1, 6))
        dim = int(rng.integers(8, 24))
        centers = rng.normal(size=(k, dim))
        sizes = rng.integers(1, 8, size=k)
        x = np.concatenate([c + rng.normal(scale=0.25, size=(s, dim)) * np.linalg.norm(c) / np.sqrt(dim)
                            for c, s in zip(centers, sizes)])
        truth = np.repeat(np.arange(k), sizes)
        u = x / np.linalg.norm(x, axis=1, keepdims=True)
        dist = 1 - u @ u.T
        same = truth[:, None] == truth[None, :]
        off = ~np.eye(len(x), dtype=bool)
        intra = dist[same & off]
        inter = dist[~same]
        if (intra.size == 0 or intra.max() < 0.58) and (inter.size == 0 or inter.min() > 0.58):
            return x, truth


def _partition(labels):
    groups = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, []).append(i)
    return sorted(groups.values())


def test_criterion_08_clustering(criterion):
    rng = np.random.default_rng(8)
    recovered = invariant = 0
    for _ in range(100):
        x, truth = _planted(rng)
        embs = [Embedding(tuple(v), i) for i, v in enumerate(x)]
        labels = agglomerative_cluster(embs, 0.58)
        recovered += _partition(labels) == _partition(truth)
        perm = rng.permutation(len(x))
        shuffled = agglomerative_cluster([Embedding(tuple(x[p]), i) for i, p in enumerate(perm)], 0.58)
        back = [None] * len(x)
        for i, p in enumerate(perm):
            back[p] = shuffled[i]
        invariant += _partition(back) == _partition(labels)
    criterion(8, "clustering", recovered == 100 and invariant == 100,
              f"planted partition recovered {recovered}/100, permutation-invariant {invariant}/100")


def _tree(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def _pipeline(root: Path, jobs: int) -> int:
    j = ["--jobs", str(jobs)]
    codes = [main(["simulate", "--out-dir", str(root / "sim"), "--n-recordings", "4", "--seed", "9",
                   "--total-duration", "150", "--vocab-size", "0", "--substitution", "0.1",
                   "--deletion", "0.05", "--insertion", "0.05", "--timestamp-jitter", "0.02",
                   "--boundary-jitter", "0.1", "--spurious-speaker", "0.2", *j])]
    sim = root / "sim"
    probs = sorted(map(str, (sim / "probs").iterdir()))
    codes.append(main(["vad-segment", "--out-dir", str(root / "vad"), *j, *probs]))
    words = sorted(map(str, (sim / "words").iterdir()))
    codes.append(main(["align", "--out-dir", str(root / "aligned"), "--ref-dir", str(sim / "ref"), *j, *words]))
    aligned = sorted(map(str, (root / "aligned").glob("*.aligned.json")))
    codes.append(main(["chunk", "--out-dir", str(root / "chunks"), *j, *aligned]))
    hyps = sorted(map(str, (sim / "hyp").iterdir()))
    codes.append(main(["diar-post", "--out-dir", str(root / "post"), "--vad", str(root / "vad"), *j, *hyps]))
    codes.append(main(["score", "der", "--ref", str(sim / "truth"), "--hyp", str(root / "post"),
                       "--report", str(root / "der.json")]))
    refs = sorted(map(str, (sim / "ref").iterdir()))
    codes.append(main(["filter-text", "--out-dir", str(root / "text"), *j, *refs]))
    codes.append(main(["score", "wer", "--ref", str(sim / "ref"), "--hyp", str(root / "text"),
                       "--report", str(root / "wer.json")]))
    return max(codes)


def test_criterion_09_determinism(criterion, tmp_path, capsys):
    codes = [_pipeline(tmp_path / name, jobs) for name, jobs in (("a", 1), ("b", 1), ("c", 4))]
    capsys.readouterr()
    a, b, c = (_tree(tmp_path / n) for n in "abc")
    same_twice = a == b
    same_jobs = a == c
    criterion(9, "determinism", codes == [0, 0, 0] and same_twice and same_jobs and len(a) > 20,
              f"{len(a)} output files; rerun byte-identical: {same_twice}; --jobs 4 == --jobs 1: {same_jobs}")


def test_criterion_10_round_trips(criterion):
    formats = {
        "RTTM": (fuzz.diarization, lambda d: write_rttm(d, "f1"),
                 lambda t: read_rttm(t).get("f1", Diarization())),
        "annotation CSV": (fuzz.diarization, write_annotation_csv, read_annotation_csv),
        "words": (fuzz.words_doc, dump_words, parse_words),
        "frame probs": (fuzz.probs_doc, dump_frame_probs, parse_frame_probs),
        "manifest": (fuzz.manifest, write_manifest, read_manifest),
    }
    failed = {}
    for name, (make, dump, parse) in formats.items():
        rng = random.Random(f"criterion-10-{name}")
        bad = 0
        for _ in range(100):
            obj = make(rng)
            text = dump(obj)
            back = parse(text)
            bad += back != obj or dump(back) != text
        failed[name] = bad
    criterion(10, "format round-trips", not any(failed.values()),
              "100 fuzzed instances each; failures " + ", ".join(f"{k} {v}" for k, v in failed.items()))
