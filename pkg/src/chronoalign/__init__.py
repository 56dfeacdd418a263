"""Model-free algorithms for long-form speech pipelines.

Timelines and time maps, hysteresis VAD segmentation, word-timestamp
transfer, word-boundary chunking, transcript filters, diarization
post-processing, and WER/DER scoring.
"""

__version__ = "0.1.0"

from .align import Anchor, AnchoredWord, MatchOp, TimedWord, diff_match, interpolate_gaps, transfer_anchors
from .chunker import Chunk, ChunkStats, corpus_stats, filter_chunks, globalize, greedy_partition
from .diarization import (Diarization, Embedding, MergeConfig, SpeakerSegment, adaptive_merge,
                          agglomerative_cluster, exclusive_assign, fill_intra_speaker_gaps,
                          intersect_with_vad, postprocess, purge_transients)
from .metrics import DerBreakdown, WerBreakdown, aggregate, der, optimal_speaker_mapping, sweep, wer
from .text import RepetitionConfig, apply_blacklist, collapse_repetitions, normalize_tokens
from .timeline import (Interval, TimeMap, Timeline, build_time_map, format_seconds, map_to_original,
                       timeline_duration, timeline_intersect, timeline_union, to_ms)
from .vad import FrameProbs, VadConfig, hysteresis_segment, merge_windows

__all__ = [
    "Anchor",
    "AnchoredWord",
    "MatchOp",
    "TimedWord",
    "diff_match",
    "interpolate_gaps",
    "transfer_anchors",
    "Chunk",
    "ChunkStats",
    "corpus_stats",
    "filter_chunks",
    "globalize",
    "greedy_partition",
    "Diarization",
    "Embedding",
    "MergeConfig",
    "SpeakerSegment",
    "adaptive_merge",
    "agglomerative_cluster",
    "exclusive_assign",
    "fill_intra_speaker_gaps",
    "intersect_with_vad",
    "postprocess",
    "purge_transients",
    "DerBreakdown",
    "WerBreakdown",
    "aggregate",
    "der",
    "optimal_speaker_mapping",
    "sweep",
    "wer",
    "RepetitionConfig",
    "apply_blacklist",
    "collapse_repetitions",
    "normalize_tokens",
    "Interval",
    "TimeMap",
    "Timeline",
    "build_time_map",
    "format_seconds",
    "map_to_original",
    "timeline_duration",
    "timeline_intersect",
    "timeline_union",
    "to_ms",
    "FrameProbs",
    "VadConfig",
    "hysteresis_segment",
    "merge_windows",
]
