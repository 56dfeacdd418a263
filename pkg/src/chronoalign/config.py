"""Pipeline configuration: every tunable, its default, and range checks."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping

from .chunker import DEFAULT_CHUNK_MAX, DEFAULT_CHUNK_MIN
from .diarization import (DEFAULT_CLUSTER_THRESHOLD, DEFAULT_MIN_DURATION_OFF, DEFAULT_TRANSIENT,
                          MergeConfig, PostConfig)
from .errors import ConfigError
from .text import RepetitionConfig
from .vad import DEFAULT_MAX_WINDOW, DEFAULT_OFFSET, DEFAULT_ONSET, DEFAULT_WINDOW_OVERLAP, VadConfig

CONFIG_ENV = "CHRONOALIGN_CONFIG"


@dataclass(frozen=True)
class PipelineConfig:
    onset: float = DEFAULT_ONSET
    offset: float = DEFAULT_OFFSET
    min_speech: float = 0.0
    min_silence: float = 0.0
    max_window: float = DEFAULT_MAX_WINDOW
    window_overlap: float = DEFAULT_WINDOW_OVERLAP
    chunk_max: float = DEFAULT_CHUNK_MAX
    chunk_min: float = DEFAULT_CHUNK_MIN
    split_seed: int = 0
    val_ratio: float = 0.1
    ngram_max: int = 5
    ngram_min_repeats: int = 4
    exclusive: bool = True
    cluster_threshold: float = DEFAULT_CLUSTER_THRESHOLD
    min_duration_off: float = DEFAULT_MIN_DURATION_OFF
    merge_min_gap: float = 0.15
    merge_anchor_gap: float = 0.4
    merge_max_gap: float = 0.8
    density_window: float = 10.0
    transient: float = DEFAULT_TRANSIENT
    repurge: bool = True
    collar: float = 0.0

    def __post_init__(self) -> None:
        for f in fields(self):
            val = getattr(self, f.name)
            want = bool if f.type in ("bool", bool) else int if f.type in ("int", int) else float
            if want is float and isinstance(val, int) and not isinstance(val, bool):
                object.__setattr__(self, f.name, float(val))
            elif not isinstance(val, want) or (want is int and isinstance(val, bool)):
                raise ConfigError(f"{f.name} must be {want.__name__}, got {val!r}")
        # delegate range checks to the owning modules
        self.vad()
        self.merge()
        self.repetition()
        if self.window_overlap < 0 or self.window_overlap >= self.max_window:
            raise ConfigError("need 0 <= window_overlap < max_window")
        if not 0 < self.chunk_min <= self.chunk_max:
            raise ConfigError("need 0 < chunk_min <= chunk_max")
        if not 0.0 <= self.val_ratio <= 1.0:
            raise ConfigError("val_ratio must be in [0, 1]")
        for name in ("cluster_threshold", "min_duration_off", "transient", "collar"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")

    def vad(self) -> VadConfig:
        return VadConfig(self.onset, self.offset, self.min_speech, self.min_silence)

    def merge(self) -> MergeConfig:
        return MergeConfig(self.merge_min_gap, self.merge_anchor_gap, self.merge_max_gap, self.density_window)

    def post(self) -> PostConfig:
        return PostConfig(self.exclusive, self.min_duration_off, self.merge(), self.transient, self.repurge)

    def repetition(self) -> RepetitionConfig:
        return RepetitionConfig(self.ngram_max, self.ngram_min_repeats)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def override(self, values: Mapping[str, Any]) -> "PipelineConfig":
        unknown = set(values) - field_names()
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        return replace(self, **values)


def field_names() -> set[str]:
    return {f.name for f in fields(PipelineConfig)}


def load_config(path: str | Path | None = None) -> PipelineConfig:
    """Read a flat JSON object of overrides; ``None`` falls back to ``$CHRONOALIGN_CONFIG``."""
    if path is None:
        path = os.environ.get(CONFIG_ENV) or None
    if path is None:
        return PipelineConfig()
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a flat JSON object")
    data.pop("schema_version", None)
    return PipelineConfig().override(data)
