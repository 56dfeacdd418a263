"""Unicode normalization, tokenization and transcript hallucination filters."""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ConfigError

NORMAL_FORM = "NFC"

# Phrases Whisper tends to emit on silence or music. Any list supplied by the
# caller replaces this one.
DEFAULT_BLACKLIST = (
    "Thanks for watching",
    "Thank you for watching",
    "Please subscribe",
    "Subscribe to my channel",
    "Like and subscribe",
)


def normalize_text(text: str) -> str:
    return unicodedata.normalize(NORMAL_FORM, text)


def normalize_tokens(text: str) -> list[str]:
    """NFC-normalize ``text`` and split it on Unicode whitespace."""
    return normalize_text(text).split()


@dataclass(frozen=True)
class RepetitionConfig:
    max_n: int = 5
    min_repeats: int = 4

    def __post_init__(self) -> None:
        if self.max_n < 1:
            raise ConfigError(f"max_n must be >= 1, got {self.max_n}")
        if self.min_repeats < 2:
            raise ConfigError(f"min_repeats must be >= 2, got {self.min_repeats}")


def _is_primitive(gram: Sequence[str]) -> bool:
    # (x, x) is just a 1-gram repeated; leave it to the smaller n
    n = len(gram)
    for p in range(1, n):
        if n % p == 0 and all(gram[i] == gram[i % p] for i in range(n)):
            return False
    return True


def _collapse_pass(tokens: list[str], n: int, min_repeats: int) -> list[str]:
    out: list[str] = []
    i = 0
    size = len(tokens)
    while i < size:
        gram = tokens[i:i + n]
        if len(gram) == n and _is_primitive(gram):
            reps = 1
            while tokens[i + reps * n:i + (reps + 1) * n] == gram:
                reps += 1
            if reps >= min_repeats:
                out.extend(gram)
                i += reps * n
                continue
        out.append(tokens[i])
        i += 1
    return out


def collapse_repetitions(tokens: Sequence[str], cfg: RepetitionConfig = RepetitionConfig()) -> list[str]:
    """Replace looping n-gram runs with a single occurrence.

    For ``n`` from ``cfg.max_n`` down to 1, every run of at least
    ``cfg.min_repeats`` back-to-back copies of the same n-gram is reduced to
    one copy. Passes repeat until nothing changes.
    """
    current = list(tokens)
    while True:
        before = current
        for n in range(cfg.max_n, 0, -1):
            current = _collapse_pass(current, n, cfg.min_repeats)
        if current == before:
            return current


def apply_blacklist(text: str, phrases: Iterable[str] = DEFAULT_BLACKLIST) -> str:
    """Remove every blacklisted phrase, case-insensitively, until none remain."""
    phrases = [p for p in phrases if p.strip()]
    if not phrases or not text:
        return text
    pattern = _phrase_pattern(phrases)
    while True:
        stripped = pattern.sub("", text)
        if stripped == text:
            return text
        text = " ".join(stripped.split())


def _phrase_pattern(phrases: Iterable[str]) -> re.Pattern[str]:
    ordered = sorted({p for p in phrases if p.strip()}, key=lambda p: (-len(p), p))
    return re.compile("|".join(re.escape(p) for p in ordered), re.IGNORECASE)


def contains_blacklisted(text: str, phrases: Iterable[str]) -> bool:
    phrases = [p for p in phrases if p.strip()]
    return bool(phrases) and _phrase_pattern(phrases).search(text) is not None


def clean_transcript(text: str, phrases: Iterable[str] = DEFAULT_BLACKLIST,
                     cfg: RepetitionConfig = RepetitionConfig()) -> str:
    """Blacklist removal followed by repetition collapse on normalized tokens."""
    tokens = normalize_tokens(apply_blacklist(normalize_text(text), phrases))
    return " ".join(collapse_repetitions(tokens, cfg))
