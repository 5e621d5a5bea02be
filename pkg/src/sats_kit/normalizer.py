"""Markup normalisation applied to references and hypotheses before scoring.

:func:`normalize` strips everything except speaker tags and spoken text in
three fixed regex passes. Tokenisation for CER is a separate, configurable
step (:func:`tokenize_for_scoring`).
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

from .transcript import _MARKUP, SPEAKER_TAG, Segment, Transcript

# Applied in this order; each pass is non-greedy, left to right. ``.`` does
# not cross newlines and ``\s`` is Unicode whitespace (Python ``str`` regex).
PARENTHETICAL = re.compile(r"\s*\(.*?\)")
ANGLE_TAG = re.compile(r"<.*?>")
NON_SPEAKER_BRACKET = re.compile(r"\[(?!S\d+\]).*?\]")

RULES = (PARENTHETICAL, ANGLE_TAG, NON_SPEAKER_BRACKET)


@dataclass(frozen=True)
class NormalizationOptions:
    lowercase: bool = True
    strip_punctuation: bool = True
    # scoring never sees whitespace; kept for explicitness in reports
    strip_whitespace: bool = True


DEFAULT_OPTIONS = NormalizationOptions()


def normalize(raw: str) -> str:
    for rule in RULES:
        raw = rule.sub("", raw)
    return raw


def tokenize_for_scoring(
    normalized: str, opts: NormalizationOptions = DEFAULT_OPTIONS
) -> list[str]:
    """Characters scored by the edit distance: NFC, no whitespace."""
    text = unicodedata.normalize("NFC", normalized)
    if opts.lowercase:
        text = text.lower()
    out = []
    for ch in text:
        if ch.isspace():
            continue
        if opts.strip_punctuation and unicodedata.category(ch).startswith("P"):
            continue
        out.append(ch)
    return out


def split_by_speaker(
    t: Transcript, opts: NormalizationOptions = DEFAULT_OPTIONS
) -> dict[int, list[str]]:
    """Per-speaker character streams, segments concatenated in order.

    Each segment is tokenised on its own so that the streams conserve
    characters exactly with respect to :func:`transcript_tokens`.
    """
    streams: dict[int, list[str]] = {}
    for seg in t.segments:
        streams.setdefault(seg.speaker, []).extend(tokenize_for_scoring(seg.text, opts))
    return streams


def transcript_tokens(
    t: Transcript, opts: NormalizationOptions = DEFAULT_OPTIONS
) -> list[str]:
    """Speaker-agnostic character sequence of the whole transcript."""
    out: list[str] = []
    for seg in t.segments:
        out.extend(tokenize_for_scoring(seg.text, opts))
    return out


def scoring_view(raw: str) -> Transcript:
    """Normalise a raw reference/hypothesis string and split it on speaker tags.

    This is the scoring path: markup (timestamps included, since they are
    non-speaker brackets) is removed from the whole string first, then the
    remaining text is attributed to the preceding ``[S<n>]`` tag. Text before
    the first tag belongs to no speaker and is not scored. A string with no
    tags yields an empty transcript.
    """
    text = normalize(raw)
    tags = list(SPEAKER_TAG.finditer(text))
    segments = []
    for k, m in enumerate(tags):
        stop = tags[k + 1].start() if k + 1 < len(tags) else len(text)
        segments.append(Segment(int(m[1]), _strip_residue(text[m.end():stop])))
    return Transcript(tuple(segments))


def _strip_residue(text: str) -> str:
    text = text.strip()
    # Only newline-spanning '<…>' / '[…]' survive normalize(); the Segment
    # model rejects them as markup, so blank the delimiters in that rare case.
    if _MARKUP.search(text):
        text = re.sub(r"[\[\]<>]", " ", text).strip()
    return text
