"""Speaker-attributed transcript model and its two text grammars.

Short form::

    [S1]你好[S2]你好[S1]你叫什么名字？

Long form, one record per segment::

    [00:00:01.000] [S01] 大家好 [00:00:03.500]

Inline markup inside segment content is lifted into :class:`Annotation`
objects: ``<ovl>`` (overlap, a point), ``<ins>…</ins>`` (insertion span),
any other paired angle tag ``<label>…</label>`` (emotion span, payload is the
label) and non-speaker square brackets ``[…]`` (event, payload is the bracket
content). Spoken text inside spans stays in ``Segment.text``.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Any, Iterable

from .errors import (
    InvalidInterval,
    InvalidTimestamp,
    MalformedRecord,
    MissingTimestamps,
    NoSpeakerTags,
    TranscriptError,
)

SHORT = "short"
LONG = "long"
FORMATS = (SHORT, LONG)

SPEAKER_TAG = re.compile(r"\[S(\d+)\]")
_TS_BODY = r"\d+(?::\d+)+(?:\.\d*)?"
TIMESTAMP_TOKEN = re.compile(r"\[\s*" + _TS_BODY + r"\s*\]")
_TIMESTAMP_FIELDS = re.compile(r"\[?\s*(\d+):(\d+):(\d+)(?:\.(\d{1,3}))?\s*\]?")
_LEADING_TS = re.compile(r"\s*\[\s*" + _TS_BODY + r"\s*\]")

# angle tag, speaker tag, or other bracketed span
_MARKUP = re.compile(
    r"<(?P<close>/?)(?P<name>[^<>/\s]+)\s*>"
    r"|\[S\d+\]"
    r"|\[(?P<event>[^\[\]]*)\]"
)

_MAX_MS = 100 * 3600 * 1000


class AnnotationKind(str, enum.Enum):
    OVERLAP = "overlap"
    INSERTION = "insertion"
    EMOTION = "emotion"
    EVENT = "event"


_SPAN_KINDS = (AnnotationKind.INSERTION, AnnotationKind.EMOTION)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    offset: int | None = None


@dataclass(frozen=True)
class Annotation:
    """Inline markup attached to a segment.

    ``offset`` is a character position in the segment text. Insertion and
    emotion annotations cover ``text[offset:offset + length]``; overlap and
    event annotations are points (``length == 0``).
    """

    kind: AnnotationKind
    payload: str | None = None
    offset: int = 0
    length: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", AnnotationKind(self.kind))
        if self.offset < 0 or self.length < 0:
            raise TranscriptError(f"negative annotation span: {self}")
        if self.length and self.kind not in _SPAN_KINDS:
            raise TranscriptError(f"{self.kind.value} annotations are points")
        if self.kind is AnnotationKind.EVENT and self.payload is not None:
            if re.search(r"[\[\]]", self.payload) or re.fullmatch(
                r"S\d+|\s*" + _TS_BODY + r"\s*", self.payload
            ):
                raise TranscriptError(f"event payload would not survive emission: {self.payload!r}")
        if self.kind is AnnotationKind.EMOTION and self.payload is not None:
            if not re.fullmatch(r"[^<>/\s]+", self.payload) or self.payload in ("ovl", "ins"):
                raise TranscriptError(f"invalid emotion label {self.payload!r}")

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind.value}
        if self.payload is not None:
            d["payload"] = self.payload
        if self.offset:
            d["offset"] = self.offset
        if self.length:
            d["length"] = self.length
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Annotation":
        return cls(d["kind"], d.get("payload"), d.get("offset", 0), d.get("length", 0))


@dataclass(frozen=True)
class Segment:
    speaker: int
    text: str
    start: float | None = None
    end: float | None = None
    annotations: tuple[Annotation, ...] = ()

    def __post_init__(self):
        if isinstance(self.speaker, bool) or int(self.speaker) != self.speaker or self.speaker < 1:
            raise TranscriptError(f"speaker index must be a positive integer, got {self.speaker!r}")
        object.__setattr__(self, "speaker", int(self.speaker))
        for t in (self.start, self.end):
            if t is not None and not t >= 0:
                raise TranscriptError(f"timestamps must be non-negative, got {t!r}")
        if self.start is not None and self.end is not None and self.start > self.end:
            raise InvalidInterval(f"segment starts after it ends ({self.start} > {self.end})")
        if _MARKUP.search(self.text):
            raise TranscriptError(f"segment text carries tags or brackets: {self.text!r}")
        anns = tuple(sorted(self.annotations, key=lambda a: a.offset))
        for a in anns:
            if a.offset + a.length > len(self.text):
                raise TranscriptError(f"annotation {a} exceeds text of length {len(self.text)}")
        object.__setattr__(self, "annotations", anns)

    @property
    def timed(self) -> bool:
        return self.start is not None and self.end is not None

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"speaker": self.speaker, "text": self.text}
        if self.start is not None:
            d["start"] = self.start
        if self.end is not None:
            d["end"] = self.end
        d["annotations"] = [a.to_dict() for a in self.annotations]
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Segment":
        return cls(
            d["speaker"],
            d.get("text", ""),
            d.get("start"),
            d.get("end"),
            tuple(Annotation.from_dict(a) for a in d.get("annotations", ())),
        )


@dataclass(frozen=True)
class Transcript:
    segments: tuple[Segment, ...] = ()
    format: str = SHORT
    diagnostics: tuple[Diagnostic, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "diagnostics", tuple(self.diagnostics))
        if self.format not in FORMATS:
            raise TranscriptError(f"unknown transcript format {self.format!r}")
        if self.format == LONG and not all(s.timed for s in self.segments):
            raise MissingTimestamps("long-form transcripts need start and end on every segment")
        if self.format == SHORT and any(
            s.start is not None or s.end is not None for s in self.segments
        ):
            raise TranscriptError("short-form transcripts carry no timestamps")

    @property
    def speakers(self) -> list[int]:
        """Speaker indices in order of first appearance."""
        return list(dict.fromkeys(s.speaker for s in self.segments))

    def to_dict(self) -> dict[str, Any]:
        return {"segments": [s.to_dict() for s in self.segments], "format": self.format}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Transcript":
        return cls(tuple(Segment.from_dict(s) for s in d["segments"]), d.get("format", SHORT))


# --------------------------------------------------------------------------
# timestamp codec
# --------------------------------------------------------------------------


def parse_timestamp(text: str) -> float:
    """``"[hh:mm:ss.mmm]"`` (brackets optional) to seconds."""
    m = _TIMESTAMP_FIELDS.fullmatch(text.strip())
    if m is None:
        raise InvalidTimestamp(f"not an hh:mm:ss.mmm timestamp: {text!r}")
    h, mi, s = int(m[1]), int(m[2]), int(m[3])
    if mi >= 60 or s >= 60:
        raise InvalidTimestamp(f"minutes and seconds must be < 60: {text!r}")
    ms = int((m[4] or "0").ljust(3, "0"))
    return (((h * 60 + mi) * 60 + s) * 1000 + ms) / 1000


def render_timestamp(seconds: float) -> str:
    if not 0 <= seconds:
        raise InvalidTimestamp(f"negative or NaN time {seconds!r}")
    ms = round(seconds * 1000)
    if ms >= _MAX_MS:
        raise InvalidTimestamp(f"{seconds} s is beyond the 100 h rendering range")
    s, ms = divmod(ms, 1000)
    m, s = divmod(s, 60)
    h, m = divmod(m, 60)
    return f"[{h:02d}:{m:02d}:{s:02d}.{ms:03d}]"


# --------------------------------------------------------------------------
# inline markup
# --------------------------------------------------------------------------


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def _extract_markup(
    raw: str, base: int, diags: list[Diagnostic]
) -> tuple[str, list[Annotation]]:
    """Split segment content into spoken text and annotations."""
    pieces: list[str] = []
    n = 0  # length of spoken text so far
    # open span tags by name -> stack of (annotation slot, start offset)
    opened: dict[str, list[tuple[int, int]]] = {}
    slots: list[Annotation | None] = []
    pos = 0
    for m in _MARKUP.finditer(raw):
        chunk = raw[pos:m.start()]
        pieces.append(chunk)
        n += len(chunk)
        pos = m.end()
        name = m["name"]
        if name is None and m["event"] is None:
            # a speaker tag can only appear here if the caller mis-split
            raise TranscriptError(f"speaker tag inside segment content: {m[0]!r}")
        if name is None:
            if _TIMESTAMP_FIELDS.fullmatch(m[0]) or TIMESTAMP_TOKEN.fullmatch(m[0]):
                diags.append(Diagnostic("stray-timestamp", m[0], base + m.start()))
            else:
                slots.append(Annotation(AnnotationKind.EVENT, m["event"], n))
        elif name == "ovl":
            if m["close"]:
                diags.append(Diagnostic("stray-close", "ignored </ovl>", base + m.start()))
            else:
                slots.append(Annotation(AnnotationKind.OVERLAP, None, n))
        elif not m["close"]:
            opened.setdefault(name, []).append((len(slots), n))
            slots.append(None)
        elif opened.get(name):
            slot, start = opened[name].pop()
            slots[slot] = _span(name, start, n - start)
        else:
            diags.append(
                Diagnostic("stray-close", f"unmatched </{name}> dropped", base + m.start())
            )
    tail = raw[pos:]
    pieces.append(tail)
    n += len(tail)
    for name, stack in opened.items():
        for slot, start in stack:
            diags.append(
                Diagnostic("unclosed-tag", f"<{name}> extended to segment end", base)
            )
            slots[slot] = _span(name, start, n - start)
    text = "".join(pieces)
    anns = [a for a in slots if a is not None]

    # strip edge whitespace, keeping annotations inside the text
    lead = len(text) - len(text.lstrip())
    text = text.strip()
    out = []
    for a in anns:
        s = min(max(a.offset - lead, 0), len(text))
        e = min(max(a.offset + a.length - lead, 0), len(text))
        out.append(Annotation(a.kind, a.payload, s, e - s))
    return text, out


def _span(name: str, offset: int, length: int) -> Annotation:
    if name == "ins":
        return Annotation(AnnotationKind.INSERTION, None, offset, length)
    return Annotation(AnnotationKind.EMOTION, name, offset, length)


def _open_tag(a: Annotation) -> str:
    if a.kind is AnnotationKind.OVERLAP:
        return "<ovl>"
    if a.kind is AnnotationKind.EVENT:
        return f"[{a.payload or ''}]"
    return f"<{_tag_name(a)}>"


def _tag_name(a: Annotation) -> str:
    if a.kind is AnnotationKind.INSERTION:
        return "ins"
    return a.payload or "emotion"


def _render_content(seg: Segment) -> str:
    text = seg.text
    anns = seg.annotations
    out: list[str] = []
    for p in range(len(text) + 1):
        for a in reversed(anns):
            if a.length and a.offset + a.length == p:
                out.append(f"</{_tag_name(a)}>")
        for a in anns:
            if a.offset == p:
                out.append(_open_tag(a))
                if a.kind in _SPAN_KINDS and not a.length:
                    out.append(f"</{_tag_name(a)}>")
        if p < len(text):
            out.append(text[p])
    return "".join(out)


# --------------------------------------------------------------------------
# parsing and emission
# --------------------------------------------------------------------------


def parse_short(text: str) -> Transcript:
    """Parse ``[S1]…[S2]…`` text.

    Text before the first tag is not attributed to anyone; it is kept as a
    ``leading-text`` diagnostic on the result.
    """
    tags = list(SPEAKER_TAG.finditer(text))
    if not tags:
        raise NoSpeakerTags("no [S<n>] speaker tag found")
    diags: list[Diagnostic] = []
    lead = text[: tags[0].start()]
    if lead.strip():
        diags.append(Diagnostic("leading-text", lead.strip(), 0))
    segments = []
    for k, m in enumerate(tags):
        stop = tags[k + 1].start() if k + 1 < len(tags) else len(text)
        body, anns = _extract_markup(text[m.end():stop], m.end(), diags)
        segments.append(Segment(_speaker_index(m), body, annotations=tuple(anns)))
    return Transcript(tuple(segments), SHORT, tuple(diags))


_RECORD = re.compile(
    r"\s*(?P<start>" + TIMESTAMP_TOKEN.pattern + r")"
    r"\s*\[S(?P<spk>\d+)\]"
    r"(?P<body>.*?)"
    r"(?P<end>" + TIMESTAMP_TOKEN.pattern + r")",
    re.DOTALL,
)


def parse_long(text: str) -> Transcript:
    """Parse ``[hh:mm:ss.mmm] [Snn] content [hh:mm:ss.mmm]`` records."""
    diags: list[Diagnostic] = []
    segments: list[Segment] = []
    pos = 0
    while text[pos:].strip():
        m = _RECORD.match(text, pos)
        if m is None:
            at = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise MalformedRecord(
                "expected '[hh:mm:ss.mmm] [S<n>] text [hh:mm:ss.mmm]'",
                _byte_offset(text, at),
            )
        stray = SPEAKER_TAG.search(m["body"])
        if stray:
            raise MalformedRecord(
                "record has no end timestamp before the next speaker tag",
                _byte_offset(text, m.start("body") + stray.start()),
            )
        start = parse_timestamp(m["start"])
        end = parse_timestamp(m["end"])
        if start > end:
            raise InvalidInterval(
                f"record starts after it ends ({m['start']} > {m['end']})",
                _byte_offset(text, m.start("start")),
            )
        if segments and start < segments[-1].start:
            diags.append(
                Diagnostic(
                    "non-monotonic",
                    f"start {m['start']} precedes the previous record",
                    _byte_offset(text, m.start("start")),
                )
            )
        body, anns = _extract_markup(m["body"], m.start("body"), diags)
        segments.append(Segment(_speaker_index(m, "spk"), body, start, end, tuple(anns)))
        pos = m.end()
    if not segments:
        raise NoSpeakerTags("no timestamped records found")
    return Transcript(tuple(segments), LONG, tuple(diags))


def _speaker_index(m: re.Match, group: int | str = 1) -> int:
    idx = int(m[group])
    if idx < 1:
        raise TranscriptError(f"speaker index must be >= 1, got {m[0]!r}")
    return idx


def detect_format(text: str) -> str:
    """Long form iff the first non-blank token is a timestamp."""
    return LONG if _LEADING_TS.match(text) else SHORT


def parse(text: str, format: str = "auto") -> Transcript:
    if format == "auto":
        format = detect_format(text)
    if format == SHORT:
        return parse_short(text)
    if format == LONG:
        return parse_long(text)
    raise TranscriptError(f"unknown format {format!r}")


def emit(t: Transcript, format: str | None = None) -> str:
    """Canonical text rendering of ``t`` (defaults to its own format)."""
    format = format or t.format
    if format == SHORT:
        return "".join(f"[S{s.speaker}]{_render_content(s)}" for s in t.segments)
    if format != LONG:
        raise TranscriptError(f"unknown format {format!r}")
    lines = []
    for s in t.segments:
        if not s.timed:
            raise MissingTimestamps("long-form output needs start and end on every segment")
        lines.append(
            f"{render_timestamp(s.start)} [S{s.speaker:02d}] "
            f"{_render_content(s)} {render_timestamp(s.end)}"
        )
    return "\n".join(lines)


def from_segments(items: Iterable[tuple], format: str | None = None) -> Transcript:
    """Build a transcript from ``(speaker, text[, start, end])`` tuples."""
    segs = tuple(Segment(*item) for item in items)
    if format is None:
        format = LONG if segs and all(s.timed for s in segs) else SHORT
    return Transcript(segs, format)
