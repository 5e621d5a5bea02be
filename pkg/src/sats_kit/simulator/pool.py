"""Single-speaker utterance pool with word alignments, plus WAV helpers."""
from __future__ import annotations

import io
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import signal
from scipy.io import wavfile

from ..errors import EmptyUtterance, InsufficientSpeakers, SimulationError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Word:
    text: str
    start: float
    end: float


@dataclass(frozen=True, eq=False)
class AlignedUtterance:
    audio: np.ndarray
    sample_rate: int
    words: tuple[Word, ...]
    speaker_key: str
    text: str = ""
    id: str = ""
    approximate: bool = False
    joiner: str = field(init=False)

    def __post_init__(self):
        audio = np.asarray(self.audio, dtype=np.float64)
        if audio.ndim != 1:
            raise SimulationError(f"{self.id}: mono audio expected")
        object.__setattr__(self, "audio", audio)
        words = tuple(self.words)
        object.__setattr__(self, "words", words)
        if not words:
            raise EmptyUtterance(f"utterance {self.id or self.speaker_key!r} has no words")
        dur = self.duration + 1e-3
        prev = 0.0
        for w in words:
            if not (prev - 1e-9 <= w.start <= w.end <= dur):
                raise SimulationError(f"{self.id}: word intervals must be ordered and in range: {w}")
            prev = w.end
        texts = [w.text for w in words]
        text = self.text or " ".join(texts)
        if "".join(texts) == text:
            joiner = ""
        elif " ".join(texts) == " ".join(text.split()):
            joiner = " "
            text = " ".join(text.split())
        else:
            raise SimulationError(f"{self.id}: word texts do not spell the utterance text")
        object.__setattr__(self, "text", text)
        object.__setattr__(self, "joiner", joiner)

    @property
    def duration(self) -> float:
        return len(self.audio) / self.sample_rate

    @property
    def num_samples(self) -> int:
        return len(self.audio)


def uniform_alignment(text: str, duration: float) -> tuple[Word, ...]:
    """Approximate word timings with duration proportional to character count.

    Whitespace-separated tokens are words; text without spaces (Chinese,
    Japanese) is split into characters.
    """
    tokens = text.split() if any(c.isspace() for c in text.strip()) else list(text.strip())
    if not tokens:
        return ()
    total = sum(len(t) for t in tokens)
    words, t = [], 0.0
    for tok in tokens:
        d = duration * len(tok) / total
        words.append(Word(tok, t, min(t + d, duration)))
        t += d
    return tuple(words)


@dataclass
class UtterancePool:
    utterances: list[AlignedUtterance]

    def __post_init__(self):
        self.by_speaker: dict[str, list[AlignedUtterance]] = {}
        for u in self.utterances:
            self.by_speaker.setdefault(u.speaker_key, []).append(u)

    @property
    def speakers(self) -> list[str]:
        return sorted(self.by_speaker)

    def __len__(self) -> int:
        return len(self.utterances)

    def require_speakers(self, k: int) -> None:
        if len(self.by_speaker) < k:
            raise InsufficientSpeakers(
                f"pool has {len(self.by_speaker)} distinct speakers, need at least {k}"
            )


# --------------------------------------------------------------------------
# audio I/O
# --------------------------------------------------------------------------


def read_wav(path: str | Path, sample_rate: int | None = None) -> tuple[np.ndarray, int]:
    """Mono float64 samples in [-1, 1], resampled when ``sample_rate`` is given."""
    sr, data = wavfile.read(str(path))
    if data.dtype.kind == "i":
        x = data.astype(np.float64) / float(np.iinfo(data.dtype).max + 1)
    elif data.dtype.kind == "u":
        x = (data.astype(np.float64) - 128.0) / 128.0
    else:
        x = data.astype(np.float64)
    if x.ndim == 2:
        x = x.mean(axis=1)
    if sample_rate is not None and sr != sample_rate:
        x = resample(x, sr, sample_rate)
        sr = sample_rate
    return x, sr


def resample(x: np.ndarray, sr_in: int, sr_out: int) -> np.ndarray:
    ratio = Fraction(sr_out, sr_in)
    return signal.resample_poly(x, ratio.numerator, ratio.denominator)


def to_pcm16(x: np.ndarray) -> np.ndarray:
    return np.clip(np.round(x * 32767.0), -32768, 32767).astype(np.int16)


def wav_bytes(x: np.ndarray, sample_rate: int) -> bytes:
    buf = io.BytesIO()
    wavfile.write(buf, sample_rate, to_pcm16(x))
    return buf.getvalue()


def write_wav(path: str | Path, x: np.ndarray, sample_rate: int) -> None:
    Path(path).write_bytes(wav_bytes(x, sample_rate))


def load_wav_dir(directory: str | Path, sample_rate: int) -> list[np.ndarray]:
    return [read_wav(p, sample_rate)[0] for p in sorted(Path(directory).glob("*.wav"))]


# --------------------------------------------------------------------------
# manifest
# --------------------------------------------------------------------------


def utterance_from_record(rec: dict, base: Path, sample_rate: int) -> AlignedUtterance:
    path = Path(rec["audio"])
    if not path.is_absolute():
        path = base / path
    audio, sr = read_wav(path, sample_rate)
    text = rec.get("text", "")
    if rec.get("words"):
        words = tuple(Word(w["w"], float(w["s"]), float(w["e"])) for w in rec["words"])
        approx = False
    else:
        log.warning("%s: no word alignment, using uniform-duration split", path.name)
        words = uniform_alignment(text, len(audio) / sr)
        approx = True
    return AlignedUtterance(
        audio, sr, words, str(rec["speaker"]), text, id=str(rec["audio"]), approximate=approx
    )


def load_pool(manifest: str | Path, sample_rate: int = 16000) -> UtterancePool:
    """Read a JSONL pool manifest (audio, speaker, text, words)."""
    manifest = Path(manifest)
    utts = []
    for line_no, line in enumerate(manifest.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise SimulationError(f"{manifest}:{line_no}: {e}") from None
        utts.append(utterance_from_record(rec, manifest.parent, sample_rate))
    return UtterancePool(utts)


def pool_from_utterances(utts: Iterable[AlignedUtterance]) -> UtterancePool:
    return UtterancePool(list(utts))


def words_to_json(words: Sequence[Word]) -> list[dict]:
    return [{"w": w.text, "s": w.start, "e": w.end} for w in words]
