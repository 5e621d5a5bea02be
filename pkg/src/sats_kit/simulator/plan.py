"""Dialogue planning: word-run partition, speaker scheduling, placement, snapping.

All timeline arithmetic is done in integer samples, so the overlap cap and
slice-length bookkeeping are exact.
"""
from __future__ import annotations

import dataclasses
import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import kernels
from ..errors import EmptyUtterance
from .config import SimConfig
from .pool import AlignedUtterance, UtterancePool

FRAME = 0.025
HOP = 0.010


def split_counts(weights: Sequence[float], total: int) -> list[int]:
    """Largest-remainder apportionment of ``total`` items, at least 1 each.

    Every part first gets one item; the other ``total - len(weights)`` are
    shared out by largest remainder (ties go to the lower index).
    """
    n = len(weights)
    if not 1 <= n <= total:
        raise ValueError(f"cannot split {total} items into {n} non-empty parts")
    w = np.asarray(weights, dtype=np.float64)
    w = w / w.sum()
    spare = total - n
    quota = w * spare
    counts = np.floor(quota).astype(np.int64)
    left = spare - int(counts.sum())
    order = sorted(range(n), key=lambda k: (-(quota[k] - counts[k]), k))
    for k in order[:left]:
        counts[k] += 1
    return [int(c) + 1 for c in counts]


def partition_utterance(
    u: AlignedUtterance, cfg: SimConfig, rng: np.random.Generator
) -> list[tuple[int, int]]:
    """Contiguous word-index ranges ``[lo, hi)`` covering all words in order."""
    nw = len(u.words)
    if nw == 0:
        raise EmptyUtterance("utterance has no words")
    hi = min(cfg.seg_count_max, nw)
    lo = min(cfg.seg_count_min, hi)
    n = int(rng.integers(lo, hi + 1))
    weights = rng.lognormal(cfg.weight_lognorm_mu, cfg.weight_lognorm_sigma, n)
    ranges, start = [], 0
    for c in split_counts(weights, nw):
        ranges.append((start, start + c))
        start += c
    return ranges


@dataclass(frozen=True)
class PlacedSegment:
    speaker: int
    utterance: int  # index into Timeline.utterances
    word_lo: int
    word_hi: int
    src_start: int  # samples in the source utterance
    src_end: int
    start: int  # samples on the timeline
    gap: int  # requested gap to the previous segment; negative asks for overlap
    text: str
    fade_in: int = 0
    fade_out: int = 0

    @property
    def duration(self) -> int:
        return self.src_end - self.src_start

    @property
    def end(self) -> int:
        return self.start + self.duration


@dataclass(frozen=True, eq=False)
class Timeline:
    placed: tuple[PlacedSegment, ...]
    utterances: tuple[AlignedUtterance, ...]  # utterances[k - 1] belongs to speaker k
    sample_rate: int
    overlap_cap: float
    rng_seed: tuple[int, ...] = ()

    @property
    def num_speakers(self) -> int:
        return len(self.utterances)

    @property
    def total_samples(self) -> int:
        return max((p.end for p in self.placed), default=0)

    @property
    def total_duration(self) -> float:
        return self.total_samples / self.sample_rate

    def seconds(self, samples: int) -> float:
        return samples / self.sample_rate

    def overlaps(self) -> list[int]:
        """Overlap in samples between each adjacent pair of placed segments."""
        return [max(0, a.end - b.start) for a, b in zip(self.placed, self.placed[1:])]

    def to_dict(self) -> dict:
        sr = self.sample_rate
        return {
            "sample_rate": sr,
            "num_speakers": self.num_speakers,
            "duration": self.total_duration,
            "overlap_cap": self.overlap_cap,
            "rng_seed": list(self.rng_seed),
            "speakers": [
                {"speaker": k + 1, "speaker_key": u.speaker_key, "source": u.id, "text": u.text}
                for k, u in enumerate(self.utterances)
            ],
            "segments": [
                {
                    "speaker": p.speaker,
                    "text": p.text,
                    "start": p.start / sr,
                    "end": p.end / sr,
                    "start_sample": p.start,
                    "end_sample": p.end,
                    "gap": p.gap / sr,
                    "words": [p.word_lo, p.word_hi],
                    "source_start": p.src_start / sr,
                    "source_end": p.src_end / sr,
                    "fade_in": p.fade_in / sr,
                    "fade_out": p.fade_out / sr,
                }
                for p in self.placed
            ],
        }


def overlap_limit(cap: float, dur_a: int, dur_b: int) -> int:
    return math.floor(cap * min(dur_a, dur_b))


def layout(placed: Sequence[PlacedSegment], cap: float, fade: int) -> tuple[PlacedSegment, ...]:
    """Assign timeline starts from the stored gaps, honouring the overlap cap."""
    out: list[PlacedSegment] = []
    for p in placed:
        if not out:
            start = 0
        elif p.gap >= 0:
            start = out[-1].end + p.gap
        else:
            prev = out[-1]
            start = prev.end - min(-p.gap, overlap_limit(cap, prev.duration, p.duration))
        f = min(fade, p.duration // 2)
        out.append(dataclasses.replace(p, start=start, fade_in=f, fade_out=f))
    return tuple(out)


def _initial_cuts(u: AlignedUtterance, ranges: list[tuple[int, int]]) -> list[int]:
    """Sample positions of run boundaries: utterance edges plus mid-gap cuts."""
    sr = u.sample_rate
    cuts = [0]
    for lo, _ in ranges[1:]:
        c = round(0.5 * (u.words[lo - 1].end + u.words[lo].start) * sr)
        cuts.append(min(max(c, cuts[-1] + 1), u.num_samples))
    cuts.append(u.num_samples)
    return cuts


def plan_dialogue(
    pool: UtterancePool,
    cfg: SimConfig,
    rng: np.random.Generator,
    seed: Sequence[int] = (),
) -> Timeline:
    """Sample speakers, partition their utterances and interleave the runs."""
    pool.require_speakers(cfg.speakers_min)
    keys = pool.speakers
    k_max = min(cfg.speakers_max, len(keys))
    k = int(rng.integers(cfg.speakers_min, k_max + 1))
    chosen = [keys[i] for i in rng.choice(len(keys), size=k, replace=False)]
    utts = []
    for key in chosen:
        cands = pool.by_speaker[key]
        utts.append(cands[int(rng.integers(len(cands)))])

    queues: dict[int, deque] = {}
    for s, u in enumerate(utts):
        ranges = partition_utterance(u, cfg, rng)
        cuts = _initial_cuts(u, ranges)
        q = deque()
        for r, (lo, hi) in enumerate(ranges):
            text = u.joiner.join(w.text for w in u.words[lo:hi])
            q.append((lo, hi, cuts[r], cuts[r + 1], text))
        queues[s] = q

    sr = cfg.sample_rate
    placed: list[PlacedSegment] = []
    prev = None
    while True:
        live = [s for s in range(k) if queues[s]]
        if not live:
            break
        others = [s for s in live if s != prev]
        choices = others or live
        s = choices[int(rng.integers(len(choices)))]
        lo, hi, a, b, text = queues[s].popleft()
        gap = 0 if not placed else round(rng.normal(cfg.gap_mean, cfg.gap_std) * sr)
        if s == prev:
            gap = max(gap, 0)  # a speaker never overlaps itself
        placed.append(PlacedSegment(s, s, lo, hi, a, b, 0, gap, text))
        prev = s

    # speaker labels in order of first appearance
    order = list(dict.fromkeys(p.speaker for p in placed))
    relabel = {old: new for new, old in enumerate(order)}
    placed = [
        dataclasses.replace(p, speaker=relabel[p.speaker] + 1, utterance=relabel[p.utterance])
        for p in placed
    ]
    utts = [utts[old] for old in order]
    fade = round(cfg.fade * sr)
    return Timeline(
        layout(placed, cfg.overlap_cap, fade), tuple(utts), sr, cfg.overlap_cap, tuple(seed)
    )


def snap_boundaries(tl: Timeline, cfg: SimConfig) -> Timeline:
    """Move interior run boundaries to the quietest nearby frame.

    Candidates are 25 ms frame centres on a 10 ms grid anchored at the
    original cut, within ``cfg.snap_window`` seconds and strictly inside the two
    runs the cut separates. The lowest RMS wins; ties go to the candidate
    nearest the original cut, then the earlier one. The timeline is then
    laid out again from the stored gaps.
    """
    sr = tl.sample_rate
    hop = max(1, round(HOP * sr))
    half = max(1, round(FRAME * sr / 2))
    reach = round(cfg.snap_window * sr) // hop
    steps = np.array(sorted(range(-reach, reach + 1), key=lambda s: (abs(s), s)), dtype=np.int64)
    placed = list(tl.placed)
    for spk in range(1, tl.num_speakers + 1):
        idx = [i for i, p in enumerate(placed) if p.speaker == spk]
        audio = tl.utterances[spk - 1].audio
        for a, b in zip(idx, idx[1:]):
            left, right = placed[a], placed[b]
            cut = left.src_end
            cand = cut + steps * hop
            cand = cand[(cand > left.src_start) & (cand < right.src_end)]
            if len(cand) == 0:
                continue
            rms = kernels.frame_rms(audio, cand, half)
            new = int(cand[int(np.argmin(rms))])
            placed[a] = dataclasses.replace(left, src_end=new)
            placed[b] = dataclasses.replace(right, src_start=new)
    return dataclasses.replace(tl, placed=layout(placed, tl.overlap_cap, round(cfg.fade * sr)))
