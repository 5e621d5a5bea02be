"""CER, cpCER and delta-cp with exact optimal speaker assignment."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import EmptyCorpus, EmptyReference
from .normalizer import (
    DEFAULT_OPTIONS,
    NormalizationOptions,
    scoring_view,
    split_by_speaker,
    transcript_tokens,
)
from .transcript import Transcript


@dataclass(frozen=True)
class EditCounts:
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    ref_len: int = 0

    def __post_init__(self):
        if min(self.substitutions, self.deletions, self.insertions, self.ref_len) < 0:
            raise ValueError(f"negative edit counts: {self}")

    @property
    def distance(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def rate(self) -> float:
        if self.ref_len == 0:
            raise EmptyReference("error rate undefined for an empty reference")
        return self.distance / self.ref_len

    def __add__(self, other: "EditCounts") -> "EditCounts":
        if not isinstance(other, EditCounts):
            return NotImplemented
        return EditCounts(
            self.substitutions + other.substitutions,
            self.deletions + other.deletions,
            self.insertions + other.insertions,
            self.ref_len + other.ref_len,
        )

    def __radd__(self, other):
        if other == 0:
            return self
        return NotImplemented

    def to_dict(self) -> dict[str, int]:
        return {
            "substitutions": self.substitutions,
            "deletions": self.deletions,
            "insertions": self.insertions,
            "distance": self.distance,
            "ref_len": self.ref_len,
        }


def _encode(*seqs: Sequence[Hashable]) -> list[np.ndarray]:
    vocab: dict[Hashable, int] = {}
    return [
        np.fromiter((vocab.setdefault(x, len(vocab)) for x in s), dtype=np.int32, count=len(s))
        for s in seqs
    ]


def edit_distance(ref: Sequence[Hashable], hyp: Sequence[Hashable]) -> EditCounts:
    """Unit-cost Levenshtein alignment of ``ref`` into ``hyp``.

    Among minimum-distance alignments the one with the fewest insertions is
    reported, which fixes the S/D/I split deterministically.

    >>> edit_distance("kitten", "sitting").distance
    3
    """
    a, b = _encode(ref, hyp)
    dist, ins = kernels.levenshtein(a, b)
    dels = ins - (len(hyp) - len(ref))
    return EditCounts(dist - ins - dels, dels, ins, len(ref))


# --------------------------------------------------------------------------
# speaker assignment
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CostMatrix:
    """Square assignment problem built from per-speaker streams.

    Rows ``0..len(ref_ids)-1`` are real reference speakers, columns
    ``0..len(hyp_ids)-1`` real hypothesis speakers; remaining rows/columns are
    virtual. A real speaker matched to a virtual one pays its whole stream
    length (all deleted or all inserted).
    """

    matrix: np.ndarray
    ref_ids: tuple
    hyp_ids: tuple
    ref_lens: tuple[int, ...]
    hyp_lens: tuple[int, ...]


def speaker_cost_matrix(
    ref_streams: Mapping[Hashable, Sequence[Hashable]],
    hyp_streams: Mapping[Hashable, Sequence[Hashable]],
) -> CostMatrix:
    ref_ids = tuple(sorted(ref_streams))
    hyp_ids = tuple(sorted(hyp_streams))
    refs = [ref_streams[k] for k in ref_ids]
    hyps = [hyp_streams[k] for k in hyp_ids]
    codes = _encode(*refs, *hyps)
    rc, hc = codes[: len(refs)], codes[len(refs):]
    n = max(len(refs), len(hyps))
    m = np.zeros((n, n), dtype=np.int64)
    for i, r in enumerate(rc):
        for j, h in enumerate(hc):
            m[i, j] = kernels.levenshtein(r, h)[0]
        m[i, len(hyps):] = len(r)
    for j, h in enumerate(hc):
        m[len(refs):, j] = len(h)
    return CostMatrix(m, ref_ids, hyp_ids, tuple(map(len, refs)), tuple(map(len, hyps)))


@dataclass(frozen=True)
class Assignment:
    pairs: tuple[tuple[Any, Any], ...]
    unmatched_ref: tuple = ()
    unmatched_hyp: tuple = ()
    total_cost: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "pairs": [list(p) for p in self.pairs],
            "unmatched_ref": list(self.unmatched_ref),
            "unmatched_hyp": list(self.unmatched_hyp),
            "total_cost": self.total_cost,
        }


def solve_assignment(matrix: np.ndarray) -> np.ndarray:
    """Minimum-cost perfect matching, lexicographically smallest on ties.

    Returns the column for each row. Rows are fixed in order to the smallest
    column that still admits an optimal completion, each check being one
    Hungarian solve on the remaining sub-problem.
    """
    matrix = np.asarray(matrix, dtype=np.int64)
    n = matrix.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64)
    first = kernels.hungarian(matrix)
    remaining = int(matrix[np.arange(n), first].sum())
    cols = list(range(n))
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        for j in cols:
            rest = [c for c in cols if c != j]
            sub = matrix[np.ix_(range(i + 1, n), rest)]
            sub_cost = int(sub[np.arange(len(rest)), kernels.hungarian(sub)].sum()) if rest else 0
            if matrix[i, j] + sub_cost == remaining:
                out[i] = j
                remaining -= int(matrix[i, j])
                cols = rest
                break
    return out


def optimal_assignment(cm: CostMatrix | np.ndarray) -> Assignment:
    """Optimal ref/hyp speaker pairing.

    A bare matrix is treated as all-real with 1-based speaker indices.
    """
    if not isinstance(cm, CostMatrix):
        m = np.asarray(cm, dtype=np.int64)
        n = m.shape[0]
        ids = tuple(range(1, n + 1))
        cm = CostMatrix(m, ids, ids, (0,) * n, (0,) * n)
    col = solve_assignment(cm.matrix)
    nr, nh = len(cm.ref_ids), len(cm.hyp_ids)
    pairs, un_ref = [], []
    matched_hyp = set()
    for i in range(nr):
        j = int(col[i])
        if j < nh:
            pairs.append((cm.ref_ids[i], cm.hyp_ids[j]))
            matched_hyp.add(j)
        else:
            un_ref.append(cm.ref_ids[i])
    un_hyp = [cm.hyp_ids[j] for j in range(nh) if j not in matched_hyp]
    total = int(cm.matrix[np.arange(len(col)), col].sum())
    return Assignment(tuple(pairs), tuple(un_ref), tuple(un_hyp), total)


# --------------------------------------------------------------------------
# metrics
# --------------------------------------------------------------------------


def cer(
    ref: Transcript, hyp: Transcript, opts: NormalizationOptions = DEFAULT_OPTIONS
) -> EditCounts:
    r = transcript_tokens(ref, opts)
    if not r:
        raise EmptyReference("reference has no scorable characters")
    return edit_distance(r, transcript_tokens(hyp, opts))


def cpcer(
    ref: Transcript, hyp: Transcript, opts: NormalizationOptions = DEFAULT_OPTIONS
) -> tuple[EditCounts, Assignment]:
    rs = split_by_speaker(ref, opts)
    hs = split_by_speaker(hyp, opts)
    ref_len = sum(map(len, rs.values()))
    if not ref_len:
        raise EmptyReference("reference has no scorable characters")
    asg = optimal_assignment(speaker_cost_matrix(rs, hs))
    counts = EditCounts(ref_len=0)
    for r, h in asg.pairs:
        counts += edit_distance(rs[r], hs[h])
    counts += EditCounts(
        deletions=sum(len(rs[r]) for r in asg.unmatched_ref),
        insertions=sum(len(hs[h]) for h in asg.unmatched_hyp),
        ref_len=sum(len(rs[r]) for r in asg.unmatched_ref),
    )
    assert counts.distance == asg.total_cost and counts.ref_len == ref_len
    return counts, asg


@dataclass(frozen=True)
class ScoreReport:
    cer: float
    cpcer: float
    delta_cp: float
    cer_counts: EditCounts
    cpcer_counts: EditCounts
    assignment: Assignment | None = None
    records: tuple["ScoreReport", ...] = ()
    id: str | None = None
    aggregation: str = "record"

    @property
    def percent(self) -> dict[str, float]:
        return {"cer": 100 * self.cer, "cpcer": 100 * self.cpcer, "delta_cp": 100 * self.delta_cp}

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {}
        if self.id is not None:
            d["id"] = self.id
        d.update(
            cer=self.cer,
            cpcer=self.cpcer,
            delta_cp=self.delta_cp,
            percent=self.percent,
            aggregation=self.aggregation,
            counts={"cer": self.cer_counts.to_dict(), "cpcer": self.cpcer_counts.to_dict()},
        )
        if self.assignment is not None:
            d["assignment"] = self.assignment.to_dict()
        if self.records:
            d["records"] = [r.to_dict() for r in self.records]
        return d


def _report(c: EditCounts, cp: EditCounts, asg=None, **kw) -> ScoreReport:
    cer_rate, cp_rate = c.rate, cp.rate
    return ScoreReport(cer_rate, cp_rate, cp_rate - cer_rate, c, cp, asg, **kw)


def score_record(
    ref: Transcript,
    hyp: Transcript,
    opts: NormalizationOptions = DEFAULT_OPTIONS,
    id: str | None = None,
) -> ScoreReport:
    c = cer(ref, hyp, opts)
    cp, asg = cpcer(ref, hyp, opts)
    return _report(c, cp, asg, id=id)


def score_texts(
    ref: str, hyp: str, opts: NormalizationOptions = DEFAULT_OPTIONS, id: str | None = None
) -> ScoreReport:
    """Score raw strings (either format) after markup normalisation."""
    return score_record(scoring_view(ref), scoring_view(hyp), opts, id=id)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("SATS_KIT_THREADS", "1")))
    except ValueError:
        return 1


def score_corpus(
    records: Iterable[tuple[Transcript, Transcript]] | Iterable[ScoreReport],
    opts: NormalizationOptions = DEFAULT_OPTIONS,
    macro_average: bool = False,
) -> ScoreReport:
    """Pooled (default) or per-record averaged corpus metrics.

    Pooled rates are total edits over total reference characters, computed
    separately for CER and cpCER.
    """
    items = list(records)
    if not items:
        raise EmptyCorpus("no records to score")
    if isinstance(items[0], ScoreReport):
        reports = items
    else:
        with ThreadPoolExecutor(_workers()) as ex:
            reports = list(ex.map(lambda rh: score_record(rh[0], rh[1], opts), items))
    c = sum(r.cer_counts for r in reports)
    cp = sum(r.cpcer_counts for r in reports)
    if not macro_average:
        return _report(c, cp, records=tuple(reports), aggregation="pooled")
    cer_rate = float(np.mean([r.cer for r in reports]))
    cp_rate = float(np.mean([r.cpcer for r in reports]))
    return ScoreReport(
        cer_rate, cp_rate, cp_rate - cer_rate, c, cp, None, tuple(reports), aggregation="macro"
    )
