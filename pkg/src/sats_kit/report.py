"""Plain-text and markdown tables for scores and dataset statistics."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyCorpus, MissingMetadata
from .transcript import LONG, parse

METRIC_ROWS = (("cer", "CER (↓)"), ("cpcer", "cpCER (↓)"), ("delta_cp", "Δcp (↓)"))
MISSING = "\\"


@dataclass(frozen=True)
class ScoreEntry:
    dataset: str
    system: str
    percent: dict  # metric key -> value in percent


def load_score_file(path: str | Path, label: str | None = None) -> ScoreEntry:
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    pct = d.get("percent") or {k: 100 * d[k] for k, _ in METRIC_ROWS}
    return ScoreEntry(
        d.get("dataset") or Path(path).stem,
        label or d.get("system") or Path(path).stem,
        {k: float(pct[k]) for k, _ in METRIC_ROWS},
    )


def _grid(entries: Sequence[ScoreEntry]):
    datasets = list(dict.fromkeys(e.dataset for e in entries))
    systems = list(dict.fromkeys(e.system for e in entries))
    cells = {(e.dataset, e.system): e.percent for e in entries}
    return datasets, systems, cells


def score_table(entries: Sequence[ScoreEntry], fmt: str = "text") -> str:
    """Dataset x metric rows, one column per system, percent with 2 decimals.

    Missing (dataset, system) cells print as a backslash. In markdown the
    lowest value of each row is bold.
    """
    if not entries:
        raise EmptyCorpus("no score entries")
    datasets, systems, cells = _grid(entries)
    header = ["Dataset", "Metric", *systems]
    rows: list[list[str]] = []
    for ds in datasets:
        for r, (key, name) in enumerate(METRIC_ROWS):
            vals = [cells.get((ds, s), {}).get(key) for s in systems]
            present = [v for v in vals if v is not None]
            best = min(present, key=lambda v: round(v, 2)) if present else None
            out = []
            for v in vals:
                if v is None:
                    out.append(MISSING)
                elif fmt == "markdown" and len(present) > 1 and f"{v:.2f}" == f"{best:.2f}":
                    out.append(f"**{v:.2f}**")
                else:
                    out.append(f"{v:.2f}")
            rows.append([ds if r == 0 else "", name, *out])
    if fmt == "markdown":
        lines = ["| " + " | ".join(header) + " |", "|" + "|".join(["---"] * 2 + ["---:"] * len(systems)) + "|"]
        lines += ["| " + " | ".join(row) + " |" for row in rows]
        return "\n".join(lines) + "\n"
    return _text_table(header, rows, right_from=2)


def _text_table(header: list[str], rows: list[list[str]], right_from: int) -> str:
    widths = [max(len(r[c]) for r in [header, *rows]) for c in range(len(header))]

    def fmt(row):
        cells = [
            cell.rjust(w) if c >= right_from else cell.ljust(w)
            for c, (cell, w) in enumerate(zip(row, widths))
        ]
        return "  ".join(cells).rstrip()

    sep = "  ".join("-" * w for w in widths)
    return "\n".join([fmt(header), sep, *map(fmt, rows)]) + "\n"


# --------------------------------------------------------------------------
# dataset statistics
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DatasetStats:
    duration_min: float
    duration_max: float
    duration_avg: float
    speakers_min: int
    speakers_max: int
    record_count: int

    def to_dict(self) -> dict:
        return asdict(self)


def dataset_stats(records: Iterable[tuple[float, int]]) -> DatasetStats:
    items = list(records)
    if not items:
        raise EmptyCorpus("no records found")
    d = np.array([r[0] for r in items], dtype=np.float64)
    k = [r[1] for r in items]
    return DatasetStats(
        float(d.min()), float(d.max()), float(d.mean()), min(k), max(k), len(items)
    )


def stats_table(rows: Sequence[tuple[str, DatasetStats]], decimals: int = 3) -> str:
    header = ["Dataset", "Duration Range (s)", "Avg. Duration (s)", "Number of Speakers"]
    body = [
        [
            name,
            f"{s.duration_min:.{decimals}f} -- {s.duration_max:.{decimals}f}",
            f"{s.duration_avg:.{decimals}f}",
            f"{s.speakers_min} -- {s.speakers_max}",
        ]
        for name, s in rows
    ]
    return _text_table(header, body, right_from=len(header))


def _resolve(base: Path, p: str) -> Path:
    q = Path(p)
    return q if q.is_absolute() else base / q


def record_metadata(rec: dict, base: Path) -> tuple[float, int]:
    """``(duration_s, num_speakers)`` from a manifest record.

    Looks at, in order: inline ``duration``/``num_speakers``, the timeline
    sidecar, then a long-form reference transcript (plus audio length when
    the reference is untimed).
    """
    rid = rec.get("id") or rec.get("audio") or rec.get("ref") or "?"
    if "duration" in rec and "num_speakers" in rec:
        return float(rec["duration"]), int(rec["num_speakers"])
    if rec.get("timeline"):
        tl = json.loads(_resolve(base, rec["timeline"]).read_text(encoding="utf-8"))
        return float(tl["duration"]), int(tl["num_speakers"])
    ref = rec.get("ref") or rec.get("ref_path")
    if ref:
        t = parse(_resolve(base, ref).read_text(encoding="utf-8"))
        speakers = len(set(s.speaker for s in t.segments))
        if t.format == LONG:
            return max(s.end for s in t.segments), speakers
        if rec.get("audio"):
            from .simulator.pool import read_wav

            x, sr = read_wav(_resolve(base, rec["audio"]))
            return len(x) / sr, speakers
    raise MissingMetadata(f"record {rid}: cannot determine duration and speaker count")


def collect_stats(path: str | Path) -> DatasetStats:
    """Statistics for a manifest file or a directory holding ``manifest.jsonl``.

    A directory without a manifest is scanned for timeline sidecars
    (``*.json``).
    """
    path = Path(path)
    if path.is_dir():
        manifest = path / "manifest.jsonl"
        if not manifest.exists():
            recs = [{"timeline": p.name} for p in sorted(path.glob("*.json"))]
            return dataset_stats(record_metadata(r, path) for r in recs)
        path = manifest
    recs = [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    return dataset_stats(record_metadata(r, path.parent) for r in recs)
