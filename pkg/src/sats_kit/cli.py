"""``sats-kit`` command line: score, simulate, stats, normalize, report.

Exit status: 0 on success, 1 on scoring or validation failure, 2 on usage
errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .errors import EmptyCorpus, SatsError, TranscriptError
from .metrics import _workers, score_corpus, score_texts
from .normalizer import NormalizationOptions, normalize
from .report import ScoreEntry, collect_stats, load_score_file, score_table, stats_table
from .transcript import parse

log = logging.getLogger("sats_kit")


class RecordFailure(Exception):
    def __init__(self, rid: str, message: str, fatal: bool = True):
        super().__init__(f"{rid}: {message}")
        self.rid = rid
        self.fatal = fatal


def _read_manifest(path: Path) -> list[dict]:
    recs = []
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            recs.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise SatsError(f"{path}:{n}: invalid JSON ({e})") from None
    return recs


def _load_text(base: Path, rec: dict, keys: tuple[str, ...], rid: str) -> str:
    name = next((rec[k] for k in keys if rec.get(k)), None)
    if name is None:
        raise RecordFailure(rid, f"missing '{keys[0]}' field")
    p = Path(name)
    p = p if p.is_absolute() else base / p
    try:
        return p.read_bytes().decode("utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise RecordFailure(rid, f"cannot read {p}: {e}") from None


def _score_one(base: Path, rec: dict, idx: int, strict: bool, opts: NormalizationOptions):
    rid = str(rec.get("id", idx))
    fmt = rec.get("format", "auto")
    ref = _load_text(base, rec, ("ref_path", "ref"), rid)
    hyp = _load_text(base, rec, ("hyp_path", "hyp"), rid)
    warnings = []
    try:
        parse(ref, fmt)
    except TranscriptError as e:
        raise RecordFailure(rid, f"reference: {e}") from None
    try:
        hyp_t = parse(hyp, fmt)
        warnings += [f"{rid}: hypothesis {d.code}: {d.message}" for d in hyp_t.diagnostics]
    except TranscriptError as e:
        if strict:
            raise RecordFailure(rid, f"hypothesis: {e}") from None
        warnings.append(f"{rid}: hypothesis scored as-is despite: {e}")
    try:
        return score_texts(ref, hyp, opts, id=rid), warnings
    except SatsError as e:
        raise RecordFailure(rid, str(e)) from None


def cmd_score(args) -> int:
    manifest = Path(args.manifest)
    recs = _read_manifest(manifest)
    if not recs:
        raise EmptyCorpus(f"{manifest}: no records")
    opts = NormalizationOptions(
        lowercase=not args.keep_case, strip_punctuation=not args.keep_punctuation
    )

    def run(item):
        idx, rec = item
        try:
            return _score_one(manifest.parent, rec, idx, args.strict, opts)
        except RecordFailure as e:
            return e, []

    with ThreadPoolExecutor(_workers()) as ex:
        results = list(ex.map(run, enumerate(recs)))
    reports, failed = [], 0
    for res, warnings in results:
        for w in warnings:
            print(f"warning: {w}", file=sys.stderr)
        if isinstance(res, RecordFailure):
            failed += 1
            print(f"{'error' if args.strict else 'skipped'}: {res}", file=sys.stderr)
        else:
            reports.append(res)
    if args.strict and failed:
        print(f"{failed} record(s) failed; no scores reported (strict mode)", file=sys.stderr)
        return 1
    if not reports:
        print("error: no record could be scored", file=sys.stderr)
        return 1
    corpus = score_corpus(reports, macro_average=args.macro_average)
    dataset = args.dataset or manifest.stem
    if args.json:
        d = corpus.to_dict()
        d.update(dataset=dataset, system=args.system, failed=failed)
        Path(args.json).write_text(json.dumps(d, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    print(score_table([ScoreEntry(dataset, args.system, corpus.percent)], args.format), end="")
    return 1 if failed else 0


def cmd_simulate(args) -> int:
    from .simulator import SimConfig, generate, load_pool

    overrides = {"seed": args.seed}
    if args.config:
        cfg = SimConfig.load(args.config, **overrides)
    else:
        cfg = SimConfig.from_mapping({k: v for k, v in overrides.items() if v is not None})
    pool = load_pool(args.pool, cfg.sample_rate)
    entries = generate(pool, cfg, args.n, args.out)
    print(f"wrote {len(entries)} dialogues to {args.out}", file=sys.stderr)
    return 0


def cmd_stats(args) -> int:
    stats = collect_stats(args.path)
    name = args.name or Path(args.path).stem
    if args.json:
        print(json.dumps({"dataset": name, **stats.to_dict()}))
    else:
        print(stats_table([(name, stats)], args.decimals), end="")
    return 0


def cmd_normalize(args) -> int:
    data = Path(args.file).read_bytes() if args.file else sys.stdin.buffer.read()
    sys.stdout.buffer.write(normalize(data.decode("utf-8")).encode("utf-8"))
    sys.stdout.buffer.flush()
    return 0


def cmd_report(args) -> int:
    labels = args.labels or []
    if labels and len(labels) != len(args.scores):
        print("error: --labels needs one label per score file", file=sys.stderr)
        return 2
    entries = [
        load_score_file(p, labels[i] if labels else None) for i, p in enumerate(args.scores)
    ]
    out = score_table(entries, args.format)
    if args.output:
        Path(args.output).write_text(out, encoding="utf-8")
    else:
        print(out, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sats-kit", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="CER / cpCER / delta-cp over a JSONL manifest")
    p.add_argument("--manifest", required=True, help="JSONL with id, ref, hyp[, format]")
    p.add_argument("--strict", action="store_true", help="any malformed record fails the run")
    p.add_argument("--macro-average", action="store_true", help="average per-record rates")
    p.add_argument("--json", metavar="OUT", help="write the corpus report as JSON")
    p.add_argument("--dataset", help="dataset name for tables (default: manifest stem)")
    p.add_argument("--system", default="score", help="system label for tables")
    p.add_argument("--keep-case", action="store_true")
    p.add_argument("--keep-punctuation", action="store_true")
    p.add_argument("--format", choices=("text", "markdown"), default="text")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("simulate", help="generate simulated multi-speaker dialogues")
    p.add_argument("--pool", required=True, help="JSONL utterance pool manifest")
    p.add_argument("--config", help="flat YAML/JSON SimConfig overrides")
    p.add_argument("-n", type=int, required=True, help="number of dialogues")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stats", help="duration and speaker-count statistics")
    p.add_argument("path", help="manifest file or dataset directory")
    p.add_argument("--name", help="dataset label")
    p.add_argument("--decimals", type=int, default=3)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("normalize", help="strip markup, keep speaker tags (stdin to stdout)")
    p.add_argument("file", nargs="?")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("report", help="multi-system comparison table from score JSON files")
    p.add_argument("--scores", nargs="+", required=True)
    p.add_argument("--labels", nargs="+")
    p.add_argument("--format", choices=("text", "markdown"), default="text")
    p.add_argument("--output")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (SatsError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
