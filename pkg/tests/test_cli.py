import json
import shutil
import subprocess
import sys

import pytest

from conftest import make_pool, write_pool
from sats_kit.cli import main
from sats_kit.simulator import SimConfig, generate

NORMALIZE_CASES = [
    ("[S1]你好 (笑声)[S2]好的", "[S1]你好[S2]好的"),
    ("[S1]<emotion>开心</emotion>说<ovl>", "[S1]开心说"),
    ("[00:00:01.000] [S01] 大家好 [event] [00:00:03.500]", " [S01] 大家好  "),
    ("", ""),
]


def run_cli(*args, stdin=b""):
    return subprocess.run(
        [sys.executable, "-m", "sats_kit", *args], input=stdin, capture_output=True
    )


def write_manifest(tmp_path, records, name="eval.jsonl"):
    lines = []
    for i, (ref, hyp) in enumerate(records):
        (tmp_path / f"r{i}.txt").write_text(ref, encoding="utf-8")
        (tmp_path / f"h{i}.txt").write_text(hyp, encoding="utf-8")
        lines.append(json.dumps({"id": f"rec{i}", "ref": f"r{i}.txt", "hyp": f"h{i}.txt"}))
    m = tmp_path / name
    m.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return m


@pytest.fixture(scope="module")
def small_pool_manifest(tmp_path_factory):
    return write_pool(make_pool(n_speakers=4, per_speaker=1, words=(3, 6)),
                      tmp_path_factory.mktemp("pool"))


class TestNormalize:
    @pytest.mark.parametrize("raw, expected", NORMALIZE_CASES)
    def test_bytes(self, raw, expected):
        out = run_cli("normalize", stdin=raw.encode())
        assert out.returncode == 0
        assert out.stdout == expected.encode()

    def test_idempotent_via_double_invocation(self):
        raw = "[S1]a (b) <c>d</c> [e] [S02]f".encode()
        once = run_cli("normalize", stdin=raw).stdout
        assert run_cli("normalize", stdin=once).stdout == once

    def test_file_argument(self, tmp_path, capsysbinary):
        p = tmp_path / "in.txt"
        p.write_bytes(NORMALIZE_CASES[0][0].encode())
        assert main(["normalize", str(p)]) == 0
        assert capsysbinary.readouterr().out == NORMALIZE_CASES[0][1].encode()


class TestScore:
    def test_copies_score_zero(self, tmp_path, capsys):
        m = write_manifest(tmp_path, [("[S1]你好[S2]好的", "[S1]你好[S2]好的")])
        assert main(["score", "--manifest", str(m)]) == 0
        out = capsys.readouterr().out
        assert out.count("0.00") == 3

    def test_pooled_hand_computed(self, tmp_path, capsys):
        # record 0: worked example, 8 chars, CER 0, cpCER 8 edits
        # record 1: one substitution in 2 chars, labels swapped -> cpCER 4 edits
        m = write_manifest(tmp_path, [
            ("[S1]aaaa[S2]bbbb", "[S1]aaaabbbb"),
            ("[S1]xy", "[S2]xz"),
        ])
        out_json = tmp_path / "out.json"
        assert main(["score", "--manifest", str(m), "--json", str(out_json)]) == 0
        d = json.loads(out_json.read_text())
        assert d["cer"] == pytest.approx(1 / 10)
        assert d["cpcer"] == pytest.approx(9 / 10)
        assert d["delta_cp"] == pytest.approx(8 / 10)
        table = capsys.readouterr().out
        assert "10.00" in table and "90.00" in table and "80.00" in table

    def test_strict_malformed_hyp(self, tmp_path, capsys):
        m = write_manifest(tmp_path, [
            ("[S1]ok", "[S1]ok"),
            ("[00:00:01.000] [S01] a [00:00:02.000]", "[00:00:01.000] [S01] a [S02] b [00:00:02.000]"),
        ])
        assert main(["score", "--manifest", str(m), "--strict"]) == 1
        err = capsys.readouterr().err
        assert "rec1" in err and "byte offset" in err

    def test_lenient_scores_malformed_hyp(self, tmp_path, capsys):
        m = write_manifest(tmp_path, [
            ("[00:00:01.000] [S01] a [00:00:02.000]", "[00:00:01.000] [S01] a [S02] b [00:00:02.000]"),
        ])
        assert main(["score", "--manifest", str(m)]) == 0
        cap = capsys.readouterr()
        assert "rec0" in cap.err and "warning" in cap.err

    def test_bad_reference_skipped(self, tmp_path, capsys):
        m = write_manifest(tmp_path, [("[S1]ok", "[S1]ok"), ("no tags", "[S1]x")])
        assert main(["score", "--manifest", str(m)]) == 1
        assert "rec1" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        m = tmp_path / "m.jsonl"
        m.write_text(json.dumps({"id": "gone", "ref": "nope.txt", "hyp": "nope.txt"}) + "\n")
        assert main(["score", "--manifest", str(m), "--strict"]) == 1
        assert "gone" in capsys.readouterr().err

    def test_empty_manifest(self, tmp_path):
        m = tmp_path / "m.jsonl"
        m.write_text("")
        assert main(["score", "--manifest", str(m)]) == 1

    def test_usage_error(self):
        assert run_cli("bogus").returncode == 2
        assert run_cli("score").returncode == 2


class TestSimulate:
    def test_seed_determinism(self, small_pool_manifest, tmp_path):
        trees = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["simulate", "--pool", str(small_pool_manifest), "-n", "2",
                         "--out", str(out), "--seed", "7"]) == 0
            trees.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        assert trees[0] == trees[1]

    def test_file_counts_with_two_speakers(self, small_pool_manifest, tmp_path):
        cfg = tmp_path / "cfg.yaml"
        cfg.write_text("speakers_min: 2\nspeakers_max: 2\n")
        out = tmp_path / "out"
        assert main(["simulate", "--pool", str(small_pool_manifest), "--config", str(cfg),
                     "-n", "3", "--out", str(out)]) == 0
        names = sorted(p.name for p in out.iterdir())
        assert [n.rsplit(".", 1)[1] for n in names].count("wav") == 3
        assert len(names) == 10 and "manifest.jsonl" in names
        recs = [json.loads(x) for x in (out / "manifest.jsonl").read_text().splitlines()]
        assert [r["num_speakers"] for r in recs] == [2, 2, 2]

    def test_loop_closure(self, small_pool_manifest, tmp_path, capsys):
        out = tmp_path / "sim"
        assert main(["simulate", "--pool", str(small_pool_manifest), "-n", "3",
                     "--out", str(out)]) == 0
        lines = [json.loads(x) for x in (out / "manifest.jsonl").read_text().splitlines()]
        m = out / "self.jsonl"
        m.write_text("".join(
            json.dumps({"id": r["audio"], "ref": r["ref"], "hyp": r["ref"]}) + "\n" for r in lines
        ))
        capsys.readouterr()
        assert main(["score", "--manifest", str(m), "--strict"]) == 0
        rows = capsys.readouterr().out.splitlines()[2:]
        assert [r.split()[-1] for r in rows] == ["0.00", "0.00", "0.00"]

    def test_bad_config_key(self, small_pool_manifest, tmp_path, capsys):
        cfg = tmp_path / "cfg.yaml"
        cfg.write_text("speekers_max: 3\n")
        assert main(["simulate", "--pool", str(small_pool_manifest), "--config", str(cfg),
                     "-n", "1", "--out", str(tmp_path / "o")]) == 1
        assert "speekers_max" in capsys.readouterr().err


class TestStats:
    def test_single_dialogue(self, tmp_path, capsys):
        (tmp_path / "a.txt").write_text(
            "[00:00:00.000] [S01] a [00:00:06.000]\n[00:00:05.000] [S02] b [00:00:10.000]"
        )
        m = tmp_path / "m.jsonl"
        m.write_text(json.dumps({"ref": "a.txt"}) + "\n")
        assert main(["stats", str(m), "--json"]) == 0
        d = json.loads(capsys.readouterr().out)
        assert (d["duration_min"], d["duration_max"], d["duration_avg"]) == (10, 10, 10)
        assert (d["speakers_min"], d["speakers_max"]) == (2, 2)

    def test_matches_generator_bookkeeping(self, tmp_path, capsys):
        pool = make_pool(n_speakers=5, per_speaker=1, words=(3, 6))
        entries = generate(pool, SimConfig(augment=False), 4, tmp_path)
        assert main(["stats", str(tmp_path), "--json"]) == 0
        d = json.loads(capsys.readouterr().out)
        durs = [e["duration"] for e in entries]
        ks = [e["num_speakers"] for e in entries]
        assert (d["duration_min"], d["duration_max"]) == (min(durs), max(durs))
        assert d["duration_avg"] == pytest.approx(sum(durs) / 4)
        assert (d["speakers_min"], d["speakers_max"], d["record_count"]) == (min(ks), max(ks), 4)
        (tmp_path / "manifest.jsonl").unlink()  # sidecars alone give the same answer
        assert main(["stats", str(tmp_path), "--json"]) == 0
        assert json.loads(capsys.readouterr().out) == d

    def test_table_layout(self, tmp_path, capsys):
        m = tmp_path / "m.jsonl"
        m.write_text(json.dumps({"duration": 12.5, "num_speakers": 3}) + "\n"
                     + json.dumps({"duration": 30.0, "num_speakers": 5}) + "\n")
        assert main(["stats", str(m), "--name", "Demo", "--decimals", "1"]) == 0
        assert capsys.readouterr().out.splitlines() == [
            "Dataset  Duration Range (s)  Avg. Duration (s)  Number of Speakers",
            "-------  ------------------  -----------------  ------------------",
            "Demo     12.5 -- 30.0        21.2               3 -- 5",
        ]

    def test_empty_directory(self, tmp_path, capsys):
        assert main(["stats", str(tmp_path)]) == 1
        assert "no records" in capsys.readouterr().err

    def test_missing_metadata(self, tmp_path, capsys):
        m = tmp_path / "m.jsonl"
        m.write_text(json.dumps({"id": "x"}) + "\n")
        assert main(["stats", str(m)]) == 1
        assert "record x" in capsys.readouterr().err


def test_console_script_installed():
    exe = shutil.which("sats-kit")
    if exe is None:
        pytest.skip("console script not on PATH")
    out = subprocess.run([exe, "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip()
