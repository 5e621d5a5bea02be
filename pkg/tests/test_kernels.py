import itertools
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sats_kit import kernels

IMPLS = sorted(kernels.IMPLEMENTATIONS)
codes = st.lists(st.integers(0, 5), max_size=25).map(lambda x: np.array(x, dtype=np.int32))


def test_numba_available_and_default():
    assert kernels.HAVE_NUMBA
    if not kernels.JIT_DISABLED:
        assert kernels.BACKEND == "numba"


@pytest.mark.parametrize("flag, expected", [("1", "numpy"), ("0", "numba"), ("", "numba")])
def test_env_flag_selects_backend(flag, expected):
    env = dict(os.environ, SATS_KIT_NO_JIT=flag)
    out = subprocess.run(
        [sys.executable, "-c", "from sats_kit import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == expected


@settings(max_examples=300, deadline=None)
@given(codes, codes)
def test_levenshtein_backends_agree(a, b):
    results = {name: kernels.IMPLEMENTATIONS[name]["levenshtein"](a, b) for name in IMPLS}
    vals = {tuple(int(v) for v in r) for r in results.values()}
    assert len(vals) == 1


def test_levenshtein_empty_inputs():
    e = np.zeros(0, dtype=np.int32)
    x = np.array([1, 2, 3], dtype=np.int32)
    for name in IMPLS:
        f = kernels.IMPLEMENTATIONS[name]["levenshtein"]
        assert int(f(e, e)[0]) == 0
    assert kernels.levenshtein(e, x) == (3, 3)
    assert kernels.levenshtein(x, e) == (3, 0)


@pytest.mark.parametrize("impl", IMPLS)
def test_hungarian_matches_permutations(impl):
    rng = np.random.default_rng(11)
    solve = kernels.IMPLEMENTATIONS[impl]["hungarian"]
    for _ in range(150):
        n = int(rng.integers(1, 7))
        c = rng.integers(0, 12, (n, n)).astype(np.int64)
        col = solve(c)
        assert sorted(col.tolist()) == list(range(n))
        best = min(
            sum(c[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n))
        )
        assert c[np.arange(n), col].sum() == best


def test_hungarian_backends_identical():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(1, 10))
        c = rng.integers(0, 4, (n, n)).astype(np.int64)  # many ties
        cols = [kernels.IMPLEMENTATIONS[i]["hungarian"](c).tolist() for i in IMPLS]
        assert all(x == cols[0] for x in cols)


def test_hungarian_rejects_non_square():
    with pytest.raises(ValueError):
        kernels.hungarian(np.zeros((2, 3)))
    assert kernels.hungarian(np.zeros((0, 0))).shape == (0,)


def test_frame_rms_backends_bitwise_equal():
    rng = np.random.default_rng(2)
    x = rng.normal(size=5000)
    x[1000:2000] = 0.0
    centers = np.arange(-300, 5300, 37)
    outs = [kernels.IMPLEMENTATIONS[i]["frame_rms"](x, centers, 200) for i in IMPLS]
    for o in outs[1:]:
        assert np.array_equal(o, outs[0])


def test_frame_rms_values():
    x = np.zeros(1000)
    x[500:] = 2.0
    r = kernels.frame_rms(x, np.array([100, 600, 500, -5000]), 50)
    assert r[0] == 0.0
    assert r[1] == pytest.approx(2.0)
    assert r[2] == pytest.approx(np.sqrt(2.0))
    assert np.isinf(r[3])


def test_benchmark_script_runs():
    script = os.path.join(os.path.dirname(__file__), "..", "benchmarks", "bench_kernels.py")
    out = subprocess.run([sys.executable, script, "--repeat", "1"], capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert out.stdout.count("True") == 9
