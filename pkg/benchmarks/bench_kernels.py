"""Time the numba and numpy backends of each kernel on identical inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

JIT compilation is triggered once before timing. Each row reports the best of
``--repeat`` runs, and the script checks both backends return the same values.
"""
import argparse
import json
import time

import numpy as np

from sats_kit import kernels


def cases(rng):
    """(kernel, label, args) triples at a few sizes."""
    out = []
    for n in (50, 500, 2000):
        a = rng.integers(0, 30, n).astype(np.int32)
        b = rng.integers(0, 30, n + n // 10).astype(np.int32)
        out.append(("levenshtein", f"{n} x {len(b)} chars", (a, b)))
    for n in (4, 12, 64):
        out.append(("hungarian", f"{n} x {n}", (rng.integers(0, 500, (n, n)).astype(np.int64),)))
    for secs in (1, 10, 60):
        x = rng.standard_normal(16000 * secs)
        centers = np.arange(0, len(x), 160, dtype=np.int64)
        out.append(("frame_rms", f"{secs} s @ 16 kHz, {len(centers)} frames", (x, centers, 200)))
    return out


def best_time(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def same(x, y):
    if isinstance(x, tuple):
        return all(int(p) == int(q) for p, q in zip(x, y))
    return np.array_equal(x, y)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", help="also write rows as JSON")
    args = ap.parse_args()

    if "numba" not in kernels.IMPLEMENTATIONS:
        raise SystemExit("numba is not importable; nothing to compare")
    impls = kernels.IMPLEMENTATIONS
    rows = []
    for kernel, label, inputs in cases(np.random.default_rng(args.seed)):
        fast, ref = impls["numba"][kernel], impls["numpy"][kernel]
        agree = same(fast(*inputs), ref(*inputs))  # also compiles
        t_nb = best_time(fast, inputs, args.repeat)
        t_np = best_time(ref, inputs, args.repeat)
        rows.append({
            "kernel": kernel, "size": label, "numba_ms": 1e3 * t_nb, "numpy_ms": 1e3 * t_np,
            "speedup": t_np / t_nb if t_nb else float("inf"), "agree": agree,
        })

    print(f"{'kernel':<12} {'size':<32} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8}  agree")
    for r in rows:
        print(f"{r['kernel']:<12} {r['size']:<32} {r['numba_ms']:>10.3f} {r['numpy_ms']:>10.3f} "
              f"{r['speedup']:>7.1f}x  {r['agree']}")
    if args.json:
        with open(args.json, "w") as f:
            json.dump(rows, f, indent=1)
    if not all(r["agree"] for r in rows):
        raise SystemExit("backends disagree")


if __name__ == "__main__":
    main()
