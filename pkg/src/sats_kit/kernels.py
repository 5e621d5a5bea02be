"""Numeric inner loops: alignment DP, linear assignment, framed RMS.

Every kernel exists twice: a loop version compiled with ``numba.njit`` and a
vectorised pure-numpy version. Both produce identical results (integer
kernels exactly, the RMS kernel bit-for-bit). The numba path is used when
numba imports and ``SATS_KIT_NO_JIT`` is unset or ``0``.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

HAVE_NUMBA = numba is not None
JIT_DISABLED = os.environ.get("SATS_KIT_NO_JIT", "").strip() not in ("", "0")
USE_NUMBA = HAVE_NUMBA and not JIT_DISABLED
BACKEND = "numba" if USE_NUMBA else "numpy"

# Sentinel for the assignment solver; costs are edit distances so they stay
# many orders of magnitude below this.
_INF = np.int64(2**62)


# --------------------------------------------------------------------------
# Levenshtein with an insertion-count tie-break
# --------------------------------------------------------------------------
#
# Costs: match 0, substitution B, deletion B, insertion B + 1 with
# B = len(a) + len(b) + 1. The minimum is dist * B + ins where dist is the
# unit-cost edit distance and ins the fewest insertions over all minimal
# alignments, so one scalar DP yields the full S/D/I breakdown.


def _levenshtein_loop(a, b):
    n = a.shape[0]
    m = b.shape[0]
    big = n + m + 1
    ins = big + 1
    prev = np.empty(m + 1, dtype=np.int64)
    cur = np.empty(m + 1, dtype=np.int64)
    for j in range(m + 1):
        prev[j] = j * ins
    for i in range(1, n + 1):
        cur[0] = i * big
        ai = a[i - 1]
        for j in range(1, m + 1):
            best = prev[j] + big
            diag = prev[j - 1] + (0 if ai == b[j - 1] else big)
            if diag < best:
                best = diag
            left = cur[j - 1] + ins
            if left < best:
                best = left
            cur[j] = best
        prev, cur = cur, prev
    return prev[m], big


def _levenshtein_numpy(a, b):
    n = a.shape[0]
    m = b.shape[0]
    big = n + m + 1
    ins = big + 1
    ramp = np.arange(m + 1, dtype=np.int64) * ins
    prev = ramp.copy()
    tmp = np.empty(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        tmp[0] = i * big
        sub = np.where(b == a[i - 1], 0, big)
        np.minimum(prev[1:] + big, prev[:-1] + sub, out=tmp[1:])
        # Insertion chain: cur[j] = min_k tmp[k] + (j - k) * ins.
        prev = np.minimum.accumulate(tmp - ramp) + ramp
    return prev[m], big


# --------------------------------------------------------------------------
# Hungarian algorithm (shortest augmenting path with potentials), O(n^3)
# --------------------------------------------------------------------------


def _hungarian_loop(cost):
    n = cost.shape[0]
    inf = 2**62
    u = np.zeros(n + 1, dtype=np.int64)
    v = np.zeros(n + 1, dtype=np.int64)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    minv = np.empty(n + 1, dtype=np.int64)
    used = np.empty(n + 1, dtype=np.bool_)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv[:] = inf
        used[:] = False
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = inf
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    c = cost[i0 - 1, j - 1] - u[i0] - v[j]
                    if c < minv[j]:
                        minv[j] = c
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    col_of_row = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        col_of_row[p[j] - 1] = j - 1
    return col_of_row


def _hungarian_numpy(cost):
    n = cost.shape[0]
    u = np.zeros(n + 1, dtype=np.int64)
    v = np.zeros(n + 1, dtype=np.int64)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, _INF, dtype=np.int64)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used[1:]
            c = cost[i0 - 1] - u[i0] - v[1:]
            upd = free & (c < minv[1:])
            minv[1:][upd] = c[upd]
            way[1:][upd] = j0
            masked = np.where(free, minv[1:], _INF)
            j1 = int(np.argmin(masked)) + 1
            delta = masked[j1 - 1]
            u[p[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    col_of_row = np.empty(n, dtype=np.int64)
    col_of_row[p[1:] - 1] = np.arange(n)
    return col_of_row


# --------------------------------------------------------------------------
# Framed RMS at arbitrary centres
# --------------------------------------------------------------------------


def _frame_rms_loop(x, centers, half):
    n = x.shape[0]
    cs = np.zeros(n + 1, dtype=np.float64)
    acc = 0.0
    for k in range(n):
        acc += x[k] * x[k]
        cs[k + 1] = acc
    out = np.empty(centers.shape[0], dtype=np.float64)
    for k in range(centers.shape[0]):
        lo = max(0, centers[k] - half)
        hi = min(n, centers[k] + half)
        if hi <= lo:
            out[k] = np.inf
        else:
            e = (cs[hi] - cs[lo]) / (hi - lo)
            out[k] = np.sqrt(e) if e > 0.0 else 0.0
    return out


def _frame_rms_numpy(x, centers, half):
    n = x.shape[0]
    cs = np.zeros(n + 1, dtype=np.float64)
    np.cumsum(x * x, out=cs[1:])
    lo = np.clip(centers - half, 0, n)
    hi = np.clip(centers + half, 0, n)
    width = hi - lo
    with np.errstate(divide="ignore", invalid="ignore"):
        e = (cs[hi] - cs[lo]) / width
    out = np.sqrt(np.maximum(e, 0.0))
    out[width <= 0] = np.inf
    return out


IMPLEMENTATIONS = {
    "numpy": {
        "levenshtein": _levenshtein_numpy,
        "hungarian": _hungarian_numpy,
        "frame_rms": _frame_rms_numpy,
    },
}
if HAVE_NUMBA:
    IMPLEMENTATIONS["numba"] = {
        "levenshtein": numba.njit(cache=True)(_levenshtein_loop),
        "hungarian": numba.njit(cache=True)(_hungarian_loop),
        "frame_rms": numba.njit(cache=True)(_frame_rms_loop),
    }

_active = IMPLEMENTATIONS[BACKEND]


def levenshtein(a: np.ndarray, b: np.ndarray) -> tuple[int, int]:
    """Edit distance and insertion count between two int32 code arrays.

    Returns ``(distance, insertions)``; ``insertions`` is the smallest
    insertion count among all minimum-distance alignments of ``a`` into ``b``.
    """
    a = np.ascontiguousarray(a, dtype=np.int32)
    b = np.ascontiguousarray(b, dtype=np.int32)
    total, big = _active["levenshtein"](a, b)
    total = int(total)
    big = int(big)
    return total // big, total % big


def hungarian(cost: np.ndarray) -> np.ndarray:
    """Column index assigned to each row in a minimum-cost perfect matching."""
    cost = np.ascontiguousarray(cost, dtype=np.int64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError(f"square cost matrix required, got shape {cost.shape}")
    if cost.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    return _active["hungarian"](cost)


def frame_rms(x: np.ndarray, centers: np.ndarray, half: int) -> np.ndarray:
    """RMS of ``x[c - half : c + half]`` for each centre, clipped to bounds.

    Frames with no in-bounds samples get ``inf``.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    centers = np.ascontiguousarray(centers, dtype=np.int64)
    return _active["frame_rms"](x, centers, int(half))
