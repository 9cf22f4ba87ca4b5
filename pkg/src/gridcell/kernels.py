"""Hot inner loops shared by the Monte-Carlo engine and the DP oracle.

Each kernel exists twice.  The ``_loop_*`` variants are explicit loops that
are compiled with ``numba.njit`` when numba is importable; the ``_np_*``
variants are vectorized numpy.  Setting ``GRIDCELL_DISABLE_NUMBA=1`` in the
environment (before import) forces the numpy path.  Both paths return the
same values; only summation order may differ in the last ulp.
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly depending on the environment
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and os.environ.get("GRIDCELL_DISABLE_NUMBA", "").lower() not in (
    "1",
    "true",
    "yes",
)


def _jit(fn):
    if _HAVE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


# ---------------------------------------------------------------- geometry


def _loop_torus_nearest(pts, centers, side):
    n = pts.shape[0]
    m = centers.shape[0]
    idx = np.empty(n, dtype=np.int64)
    d2 = np.empty(n, dtype=np.float64)
    half = 0.5 * side
    for i in range(n):
        best = np.inf
        bj = -1
        px = pts[i, 0]
        py = pts[i, 1]
        for j in range(m):
            dx = abs(px - centers[j, 0])
            dy = abs(py - centers[j, 1])
            if dx > half:
                dx = side - dx
            if dy > half:
                dy = side - dy
            d = dx * dx + dy * dy
            if d < best:
                best = d
                bj = j
        idx[i] = bj
        d2[i] = best
    return idx, d2


def _torus_d2(a, b, side):
    dx = np.abs(a[:, None, 0] - b[None, :, 0])
    dy = np.abs(a[:, None, 1] - b[None, :, 1])
    dx = np.minimum(dx, side - dx)
    dy = np.minimum(dy, side - dy)
    return dx * dx + dy * dy


def _np_torus_nearest(pts, centers, side, chunk=2048):
    n = pts.shape[0]
    idx = np.empty(n, dtype=np.int64)
    d2 = np.empty(n, dtype=np.float64)
    if centers.shape[0] == 0:
        idx[:] = -1
        d2[:] = np.inf
        return idx, d2
    for s in range(0, n, chunk):
        block = _torus_d2(pts[s : s + chunk], centers, side)
        k = np.argmin(block, axis=1)
        idx[s : s + chunk] = k
        d2[s : s + chunk] = block[np.arange(block.shape[0]), k]
    return idx, d2


def _loop_sinr(mts, bs, band, serving, fading, p_tx, alpha, sigma2, side):
    n = mts.shape[0]
    m = bs.shape[0]
    out = np.empty(n, dtype=np.float64)
    half = 0.5 * side
    e = -0.5 * alpha
    for i in range(n):
        s = serving[i]
        b = band[s]
        interf = 0.0
        desired = 0.0
        for j in range(m):
            if band[j] != b:
                continue
            dx = abs(mts[i, 0] - bs[j, 0])
            dy = abs(mts[i, 1] - bs[j, 1])
            if dx > half:
                dx = side - dx
            if dy > half:
                dy = side - dy
            g = p_tx * (dx * dx + dy * dy) ** e * fading[i, j]
            if j == s:
                desired = g
            else:
                interf += g
        out[i] = desired / (interf + sigma2)
    return out


def _np_sinr(mts, bs, band, serving, fading, p_tx, alpha, sigma2, side):
    d2 = _torus_d2(mts, bs, side)
    gain = p_tx * d2 ** (-0.5 * alpha) * fading
    rows = np.arange(mts.shape[0])
    cob = band[None, :] == band[serving][:, None]
    desired = gain[rows, serving]
    interf = np.where(cob, gain, 0.0).sum(axis=1) - desired
    return desired / (np.maximum(interf, 0.0) + sigma2)


def _loop_greedy_pairs(pts, side, radius):
    m = pts.shape[0]
    half = 0.5 * side
    r2 = radius * radius
    cnt = 0
    for i in range(m):
        for j in range(i + 1, m):
            dx = abs(pts[i, 0] - pts[j, 0])
            dy = abs(pts[i, 1] - pts[j, 1])
            if dx > half:
                dx = side - dx
            if dy > half:
                dy = side - dy
            if dx * dx + dy * dy <= r2:
                cnt += 1
    pi = np.empty(cnt, dtype=np.int64)
    pj = np.empty(cnt, dtype=np.int64)
    pd = np.empty(cnt, dtype=np.float64)
    k = 0
    for i in range(m):
        for j in range(i + 1, m):
            dx = abs(pts[i, 0] - pts[j, 0])
            dy = abs(pts[i, 1] - pts[j, 1])
            if dx > half:
                dx = side - dx
            if dy > half:
                dy = side - dy
            d = dx * dx + dy * dy
            if d <= r2:
                pi[k] = i
                pj[k] = j
                pd[k] = d
                k += 1
    order = np.argsort(pd, kind="mergesort")
    partner = np.full(m, -1, dtype=np.int64)
    for q in range(cnt):
        a = pi[order[q]]
        b = pj[order[q]]
        if partner[a] < 0 and partner[b] < 0:
            partner[a] = b
            partner[b] = a
    return partner


def _np_greedy_pairs(pts, side, radius):
    m = pts.shape[0]
    partner = np.full(m, -1, dtype=np.int64)
    if m < 2:
        return partner
    d2 = _torus_d2(pts, pts, side)
    ii, jj = np.triu_indices(m, k=1)
    dd = d2[ii, jj]
    keep = dd <= radius * radius
    ii, jj, dd = ii[keep], jj[keep], dd[keep]
    order = np.argsort(dd, kind="mergesort")
    for a, b in zip(ii[order].tolist(), jj[order].tolist()):
        if partner[a] < 0 and partner[b] < 0:
            partner[a] = b
            partner[b] = a
    return partner


# ---------------------------------------------------------------- DP stage
#
# Value table j_next lives on the uniform grid k*h, k = 0..n-1, with
# (n-1)*h == capacity.  For every pre-decision level raw = B + lambda_e - E
# the stage picks the post-decision storage s in [max(raw, 0), capacity]
# minimising price * (s - raw)^+ + J(s), J linearly interpolated.  The
# piecewise-linear objective attains its minimum at s = max(raw, 0) or at a
# grid point above it, so those candidates are exhaustive.


def _loop_dp_stage(j_next, h, capacity, raws, price):
    n = j_next.shape[0]
    r = raws.shape[0]
    val = np.empty(r, dtype=np.float64)
    post = np.empty(r, dtype=np.float64)
    for i in range(r):
        raw = raws[i]
        if raw >= capacity:
            val[i] = j_next[n - 1]
            post[i] = capacity
            continue
        lo = raw if raw > 0.0 else 0.0
        x = lo / h
        k = int(np.floor(x))
        if k >= n - 1:
            k = n - 2
        frac = x - k
        interp = j_next[k] + (j_next[k + 1] - j_next[k]) * frac
        best = price * (lo - raw) + interp
        best_s = lo
        for q in range(k + 1, n):
            g = q * h if q < n - 1 else capacity
            if g <= lo:
                continue
            c = price * (g - raw) + j_next[q]
            if c < best:
                best = c
                best_s = g
        val[i] = best
        post[i] = best_s
    return val, post


def _np_dp_stage(j_next, h, capacity, raws, price):
    n = j_next.shape[0]
    grid = np.arange(n) * h
    grid[-1] = capacity
    val = np.empty(raws.shape[0], dtype=np.float64)
    post = np.empty(raws.shape[0], dtype=np.float64)
    for i, raw in enumerate(raws.tolist()):
        if raw >= capacity:
            val[i] = j_next[-1]
            post[i] = capacity
            continue
        lo = raw if raw > 0.0 else 0.0
        x = lo / h
        k = min(int(np.floor(x)), n - 2)
        frac = x - k
        best = price * (lo - raw) + (j_next[k] + (j_next[k + 1] - j_next[k]) * frac)
        best_s = lo
        tail_g = grid[k + 1 :]
        tail = price * (tail_g - raw) + j_next[k + 1 :]
        tail = np.where(tail_g > lo, tail, np.inf)
        if tail.size:
            q = int(np.argmin(tail))
            if tail[q] < best:
                best = tail[q]
                best_s = tail_g[q]
        val[i] = best
        post[i] = best_s
    return val, post


if _HAVE_NUMBA:
    nb_torus_nearest = _jit(_loop_torus_nearest)
    nb_sinr = _jit(_loop_sinr)
    nb_greedy_pairs = _jit(_loop_greedy_pairs)
    nb_dp_stage = _jit(_loop_dp_stage)
else:  # pragma: no cover
    nb_torus_nearest = nb_sinr = nb_greedy_pairs = nb_dp_stage = None

np_torus_nearest = _np_torus_nearest
np_sinr = _np_sinr
np_greedy_pairs = _np_greedy_pairs
np_dp_stage = _np_dp_stage

if USE_NUMBA:
    torus_nearest = nb_torus_nearest
    sinr_links = nb_sinr
    greedy_pairs = nb_greedy_pairs
    dp_stage = nb_dp_stage
else:
    torus_nearest = np_torus_nearest
    sinr_links = np_sinr
    greedy_pairs = np_greedy_pairs
    dp_stage = np_dp_stage


def backend() -> str:
    """Name of the kernel implementation in use."""
    return "numba" if USE_NUMBA else "numpy"
