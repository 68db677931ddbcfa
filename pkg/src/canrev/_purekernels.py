"""Numpy implementations of the hot kernels.

Used when the compiled ``_ckernels`` extension is unavailable, or when
``CANREV_PURE_PYTHON`` is set. Both backends expose the same functions with
the same tie-breaking and degenerate-input behaviour.
"""

import numpy as np


def decode_channels(payload, anchors, lengths, msb):
    """Decode every channel spec from an ``(n, 8)`` uint8 payload matrix.

    Returns an ``(m, n)`` int64 matrix, one row per spec.
    """
    payload = np.asarray(payload, dtype=np.uint8)
    n = payload.shape[0]
    m = len(anchors)
    out = np.empty((m, n), dtype=np.int64)
    wide = payload.astype(np.int64)
    for row, (anchor, length, is_msb) in enumerate(zip(anchors, lengths, msb)):
        head = wide[:, anchor]
        if length == 8:
            out[row] = head
            continue
        ext = length - 8
        nxt = wide[:, anchor + 1]
        if is_msb:
            out[row] = (head << ext) | (nxt >> (8 - ext))
        else:
            out[row] = head | ((nxt & ((1 << ext) - 1)) << 8)
    return out


def nearest_indices(t_dom, t_other):
    """Index into ``t_other`` of the nearest timestamp for each ``t_dom`` entry.

    Ties resolve to the earliest index among equally distant samples.
    Both inputs must be sorted ascending and ``t_other`` non-empty.
    """
    t_dom = np.asarray(t_dom, dtype=np.float64)
    t_other = np.asarray(t_other, dtype=np.float64)
    n_other = t_other.shape[0]
    hi = np.searchsorted(t_other, t_dom, side="left")
    lo = hi - 1
    has_lo = lo >= 0
    has_hi = hi < n_other
    d_lo = np.where(has_lo, t_dom - t_other[np.clip(lo, 0, n_other - 1)], np.inf)
    d_hi = np.where(has_hi, t_other[np.clip(hi, 0, n_other - 1)] - t_dom, np.inf)
    take_lo = d_lo <= d_hi
    idx = np.where(take_lo, lo, hi)
    best = np.where(take_lo, d_lo, d_hi)
    # walk back over earlier samples at the same rounded distance
    while True:
        prev = idx - 1
        can = prev >= 0
        safe_prev = np.where(can, prev, 0)
        same = can & (np.abs(t_dom - t_other[safe_prev]) == best)
        if not same.any():
            break
        idx = np.where(same, prev, idx)
    return idx.astype(np.int64)


def pearson(x, y):
    """Two-pass Pearson r; NaN when either input has zero spread."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape[0] < 2 or x.min() == x.max() or y.min() == y.max():
        return float("nan")
    dx = x - x.mean()
    dy = y - y.mean()
    r = float(np.dot(dx, dy) / (np.sqrt(np.dot(dx, dx)) * np.sqrt(np.dot(dy, dy))))
    return min(1.0, max(-1.0, r))


def pearson_rows(matrix, y):
    """Pearson r of every row of ``matrix`` against ``y``; NaN rows are degenerate."""
    matrix = np.asarray(matrix, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    m, n = matrix.shape
    out = np.full(m, np.nan)
    if n < 2 or y.min() == y.max():
        return out
    dy = y - y.mean()
    syy = np.sqrt(np.dot(dy, dy))
    live = matrix.min(axis=1) != matrix.max(axis=1)
    if not live.any():
        return out
    sub = matrix[live]
    dx = sub - sub.mean(axis=1, keepdims=True)
    num = dx @ dy
    sxx = np.sqrt(np.einsum("ij,ij->i", dx, dx))
    out[live] = np.clip(num / (sxx * syy), -1.0, 1.0)
    return out


def moving_average(t, y, half_width):
    """Centered mean over samples with ``|t_j - t_i| <= half_width``."""
    t = np.asarray(t, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = t.shape[0]
    if half_width == 0 or n == 0:
        return y.copy()
    lo = np.searchsorted(t, t - half_width, side="left")
    hi = np.searchsorted(t, t + half_width, side="right")
    # searchsorted compares against t +/- w; the window predicate is on
    # the rounded difference, so nudge the bounds until they agree
    while True:
        grow = (lo > 0) & (t - t[np.maximum(lo - 1, 0)] <= half_width)
        shrink = (lo < n) & (t - t[np.minimum(lo, n - 1)] > half_width)
        if not (grow.any() or shrink.any()):
            break
        lo = lo - grow + shrink
    while True:
        grow = (hi < n) & (t[np.minimum(hi, n - 1)] - t <= half_width)
        shrink = (hi > 0) & (t[np.maximum(hi - 1, 0)] - t > half_width)
        if not (grow.any() or shrink.any()):
            break
        hi = hi + grow - shrink
    csum = np.concatenate(([0.0], np.cumsum(y)))
    return (csum[hi] - csum[lo]) / (hi - lo)


def diff_stdev(values, ddof=0):
    """Standard deviation of successive differences of ``values``."""
    d = np.diff(np.asarray(values, dtype=np.float64))
    if d.shape[0] <= ddof:
        return 0.0
    return float(np.std(d, ddof=ddof))
