"""Hot loops: uncentered maximal functions and offset-table convolution.

Every kernel has a numba and a numpy implementation that perform the same
floating-point operations in the same order, so the two backends agree
bitwise.  The public wrappers dispatch on :func:`mixedmorrey._backend.get_backend`.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._backend import get_backend, njit

__all__ = [
    "line_maximal",
    "cube_maximal",
    "rectangle_maximal",
    "offset_convolve",
]


# {{{ 1D uncentered maximal function along lines


@njit
def _line_max_nb(a, pruned):
    nl, L = a.shape
    out = np.empty((nl, L))
    means = np.empty(L)
    upper = np.empty(L)
    for q in range(nl):
        row = a[q]
        m = out[q]
        for i in range(L):
            m[i] = row[i]
        run = -np.inf
        for i in range(L - 1, -1, -1):
            if row[i] > run:
                run = row[i]
            upper[i] = run
        for lo in range(L):
            cap = upper[lo]
            if pruned:
                low = np.inf
                for i in range(lo, L):
                    if m[i] < low:
                        low = m[i]
                if cap <= low:
                    continue
            s = 0.0
            for r in range(lo, L):
                s += row[r]
                v = s / (r - lo + 1)
                means[r] = v if v < cap else cap
            best = -np.inf
            for r in range(L - 1, lo - 1, -1):
                if means[r] > best:
                    best = means[r]
                if best > m[r]:
                    m[r] = best
    return out


def _line_max_np(a, pruned):
    nl, L = a.shape
    m = a.copy()
    upper = np.maximum.accumulate(a[:, ::-1], axis=1)[:, ::-1]
    rows_all = np.arange(nl)
    for lo in range(L):
        cap = upper[:, lo : lo + 1]
        rows = rows_all
        if pruned:
            active = upper[:, lo] > m[:, lo:].min(axis=1)
            if not active.any():
                continue
            rows = rows_all[active]
            cap = cap[active]
        s = np.cumsum(a[rows, lo:], axis=1)
        v = np.minimum(s / np.arange(1, L - lo + 1), cap)
        best = np.maximum.accumulate(v[:, ::-1], axis=1)[:, ::-1]
        m[rows, lo:] = np.maximum(m[rows, lo:], best)
    return m


def line_maximal(lines: np.ndarray, pruned: bool = False) -> np.ndarray:
    """Uncentered discrete maximal function of each row of a nonnegative 2D array.

    ``out[q, i] = max_{l <= i <= r} mean(lines[q, l:r+1])``.  The pruned
    variant skips left endpoints that cannot raise any entry; it returns the
    same bits as the exhaustive sweep.
    """
    a = np.ascontiguousarray(lines, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("line_maximal expects a 2D array of lines")
    if a.shape[1] == 0 or a.shape[0] == 0:
        return a.copy()
    if get_backend() == "numba":
        return _line_max_nb(a, bool(pruned))
    return _line_max_np(a, bool(pruned))


# }}}


# {{{ maximal function over grid-aligned cubes


@njit
def _cube_max2_nb(a):
    N1, N2 = a.shape
    K = max(N1, N2)
    out = a.copy()
    amax = a.max()
    c0 = np.zeros((N1 + 1, N2))
    for i in range(N1):
        for j in range(N2):
            c0[i + 1, j] = c0[i, j] + a[i, j]
    for k in range(2, K + 1):
        k1 = min(k, N1)
        k2 = min(k, N2)
        P1 = N1 - k1 + 1
        P2 = N2 - k2 + 1
        vol = k * k
        w = np.empty((P1, P2))
        c1 = np.zeros(N2 + 1)
        for i0 in range(P1):
            for j in range(N2):
                c1[j + 1] = c1[j] + (c0[i0 + k1, j] - c0[i0, j])
            for j0 in range(P2):
                w[i0, j0] = (c1[j0 + k2] - c1[j0]) / vol
        s1 = np.empty((N1, P2))
        for i in range(N1):
            lo = max(0, i - k1 + 1)
            hi = min(i, P1 - 1)
            for j0 in range(P2):
                best = -np.inf
                for i0 in range(lo, hi + 1):
                    if w[i0, j0] > best:
                        best = w[i0, j0]
                s1[i, j0] = best
        for i in range(N1):
            for j in range(N2):
                lo = max(0, j - k2 + 1)
                hi = min(j, P2 - 1)
                best = -np.inf
                for j0 in range(lo, hi + 1):
                    if s1[i, j0] > best:
                        best = s1[i, j0]
                if best > out[i, j]:
                    out[i, j] = best
    for i in range(N1):
        for j in range(N2):
            if out[i, j] > amax:
                out[i, j] = amax
    return out


def _window_sums(w: np.ndarray, axis: int, k: int) -> np.ndarray:
    c = np.cumsum(w, axis=axis)
    pad = [(0, 0)] * w.ndim
    pad[axis] = (1, 0)
    c = np.pad(c, pad)
    n = w.shape[axis]
    hi = np.take(c, np.arange(k, n + 1), axis=axis)
    lo = np.take(c, np.arange(0, n - k + 1), axis=axis)
    return hi - lo


def _spread_max(w: np.ndarray, axis: int, k: int) -> np.ndarray:
    pad = [(0, 0)] * w.ndim
    pad[axis] = (k - 1, k - 1)
    padded = np.pad(w, pad, constant_values=-np.inf)
    return sliding_window_view(padded, k, axis=axis).max(axis=-1)


def _cube_max_np(a):
    shape = a.shape
    n = a.ndim
    K = max(shape)
    out = a.copy()
    for k in range(2, K + 1):
        keff = [min(k, N) for N in shape]
        w = a
        for ax in range(n):
            w = _window_sums(w, ax, keff[ax])
        w = w / k**n
        for ax in range(n):
            w = _spread_max(w, ax, keff[ax])
        out = np.maximum(out, w)
    return np.minimum(out, a.max())


def cube_maximal(a: np.ndarray) -> np.ndarray:
    """Uncentered maximal function over grid-aligned cubes (equal cell counts per side).

    Cubes longer than an axis are clipped to the grid box on that axis but
    keep their full volume, which is the zero extension outside the box.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.size == 0:
        return a.copy()
    if a.ndim == 1:
        return line_maximal(a[None, :])[0]
    if a.ndim == 2 and get_backend() == "numba":
        return _cube_max2_nb(a)
    return _cube_max_np(a)


# }}}


# {{{ maximal function over grid-aligned rectangles


@njit
def _rect_max2_nb(a):
    N1, N2 = a.shape
    out = a.copy()
    amax = a.max()
    g = np.empty(N2)
    tmp = np.empty((1, N2))
    lm_all = np.empty((N1, N2))
    best = np.empty(N2)
    for l1 in range(N1):
        for j in range(N2):
            g[j] = 0.0
        for r1 in range(l1, N1):
            cnt = r1 - l1 + 1
            for j in range(N2):
                g[j] += a[r1, j]
                tmp[0, j] = g[j] / cnt
            lm = _line_max_nb(tmp, False)
            for j in range(N2):
                lm_all[r1, j] = lm[0, j]
        for j in range(N2):
            best[j] = -np.inf
        for r1 in range(N1 - 1, l1 - 1, -1):
            for j in range(N2):
                if lm_all[r1, j] > best[j]:
                    best[j] = lm_all[r1, j]
                if best[j] > out[r1, j]:
                    out[r1, j] = best[j]
    for i in range(N1):
        for j in range(N2):
            if out[i, j] > amax:
                out[i, j] = amax
    return out


def _rect_max2_np(a):
    N1, N2 = a.shape
    out = a.copy()
    for l1 in range(N1):
        g = np.cumsum(a[l1:], axis=0) / np.arange(1, N1 - l1 + 1)[:, None]
        lm = _line_max_np(g, False)
        best = np.maximum.accumulate(lm[::-1], axis=0)[::-1]
        out[l1:] = np.maximum(out[l1:], best)
    return np.minimum(out, a.max())


def _rect_max_np_nd(a):
    # averages over axis-0 intervals, then recurse on the remaining axes
    if a.ndim == 1:
        return line_maximal(a[None, :])[0]
    if a.ndim == 2:
        return _rect_max2_np(a)
    N1 = a.shape[0]
    out = a.copy()
    for l1 in range(N1):
        g = np.cumsum(a[l1:], axis=0)
        g = g / np.arange(1, N1 - l1 + 1).reshape((-1,) + (1,) * (a.ndim - 1))
        lm = np.stack([_rect_max_np_nd(slab) for slab in g])
        best = np.maximum.accumulate(lm[::-1], axis=0)[::-1]
        out[l1:] = np.maximum(out[l1:], best)
    return np.minimum(out, a.max())


def rectangle_maximal(a: np.ndarray) -> np.ndarray:
    """Exact maximal function over all grid-aligned rectangles, O(prod N_j^2)."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.size == 0:
        return a.copy()
    if a.ndim == 2 and get_backend() == "numba":
        return _rect_max2_nb(a)
    return _rect_max_np_nd(a)


# }}}


# {{{ convolution with a table indexed by cell offset


@njit
def _offset_conv2_nb(f, w):
    N1, N2 = f.shape
    out = np.zeros((N1, N2))
    for d1 in range(-(N1 - 1), N1):
        x1lo = max(0, d1)
        x1hi = min(N1, N1 + d1)
        for d2 in range(-(N2 - 1), N2):
            wt = w[d1 + N1 - 1, d2 + N2 - 1]
            if wt == 0.0:
                continue
            x2lo = max(0, d2)
            x2hi = min(N2, N2 + d2)
            for x1 in range(x1lo, x1hi):
                y1 = x1 - d1
                for x2 in range(x2lo, x2hi):
                    out[x1, x2] += wt * f[y1, x2 - d2]
    return out


def _offset_conv2_np(f, w):
    N1, N2 = f.shape
    out = np.zeros((N1, N2))
    for d1 in range(-(N1 - 1), N1):
        x1lo, x1hi = max(0, d1), min(N1, N1 + d1)
        for d2 in range(-(N2 - 1), N2):
            wt = w[d1 + N1 - 1, d2 + N2 - 1]
            if wt == 0.0:
                continue
            x2lo, x2hi = max(0, d2), min(N2, N2 + d2)
            out[x1lo:x1hi, x2lo:x2hi] += wt * f[x1lo - d1 : x1hi - d1, x2lo - d2 : x2hi - d2]
    return out


def _offset_conv_np_nd(f, w):
    shape = f.shape
    out = np.zeros(shape)
    for d in np.ndindex(*w.shape):
        wt = w[d]
        if wt == 0.0:
            continue
        off = [di - (N - 1) for di, N in zip(d, shape)]
        xs = tuple(slice(max(0, o), min(N, N + o)) for o, N in zip(off, shape))
        ys = tuple(slice(s.start - o, s.stop - o) for s, o in zip(xs, off))
        out[xs] += wt * f[ys]
    return out


def offset_convolve(f: np.ndarray, table: np.ndarray) -> np.ndarray:
    """``out[x] = sum_y table[x - y + N - 1] * f[y]`` summed in fixed offset order.

    ``table`` has shape ``2N_j - 1`` per axis; zero entries are skipped.
    """
    f = np.ascontiguousarray(f, dtype=np.float64)
    table = np.ascontiguousarray(table, dtype=np.float64)
    if table.shape != tuple(2 * N - 1 for N in f.shape):
        raise ValueError(f"offset table shape {table.shape} does not match grid {f.shape}")
    if f.ndim == 1:
        return offset_convolve(f[:, None], table[:, None])[:, 0]
    if f.ndim == 2:
        if get_backend() == "numba":
            return _offset_conv2_nb(f, table)
        return _offset_conv2_np(f, table)
    return _offset_conv_np_nd(f, table)


# }}}
