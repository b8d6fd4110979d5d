"""Hot numeric kernels, each in a numba and a pure-numpy flavour.

The public names at the bottom of the module point at whichever backend
:mod:`gridlock._accel` selected. Both flavours are importable directly so
tests and ``benchmarks/bench_kernels.py`` can compare them.

All kernels operate on plain ndarrays; image arrays are 2-D, row-major.
"""

import numpy as np

from ._accel import HAS_NUMBA, njit

# ---------------------------------------------------------------------------
# adaptive mean threshold
# ---------------------------------------------------------------------------


def mean_threshold_np(gray, window, offset):
    """Ink mask: ``gray < mean(window x window, edge-replicated) - offset``."""
    r = window // 2
    padded = np.pad(gray.astype(np.int64), r, mode="edge")
    ii = np.zeros((padded.shape[0] + 1, padded.shape[1] + 1), dtype=np.int64)
    np.cumsum(np.cumsum(padded, axis=0), axis=1, out=ii[1:, 1:])
    h, w = gray.shape
    s = (ii[window:window + h, window:window + w] - ii[:h, window:window + w]
         - ii[window:window + h, :w] + ii[:h, :w])
    area = window * window
    # integer form of value < s/area - offset
    return (gray.astype(np.int64) * area < s - offset * area).astype(np.uint8)


@njit
def mean_threshold_nb(gray, window, offset):
    h, w = gray.shape
    r = window // 2
    ph, pw = h + 2 * r, w + 2 * r
    ii = np.zeros((ph + 1, pw + 1), dtype=np.int64)
    for y in range(ph):
        sy = min(max(y - r, 0), h - 1)
        acc = 0
        for x in range(pw):
            sx = min(max(x - r, 0), w - 1)
            acc += gray[sy, sx]
            ii[y + 1, x + 1] = ii[y, x + 1] + acc
    area = window * window
    out = np.zeros((h, w), dtype=np.uint8)
    for y in range(h):
        for x in range(w):
            s = (ii[y + window, x + window] - ii[y, x + window]
                 - ii[y + window, x] + ii[y, x])
            if np.int64(gray[y, x]) * area < s - offset * area:
                out[y, x] = 1
    return out


# ---------------------------------------------------------------------------
# rectangular binary morphology (outside the image counts as 0)
# ---------------------------------------------------------------------------


def _window_sum_np(a, radius, axis):
    pad = [(0, 0), (0, 0)]
    pad[axis] = (radius + 1, radius)
    c = np.cumsum(np.pad(a.astype(np.int32), pad), axis=axis)
    n = a.shape[axis]
    hi = np.take(c, np.arange(2 * radius + 1, 2 * radius + 1 + n), axis=axis)
    lo = np.take(c, np.arange(0, n), axis=axis)
    return hi - lo


def erode_np(bits, se_h, se_w):
    out = bits.astype(np.uint8)
    if se_w > 1:
        out = (_window_sum_np(out, se_w // 2, 1) == se_w).astype(np.uint8)
    if se_h > 1:
        out = (_window_sum_np(out, se_h // 2, 0) == se_h).astype(np.uint8)
    return out


def dilate_np(bits, se_h, se_w):
    out = bits.astype(np.uint8)
    if se_w > 1:
        out = (_window_sum_np(out, se_w // 2, 1) > 0).astype(np.uint8)
    if se_h > 1:
        out = (_window_sum_np(out, se_h // 2, 0) > 0).astype(np.uint8)
    return out


@njit
def _morph_rows_nb(a, radius, erode):
    h, w = a.shape
    out = np.zeros((h, w), dtype=np.uint8)
    full = 2 * radius + 1
    for y in range(h):
        acc = 0
        for x in range(min(radius, w)):
            acc += a[y, x]
        for x in range(w):
            xin = x + radius
            if xin < w:
                acc += a[y, xin]
            xout = x - radius - 1
            if xout >= 0:
                acc -= a[y, xout]
            if erode:
                if acc == full:
                    out[y, x] = 1
            elif acc > 0:
                out[y, x] = 1
    return out


@njit
def _morph_cols_nb(a, radius, erode):
    h, w = a.shape
    out = np.zeros((h, w), dtype=np.uint8)
    full = 2 * radius + 1
    acc = np.zeros(w, dtype=np.int32)
    for y in range(min(radius, h)):
        for x in range(w):
            acc[x] += a[y, x]
    for y in range(h):
        yin = y + radius
        yout = y - radius - 1
        for x in range(w):
            if yin < h:
                acc[x] += a[yin, x]
            if yout >= 0:
                acc[x] -= a[yout, x]
            if erode:
                if acc[x] == full:
                    out[y, x] = 1
            elif acc[x] > 0:
                out[y, x] = 1
    return out


@njit
def erode_nb(bits, se_h, se_w):
    out = bits.astype(np.uint8)
    if se_w > 1:
        out = _morph_rows_nb(out, se_w // 2, True)
    if se_h > 1:
        out = _morph_cols_nb(out, se_h // 2, True)
    return out


@njit
def dilate_nb(bits, se_h, se_w):
    out = bits.astype(np.uint8)
    if se_w > 1:
        out = _morph_rows_nb(out, se_w // 2, False)
    if se_h > 1:
        out = _morph_cols_nb(out, se_h // 2, False)
    return out


# ---------------------------------------------------------------------------
# 8-connected component statistics via horizontal runs
#
# Returns an (n, 7) int64 array with columns
#   min_x, max_x, min_y, max_y, sum_x, sum_y, count
# sorted by (min_y, min_x, max_y, max_x).
# ---------------------------------------------------------------------------

_STAT_COLS = 7


def _runs_np(mask):
    h, w = mask.shape
    padded = np.zeros((h, w + 2), dtype=np.int8)
    padded[:, 1:-1] = mask != 0
    d = np.diff(padded, axis=1)
    sy, sx = np.nonzero(d == 1)
    ey, ex = np.nonzero(d == -1)
    # nonzero walks row-major, so starts and ends pair up in order
    return sy.astype(np.int64), sx.astype(np.int64), (ex - 1).astype(np.int64)


def _sort_stats(stats):
    if len(stats) == 0:
        return stats
    order = np.lexsort((stats[:, 1], stats[:, 3], stats[:, 0], stats[:, 2]))
    return stats[order]


def component_stats_np(mask):
    ry, rs, re_ = _runs_np(mask)
    n = len(ry)
    if n == 0:
        return np.zeros((0, _STAT_COLS), dtype=np.int64)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    row_start = np.searchsorted(ry, np.arange(ry[-1] + 2))
    ry_l, rs_l, re_l = ry.tolist(), rs.tolist(), re_.tolist()
    for y in range(ry_l[0] + 1, ry_l[-1] + 1):
        a, a_end = int(row_start[y - 1]), int(row_start[y])
        b, b_end = a_end, int(row_start[y + 1])
        while a < a_end and b < b_end:
            if rs_l[a] <= re_l[b] + 1 and rs_l[b] <= re_l[a] + 1:
                pa, pb = find(a), find(b)
                if pa != pb:
                    parent[max(pa, pb)] = min(pa, pb)
            if re_l[a] < re_l[b]:
                a += 1
            else:
                b += 1
    roots = np.array([find(i) for i in range(n)], dtype=np.int64)
    uniq, comp = np.unique(roots, return_inverse=True)
    k = len(uniq)
    lengths = re_ - rs + 1
    stats = np.empty((k, _STAT_COLS), dtype=np.int64)
    stats[:, 0] = np.iinfo(np.int64).max
    stats[:, 2] = np.iinfo(np.int64).max
    stats[:, 1] = -1
    stats[:, 3] = -1
    np.minimum.at(stats[:, 0], comp, rs)
    np.maximum.at(stats[:, 1], comp, re_)
    np.minimum.at(stats[:, 2], comp, ry)
    np.maximum.at(stats[:, 3], comp, ry)
    # sum of x over a run [s, e] is (s + e) * len / 2
    sx = np.zeros(k, dtype=np.int64)
    np.add.at(sx, comp, (rs + re_) * lengths // 2)
    sy = np.zeros(k, dtype=np.int64)
    np.add.at(sy, comp, ry * lengths)
    cnt = np.zeros(k, dtype=np.int64)
    np.add.at(cnt, comp, lengths)
    stats[:, 4] = sx
    stats[:, 5] = sy
    stats[:, 6] = cnt
    return _sort_stats(stats)


@njit
def _find_nb(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@njit
def _count_runs_nb(mask):
    h, w = mask.shape
    n = 0
    for y in range(h):
        prev = 0
        for x in range(w):
            cur = mask[y, x] != 0
            if cur and not prev:
                n += 1
            prev = cur
    return n


@njit
def _component_stats_core_nb(mask):
    h, w = mask.shape
    total = _count_runs_nb(mask)
    ry = np.empty(total, dtype=np.int64)
    rs = np.empty(total, dtype=np.int64)
    re_ = np.empty(total, dtype=np.int64)
    row_start = np.zeros(h + 1, dtype=np.int64)
    n = 0
    for y in range(h):
        row_start[y] = n
        inside = False
        for x in range(w):
            cur = mask[y, x] != 0
            if cur and not inside:
                ry[n] = y
                rs[n] = x
                inside = True
            elif inside and not cur:
                re_[n] = x - 1
                n += 1
                inside = False
        if inside:
            re_[n] = w - 1
            n += 1
    row_start[h] = n
    parent = np.arange(n)
    for y in range(1, h):
        a, a_end = row_start[y - 1], row_start[y]
        b, b_end = row_start[y], row_start[y + 1]
        while a < a_end and b < b_end:
            if rs[a] <= re_[b] + 1 and rs[b] <= re_[a] + 1:
                pa = _find_nb(parent, a)
                pb = _find_nb(parent, b)
                if pa != pb:
                    if pa < pb:
                        parent[pb] = pa
                    else:
                        parent[pa] = pb
            if re_[a] < re_[b]:
                a += 1
            else:
                b += 1
    label = np.full(n, -1, dtype=np.int64)
    k = 0
    for i in range(n):
        r = _find_nb(parent, i)
        if label[r] < 0:
            label[r] = k
            k += 1
        label[i] = label[r]
    stats = np.empty((k, 7), dtype=np.int64)
    for j in range(k):
        stats[j, 0] = 1 << 62
        stats[j, 1] = -1
        stats[j, 2] = 1 << 62
        stats[j, 3] = -1
        stats[j, 4] = 0
        stats[j, 5] = 0
        stats[j, 6] = 0
    for i in range(n):
        j = label[i]
        ln = re_[i] - rs[i] + 1
        stats[j, 0] = min(stats[j, 0], rs[i])
        stats[j, 1] = max(stats[j, 1], re_[i])
        stats[j, 2] = min(stats[j, 2], ry[i])
        stats[j, 3] = max(stats[j, 3], ry[i])
        stats[j, 4] += (rs[i] + re_[i]) * ln // 2
        stats[j, 5] += ry[i] * ln
        stats[j, 6] += ln
    return stats


def component_stats_nb(mask):
    return _sort_stats(_component_stats_core_nb(np.ascontiguousarray(mask, dtype=np.uint8)))


# ---------------------------------------------------------------------------
# sheared projection profiles
# ---------------------------------------------------------------------------


def shear_variances_np(ys, xs, tans, n_bins, base):
    """Variance of row histograms of ink points sheared by each slope.

    A point (x, y) lands in bin ``floor(y + x * t + base + 0.5)``; points
    falling outside ``[0, n_bins)`` are dropped.
    """
    ys = ys.astype(np.float64)
    xs = xs.astype(np.float64)
    out = np.empty(len(tans), dtype=np.float64)
    for i, t in enumerate(tans):
        b = np.floor(ys + xs * t + base + 0.5).astype(np.int64)
        b = b[(b >= 0) & (b < n_bins)]
        hist = np.bincount(b, minlength=n_bins).astype(np.float64)
        m = hist.sum() / n_bins
        out[i] = ((hist - m) ** 2).sum() / n_bins
    return out


@njit
def shear_variances_nb(ys, xs, tans, n_bins, base):
    out = np.empty(len(tans), dtype=np.float64)
    hist = np.zeros(n_bins, dtype=np.float64)
    for i in range(len(tans)):
        t = tans[i]
        hist[:] = 0.0
        total = 0.0
        for p in range(len(ys)):
            b = np.int64(np.floor(np.float64(ys[p]) + np.float64(xs[p]) * t + base + 0.5))
            if b >= 0 and b < n_bins:
                hist[b] += 1.0
                total += 1.0
        m = total / n_bins
        acc = 0.0
        for b in range(n_bins):
            d = hist[b] - m
            acc += d * d
        out[i] = acc / n_bins
    return out


# ---------------------------------------------------------------------------
# tree edit distance pieces
# ---------------------------------------------------------------------------


def relabel_costs_np(lab_a, rs_a, cs_a, codes_a, off_a, lab_b, rs_b, cs_b, codes_b, off_b, td_label):
    """Relabel cost matrix between two postorder node lists.

    Different labels cost 1. Equal non-td labels cost 0. Two td nodes cost 1
    when their spans differ, else the normalized Levenshtein distance of
    their contents (codepoint arrays sliced by ``off``).
    """
    na, nb = len(lab_a), len(lab_b)
    out = np.zeros((na, nb), dtype=np.float64)
    for i in range(na):
        for j in range(nb):
            if lab_a[i] != lab_b[j]:
                out[i, j] = 1.0
            elif lab_a[i] == td_label:
                if rs_a[i] != rs_b[j] or cs_a[i] != cs_b[j]:
                    out[i, j] = 1.0
                else:
                    out[i, j] = _norm_lev_py(codes_a[off_a[i]:off_a[i + 1]],
                                             codes_b[off_b[j]:off_b[j + 1]])
    return out


def _norm_lev_py(a, b):
    la, lb = len(a), len(b)
    if la == 0 and lb == 0:
        return 0.0
    if la == lb and np.array_equal(a, b):
        return 0.0
    a = a.tolist()
    b = b.tolist()
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        ai = a[i - 1]
        for j in range(1, lb + 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ai != b[j - 1]))
        prev = cur
    return prev[lb] / max(la, lb)


@njit
def _norm_lev_nb(a, b):
    la, lb = len(a), len(b)
    if la == 0 and lb == 0:
        return 0.0
    prev = np.arange(lb + 1)
    cur = np.empty(lb + 1, dtype=prev.dtype)
    for i in range(1, la + 1):
        cur[0] = i
        for j in range(1, lb + 1):
            sub = prev[j - 1] + (1 if a[i - 1] != b[j - 1] else 0)
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, sub)
        prev, cur = cur, prev
    return prev[lb] / max(la, lb)


@njit
def relabel_costs_nb(lab_a, rs_a, cs_a, codes_a, off_a, lab_b, rs_b, cs_b, codes_b, off_b, td_label):
    na, nb = len(lab_a), len(lab_b)
    out = np.zeros((na, nb), dtype=np.float64)
    for i in range(na):
        for j in range(nb):
            if lab_a[i] != lab_b[j]:
                out[i, j] = 1.0
            elif lab_a[i] == td_label:
                if rs_a[i] != rs_b[j] or cs_a[i] != cs_b[j]:
                    out[i, j] = 1.0
                else:
                    out[i, j] = _norm_lev_nb(codes_a[off_a[i]:off_a[i + 1]],
                                             codes_b[off_b[j]:off_b[j + 1]])
    return out


def zhang_shasha_np(lml_a, kr_a, lml_b, kr_b, relabel):
    """Zhang-Shasha ordered tree edit distance with unit insert/delete.

    ``lml_*`` hold the postorder index of each node's leftmost leaf and
    ``kr_*`` the keyroots in increasing order.
    """
    na, nb = len(lml_a), len(lml_b)
    lml_a = [int(v) for v in lml_a]
    lml_b = [int(v) for v in lml_b]
    rel = relabel.tolist()
    td = [[0.0] * nb for _ in range(na)]
    for i in kr_a:
        i = int(i)
        li = lml_a[i]
        for j in kr_b:
            j = int(j)
            lj = lml_b[j]
            m, n = i - li + 2, j - lj + 2
            fd = [[0.0] * n for _ in range(m)]
            for x in range(1, m):
                fd[x][0] = fd[x - 1][0] + 1.0
            for y in range(1, n):
                fd[0][y] = fd[0][y - 1] + 1.0
            for x in range(1, m):
                xi = li + x - 1
                for y in range(1, n):
                    yj = lj + y - 1
                    if lml_a[xi] == li and lml_b[yj] == lj:
                        v = min(fd[x - 1][y] + 1.0, fd[x][y - 1] + 1.0,
                                fd[x - 1][y - 1] + rel[xi][yj])
                        fd[x][y] = v
                        td[xi][yj] = v
                    else:
                        p = lml_a[xi] - li
                        q = lml_b[yj] - lj
                        fd[x][y] = min(fd[x - 1][y] + 1.0, fd[x][y - 1] + 1.0,
                                       fd[p][q] + td[xi][yj])
    return td[na - 1][nb - 1]


@njit
def zhang_shasha_nb(lml_a, kr_a, lml_b, kr_b, relabel):
    na, nb = len(lml_a), len(lml_b)
    td = np.zeros((na, nb), dtype=np.float64)
    fd = np.zeros((na + 2, nb + 2), dtype=np.float64)
    for ii in range(len(kr_a)):
        i = kr_a[ii]
        li = lml_a[i]
        for jj in range(len(kr_b)):
            j = kr_b[jj]
            lj = lml_b[j]
            m, n = i - li + 2, j - lj + 2
            fd[0, 0] = 0.0
            for x in range(1, m):
                fd[x, 0] = fd[x - 1, 0] + 1.0
            for y in range(1, n):
                fd[0, y] = fd[0, y - 1] + 1.0
            for x in range(1, m):
                xi = li + x - 1
                for y in range(1, n):
                    yj = lj + y - 1
                    if lml_a[xi] == li and lml_b[yj] == lj:
                        v = min(fd[x - 1, y] + 1.0, fd[x, y - 1] + 1.0,
                                fd[x - 1, y - 1] + relabel[xi, yj])
                        fd[x, y] = v
                        td[xi, yj] = v
                    else:
                        p = lml_a[xi] - li
                        q = lml_b[yj] - lj
                        fd[x, y] = min(fd[x - 1, y] + 1.0, fd[x, y - 1] + 1.0,
                                       fd[p, q] + td[xi, yj])
    return td[na - 1, nb - 1]


# ---------------------------------------------------------------------------
# bilinear rotation onto a white canvas
#
# Output pixel (xo, yo) samples the source at
#   sx = u c - v s + cx_src,  sy = u s + v c + cy_src,  (u, v) = (xo, yo) - out centre
# with a one-pixel white border around the source.
# ---------------------------------------------------------------------------


def rotate_bilinear_np(src, nh, nw, c, s):
    h, w = src.shape
    cxs, cys = (w - 1) / 2.0, (h - 1) / 2.0
    cxo, cyo = (nw - 1) / 2.0, (nh - 1) / 2.0
    yo, xo = np.mgrid[0:nh, 0:nw].astype(np.float64)
    u, v = xo - cxo, yo - cyo
    sx = u * c - v * s + cxs
    sy = u * s + v * c + cys
    padded = np.full((h + 2, w + 2), 255.0)
    padded[1:-1, 1:-1] = src
    sx = np.clip(sx + 1.0, 0.0, w + 1.0)
    sy = np.clip(sy + 1.0, 0.0, h + 1.0)
    x0 = np.minimum(np.floor(sx).astype(np.int64), w)
    y0 = np.minimum(np.floor(sy).astype(np.int64), h)
    fx, fy = sx - x0, sy - y0
    top = padded[y0, x0] * (1 - fx) + padded[y0, x0 + 1] * fx
    bot = padded[y0 + 1, x0] * (1 - fx) + padded[y0 + 1, x0 + 1] * fx
    out = top * (1 - fy) + bot * fy
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


@njit
def rotate_bilinear_nb(src, nh, nw, c, s):
    h, w = src.shape
    cxs, cys = (w - 1) / 2.0, (h - 1) / 2.0
    cxo, cyo = (nw - 1) / 2.0, (nh - 1) / 2.0
    padded = np.full((h + 2, w + 2), 255.0)
    for y in range(h):
        for x in range(w):
            padded[y + 1, x + 1] = src[y, x]
    out = np.empty((nh, nw), dtype=np.uint8)
    for yo in range(nh):
        v = float(yo) - cyo
        for xo in range(nw):
            u = float(xo) - cxo
            sx = min(max(u * c - v * s + cxs + 1.0, 0.0), w + 1.0)
            sy = min(max(u * s + v * c + cys + 1.0, 0.0), h + 1.0)
            x0 = min(int(np.floor(sx)), w)
            y0 = min(int(np.floor(sy)), h)
            fx = sx - x0
            fy = sy - y0
            top = padded[y0, x0] * (1 - fx) + padded[y0, x0 + 1] * fx
            bot = padded[y0 + 1, x0] * (1 - fx) + padded[y0 + 1, x0 + 1] * fx
            val = np.rint(top * (1 - fy) + bot * fy)
            out[yo, xo] = min(max(val, 0.0), 255.0)
    return out


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

if HAS_NUMBA:
    mean_threshold = mean_threshold_nb
    erode = erode_nb
    dilate = dilate_nb
    component_stats = component_stats_nb
    shear_variances = shear_variances_nb
    relabel_costs = relabel_costs_nb
    zhang_shasha = zhang_shasha_nb
    rotate_bilinear = rotate_bilinear_nb
else:
    mean_threshold = mean_threshold_np
    erode = erode_np
    dilate = dilate_np
    component_stats = component_stats_np
    shear_variances = shear_variances_np
    relabel_costs = relabel_costs_np
    zhang_shasha = zhang_shasha_np
    rotate_bilinear = rotate_bilinear_np
