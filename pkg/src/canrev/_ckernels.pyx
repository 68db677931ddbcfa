# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Mirrors ``_purekernels`` function for function."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, NAN

cnp.import_array()


def decode_channels(payload, anchors, lengths, msb):
    cdef const unsigned char[:, ::1] p = np.ascontiguousarray(payload, dtype=np.uint8)
    cdef const long long[::1] a = np.ascontiguousarray(anchors, dtype=np.int64)
    cdef const long long[::1] ln = np.ascontiguousarray(lengths, dtype=np.int64)
    cdef const unsigned char[::1] mb = np.ascontiguousarray(msb, dtype=np.uint8)
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t m = a.shape[0]
    out_arr = np.empty((m, n), dtype=np.int64)
    cdef long long[:, ::1] out = out_arr
    cdef Py_ssize_t row, i
    cdef long long anchor, ext, mask
    for row in range(m):
        anchor = a[row]
        ext = ln[row] - 8
        if ext == 0:
            for i in range(n):
                out[row, i] = p[i, anchor]
        elif mb[row]:
            for i in range(n):
                out[row, i] = (<long long>p[i, anchor] << ext) | (p[i, anchor + 1] >> (8 - ext))
        else:
            mask = (1 << ext) - 1
            for i in range(n):
                out[row, i] = p[i, anchor] | ((p[i, anchor + 1] & mask) << 8)
    return out_arr


def nearest_indices(t_dom, t_other):
    cdef const double[::1] td = np.ascontiguousarray(t_dom, dtype=np.float64)
    cdef const double[::1] to = np.ascontiguousarray(t_other, dtype=np.float64)
    cdef Py_ssize_t n = td.shape[0]
    cdef Py_ssize_t n_other = to.shape[0]
    out_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef Py_ssize_t i, j = 0, k
    cdef double t, d_lo, d_hi, best
    for i in range(n):
        t = td[i]
        while j < n_other and to[j] < t:
            j += 1
        if j == 0:
            k = 0
            best = to[0] - t
        elif j == n_other:
            k = n_other - 1
            best = t - to[k]
        else:
            d_lo = t - to[j - 1]
            d_hi = to[j] - t
            if d_lo <= d_hi:
                k = j - 1
                best = d_lo
            else:
                k = j
                best = d_hi
        while k > 0 and fabs(t - to[k - 1]) == best:
            k -= 1
        out[i] = k
    return out_arr


cdef double _pearson(const double[::1] x, const double[::1] y) noexcept nogil:
    cdef Py_ssize_t n = x.shape[0], i
    cdef double xm = 0.0, ym = 0.0, sxy = 0.0, sxx = 0.0, syy = 0.0, dx, dy, r
    cdef double xmin = x[0], xmax = x[0], ymin = y[0], ymax = y[0]
    if n < 2:
        return NAN
    for i in range(n):
        xm += x[i]
        ym += y[i]
        if x[i] < xmin:
            xmin = x[i]
        elif x[i] > xmax:
            xmax = x[i]
        if y[i] < ymin:
            ymin = y[i]
        elif y[i] > ymax:
            ymax = y[i]
    if xmin == xmax or ymin == ymax:
        return NAN
    xm /= n
    ym /= n
    for i in range(n):
        dx = x[i] - xm
        dy = y[i] - ym
        sxy += dx * dy
        sxx += dx * dx
        syy += dy * dy
    r = sxy / (sqrt(sxx) * sqrt(syy))
    if r > 1.0:
        return 1.0
    if r < -1.0:
        return -1.0
    return r


def pearson(x, y):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    return _pearson(xv, yv)


def pearson_rows(matrix, y):
    cdef const double[:, ::1] mat = np.ascontiguousarray(matrix, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t m = mat.shape[0], row
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for row in range(m):
            out[row] = _pearson(mat[row], yv)
    return out_arr


def moving_average(t, y, double half_width):
    cdef const double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = tv.shape[0], i, j, lo = 0, hi = 0
    out_arr = np.array(yv, dtype=np.float64)
    if half_width == 0 or n == 0:
        return out_arr
    cdef double[::1] out = out_arr
    cdef double acc
    for i in range(n):
        while tv[i] - tv[lo] > half_width:
            lo += 1
        if hi < i + 1:
            hi = i + 1
        while hi < n and tv[hi] - tv[i] <= half_width:
            hi += 1
        acc = 0.0
        for j in range(lo, hi):
            acc += yv[j]
        out[i] = acc / (hi - lo)
    return out_arr


def diff_stdev(values, int ddof=0):
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0] - 1, i
    cdef double mean = 0.0, acc = 0.0, d
    if n <= ddof:
        return 0.0
    for i in range(n):
        mean += v[i + 1] - v[i]
    mean /= n
    for i in range(n):
        d = v[i + 1] - v[i] - mean
        acc += d * d
    return sqrt(acc / (n - ddof))
