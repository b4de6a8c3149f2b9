# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled fixation interval scan.

Same predicate and leftmost-maximal search as _scan_py.scan_intervals,
with arithmetic performed in the identical order so results are bit-equal
to the pure-Python fallback (the extension is built with FP contraction
disabled for that reason).
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def scan_intervals(
    object x_in,
    object y_in,
    object t_in,
    object valid_in,
    double radius,
    double dur_min,
    double gap_max,
):
    """Return leftmost-maximal fixation intervals as (s, e, cx, cy)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.ascontiguousarray(y_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t = np.ascontiguousarray(t_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] valid = np.ascontiguousarray(valid_in, dtype=np.uint8)
    cdef Py_ssize_t n = x.shape[0]
    cdef double r2 = radius * radius
    cdef Py_ssize_t s = 0
    cdef Py_ssize_t best, i
    cdef double sx, sy
    cdef Py_ssize_t m
    out = []
    while s < n:
        if not valid[s]:
            s += 1
            continue
        best = _max_valid_end(&x[0], &y[0], &t[0], &valid[0], n, s, r2, dur_min, gap_max)
        if best < 0:
            s += 1
            continue
        sx = 0.0
        sy = 0.0
        m = 0
        for i in range(s, best + 1):
            if valid[i]:
                sx += x[i]
                sy += y[i]
                m += 1
        out.append((s, best, sx / m, sy / m))
        s = best + 1
    return out


cdef Py_ssize_t _max_valid_end(
    const double* x,
    const double* y,
    const double* t,
    const unsigned char* valid,
    Py_ssize_t n,
    Py_ssize_t s,
    double r2,
    double dur_min,
    double gap_max,
) noexcept nogil:
    cdef Py_ssize_t best = -1
    cdef double sx = 0.0
    cdef double sy = 0.0
    cdef Py_ssize_t m = 0
    cdef Py_ssize_t last_valid = -1
    cdef Py_ssize_t e
    cdef double cx, cy, dxe, dye, dxs, dys
    for e in range(s, n):
        if valid[e]:
            if last_valid >= 0 and last_valid < e - 1 and t[e] - t[last_valid] > gap_max:
                break
            sx += x[e]
            sy += y[e]
            m += 1
            last_valid = e
        else:
            continue
        if t[e] - t[s] < dur_min:
            continue
        cx = sx / m
        cy = sy / m
        dxe = x[e] - cx
        dye = y[e] - cy
        if dxe * dxe + dye * dye > r2:
            continue
        dxs = x[s] - cx
        dys = y[s] - cy
        if dxs * dxs + dys * dys > r2:
            continue
        if _runs_ok(x, y, t, valid, s, e, cx, cy, r2, gap_max):
            best = e
    return best


cdef bint _runs_ok(
    const double* x,
    const double* y,
    const double* t,
    const unsigned char* valid,
    Py_ssize_t s,
    Py_ssize_t e,
    double cx,
    double cy,
    double r2,
    double gap_max,
) noexcept nogil:
    cdef double prev_member_t = t[s]
    cdef bint run_open = False
    cdef bint member
    cdef Py_ssize_t i
    cdef double dx, dy
    for i in range(s + 1, e + 1):
        member = False
        if valid[i]:
            dx = x[i] - cx
            dy = y[i] - cy
            member = dx * dx + dy * dy <= r2
        if member:
            if run_open:
                if t[i] - prev_member_t > gap_max:
                    return False
                run_open = False
            prev_member_t = t[i]
        else:
            run_open = True
    return not run_open
