"""Pure-Python fixation interval scan (fallback for the compiled kernel).

A fixation candidate is an index interval [s, e] over the gaze samples
satisfying the predicate below; the scan reports the leftmost-maximal
non-overlapping set of such intervals, left to right.

Predicate P(s, e), with R the pixel dispersion radius, gap_max the flick
tolerance in seconds and dur_min the minimum duration:

  * centroid c = mean position over the *valid* samples in [s, e];
  * a sample is a member when it is valid and within R of c;
  * samples s and e are members;
  * every maximal run of non-members strictly inside [s, e] is bracketed
    by members whose time gap is <= gap_max (a transient flick or dropout);
  * t[e] - t[s] >= dur_min.

The compiled kernel in _scan.pyx implements the identical arithmetic in
the identical order, so both backends return bit-equal results.
"""

from __future__ import annotations

import numpy as np


def scan_intervals(
    x: np.ndarray,
    y: np.ndarray,
    t: np.ndarray,
    valid: np.ndarray,
    radius: float,
    dur_min: float,
    gap_max: float,
) -> list[tuple[int, int, float, float]]:
    """Return leftmost-maximal fixation intervals as (s, e, cx, cy)."""
    n = len(x)
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    t = np.ascontiguousarray(t, dtype=np.float64)
    valid = np.ascontiguousarray(valid, dtype=np.uint8)
    r2 = radius * radius
    out = []
    s = 0
    while s < n:
        if not valid[s]:
            s += 1
            continue
        best = _max_valid_end(x, y, t, valid, s, r2, dur_min, gap_max)
        if best < 0:
            s += 1
            continue
        sx, sy, m = _valid_sums(x, y, valid, s, best)
        out.append((s, best, sx / m, sy / m))
        s = best + 1
    return out


def _valid_sums(x, y, valid, s, e):
    sx = 0.0
    sy = 0.0
    m = 0
    for i in range(s, e + 1):
        if valid[i]:
            sx += x[i]
            sy += y[i]
            m += 1
    return sx, sy, m


def _max_valid_end(x, y, t, valid, s, r2, dur_min, gap_max):
    """Largest e with P(s, e), or -1. Exact search with two prunes:

    an invalid run whose nearest valid neighbors are further apart than
    gap_max can never be repaired by a shifting centroid (members are
    always valid), so the scan stops there; cheap endpoint prechecks skip
    full member checks for hopeless window ends.
    """
    n = len(x)
    best = -1
    sx = 0.0
    sy = 0.0
    m = 0
    last_valid = -1
    for e in range(s, n):
        if valid[e]:
            if last_valid >= 0 and last_valid < e - 1 and t[e] - t[last_valid] > gap_max:
                break  # unrepairable dropout between last_valid and e
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


def _runs_ok(x, y, t, valid, s, e, cx, cy, r2, gap_max):
    """Check every non-member run inside [s, e] against the flick budget."""
    prev_member_t = t[s]  # s is already known to be a member
    run_open = False
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
    return not run_open  # e itself must have been a member
