"""Independent brute-force oracles and synthetic data generators.

These never share code with the production paths they check: the fixation
oracle enumerates every interval under the declarative predicate with
plain nested loops (numba-compiled so the acceptance budget holds), and
the set-algebra oracles recompute pool memberships from scratch.
"""

from __future__ import annotations

import random

import numba
import numpy as np

from gazestream.oracle import ObjectRecord
from gazestream.scanpath import Scanpath, ScanpathEntry
from gazestream.fixation import Fixation
from gazestream.qa.items import ActionAnnotation


@numba.njit(cache=True)
def _interval_ok(x, y, t, valid, s, e, r2, dur_min, gap_max):
    if valid[s] == 0 or valid[e] == 0:
        return False, 0.0, 0.0
    if t[e] - t[s] < dur_min:
        return False, 0.0, 0.0
    sx = 0.0
    sy = 0.0
    m = 0
    for i in range(s, e + 1):
        if valid[i] == 1:
            sx += x[i]
            sy += y[i]
            m += 1
    cx = sx / m
    cy = sy / m
    dxs = x[s] - cx
    dys = y[s] - cy
    if dxs * dxs + dys * dys > r2:
        return False, 0.0, 0.0
    dxe = x[e] - cx
    dye = y[e] - cy
    if dxe * dxe + dye * dye > r2:
        return False, 0.0, 0.0
    prev_t = t[s]
    open_run = False
    for i in range(s + 1, e + 1):
        member = False
        if valid[i] == 1:
            dx = x[i] - cx
            dy = y[i] - cy
            if dx * dx + dy * dy <= r2:
                member = True
        if member:
            if open_run:
                if t[i] - prev_t > gap_max:
                    return False, 0.0, 0.0
                open_run = False
            prev_t = t[i]
        else:
            open_run = True
    if open_run:
        return False, 0.0, 0.0
    return True, cx, cy


@numba.njit(cache=True)
def _oracle_scan(x, y, t, valid, radius, dur_min, gap_max):
    n = x.shape[0]
    r2 = radius * radius
    starts = np.empty(n, dtype=np.int64)
    ends = np.empty(n, dtype=np.int64)
    cxs = np.empty(n, dtype=np.float64)
    cys = np.empty(n, dtype=np.float64)
    count = 0
    s = 0
    while s < n:
        best_e = -1
        best_cx = 0.0
        best_cy = 0.0
        for e in range(s, n):
            ok, cx, cy = _interval_ok(x, y, t, valid, s, e, r2, dur_min, gap_max)
            if ok:
                best_e = e
                best_cx = cx
                best_cy = cy
        if best_e < 0:
            s += 1
            continue
        starts[count] = s
        ends[count] = best_e
        cxs[count] = best_cx
        cys[count] = best_cy
        count += 1
        s = best_e + 1
    return starts[:count], ends[:count], cxs[:count], cys[:count]


def fixation_oracle(x, y, t, valid, radius, dur_min, gap_max):
    """Leftmost-maximal fixation intervals by exhaustive enumeration."""
    starts, ends, cxs, cys = _oracle_scan(
        np.ascontiguousarray(x, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.float64),
        np.ascontiguousarray(t, dtype=np.float64),
        np.ascontiguousarray(valid, dtype=np.uint8),
        radius,
        dur_min,
        gap_max,
    )
    return [(int(s), int(e), float(cx), float(cy)) for s, e, cx, cy in zip(starts, ends, cxs, cys)]


def synth_trajectory(rng: random.Random, max_samples: int = 300):
    """Mixed clusters / jitter / flicks / dropouts at 30 Hz, 640px frame."""
    n = rng.randint(60, max_samples)
    dt = 1.0 / 30.0
    x = np.empty(n)
    y = np.empty(n)
    valid = np.ones(n, dtype=bool)
    t = np.arange(n) * dt
    i = 0
    while i < n:
        kind = rng.choices(("cluster", "jitter", "dropout"), weights=(0.5, 0.35, 0.15))[0]
        if kind == "cluster":
            length = min(rng.randint(8, 60), n - i)
            cx, cy = rng.uniform(60, 580), rng.uniform(60, 420)
            sigma = rng.uniform(1.0, 9.0)
            for k in range(i, i + length):
                x[k] = cx + rng.gauss(0, sigma)
                y[k] = cy + rng.gauss(0, sigma)
                if rng.random() < 0.04:  # flick
                    x[k] += rng.choice((-1, 1)) * rng.uniform(60, 200)
                    y[k] += rng.choice((-1, 1)) * rng.uniform(60, 200)
        elif kind == "jitter":
            length = min(rng.randint(5, 40), n - i)
            for k in range(i, i + length):
                x[k] = rng.uniform(0, 640)
                y[k] = rng.uniform(0, 480)
        else:
            length = min(rng.randint(1, 10), n - i)
            for k in range(i, i + length):
                x[k] = rng.uniform(0, 640)
                y[k] = rng.uniform(0, 480)
                valid[k] = False
        i += length
    return x, y, t, valid


# ---------------------------------------------------------------------------
# scanpath generation and set-algebra oracles

IDENTITY_POOL = [
    "cup", "knife", "cutting board", "pan", "kettle", "sponge", "bottle",
    "plate", "whisk", "jar", "towel", "ladle", "peeler", "grater",
]

VERBS = ["pick up", "rinse", "move", "open", "close", "inspect", "wipe", "stack"]


def make_scanpath(rng: random.Random, video_id: str, n_entries: int | None = None) -> Scanpath:
    k = n_entries if n_entries is not None else rng.randint(4, 10)
    t = rng.uniform(0.0, 5.0)
    entries = []
    for i in range(k):
        t_start = t
        t_end = t_start + rng.uniform(1.0, 4.0)
        t = t_end + rng.uniform(0.5, 6.0)
        gazed = rng.choice(IDENTITY_POOL)
        others = rng.sample([n for n in IDENTITY_POOL if n != gazed], rng.randint(0, 2))
        fov_names = [gazed] + others
        out_names = rng.sample([n for n in IDENTITY_POOL if n not in fov_names], rng.randint(0, 5))
        fix = Fixation(
            index=i,
            centroid_x=rng.uniform(50, 590),
            centroid_y=rng.uniform(50, 430),
            t_start=round(t_start, 3),
            t_end=round(t_end, 3),
            frame_start=int(t_start * 5),
            frame_end=int(t_end * 5),
            s_min=1.0,
        )
        entries.append(
            ScanpathEntry(
                fixation=fix,
                fov_objects=[
                    ObjectRecord(n, f"a {n} on the counter", "fov-gazed" if j == 0 else "fov-other", i)
                    for j, n in enumerate(fov_names)
                ],
                out_objects=[ObjectRecord(n, f"a {n} in the background", "out-of-fov", i) for n in out_names],
            )
        )
    return Scanpath(video_id=video_id, entries=entries, verified=True)


def make_actions(rng: random.Random, horizon: float) -> list[ActionAnnotation]:
    k = rng.randint(8, 15)
    times = sorted(rng.uniform(0.0, horizon + 70.0) for _ in range(k))
    return [
        ActionAnnotation(timestamp=round(ts, 2), description=f"{rng.choice(VERBS)} the {rng.choice(IDENTITY_POOL)}")
        for ts in times
    ]


def union_fov(s: Scanpath, upto: int) -> set[str]:
    out: set[str] = set()
    for e in s.entries[: upto + 1]:
        for o in e.fov_objects:
            out.add(o.identity)
    return out


def union_all(s: Scanpath, upto: int) -> set[str]:
    out = union_fov(s, upto)
    for e in s.entries[: upto + 1]:
        for o in e.out_objects:
            out.add(o.identity)
    return out


def union_out(s: Scanpath, upto: int) -> set[str]:
    out: set[str] = set()
    for e in s.entries[: upto + 1]:
        for o in e.out_objects:
            out.add(o.identity)
    return out


class ScriptedAttributeOracle:
    """Deterministic attribute responses for OAR generation in tests."""

    ATTRS = ("color", "material", "shape", "texture", "size", "state")
    VALUES = {
        "color": ["red", "blue", "green", "yellow", "black"],
        "material": ["wood", "steel", "glass", "ceramic", "plastic"],
        "shape": ["round", "square", "oval", "oblong", "hexagonal"],
        "texture": ["smooth", "rough", "ribbed", "glossy", "matte"],
        "size": ["small", "medium", "large", "tiny", "huge"],
        "state": ["clean", "dirty", "open", "closed", "full"],
    }

    def complete(self, images, prompt):
        import json
        import re

        if "Check this multiple-choice attribute question" in prompt:
            return "yes"
        m = re.search(r"^Object: (.+)$", prompt, re.MULTILINE)
        name = m.group(1).strip() if m else "thing"
        h = sum(ord(c) for c in name)
        attr = self.ATTRS[h % len(self.ATTRS)]
        values = self.VALUES[attr]
        answer = values[h % len(values)]
        distractors = [v for v in values if v != answer][:3]
        return json.dumps({"attribute_type": attr, "answer": answer, "distractors": distractors})
