"""Fixation types and the two-stage extractor.

Stage one finds spatially stable intervals (point-wise stability with
flick tolerance, minimum duration); stage two drops intervals spanning a
scene change (hue-saturation histogram consistency).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ..errors import DataError
from ..ingest import GazeTrajectory
from . import _backend
from .histogram import sample_indices, scene_consistency


@dataclass(frozen=True)
class FixationConfig:
    """Extraction thresholds.

    r_thresh is a fraction of the frame width (the paper normalizes the
    dispersion radius across resolutions); tau_dur is seconds. Both are
    mandatory: sane values depend on the recording setup, e.g. 0.05 and
    0.4 s for 30 fps egocentric video.
    """

    r_thresh: float
    tau_dur: float
    interruption_max: float = 0.2
    tau_scene: float = 0.9
    hist_bins_hue: int = 30
    hist_bins_sat: int = 32
    scene_samples: int = 8

    def __post_init__(self):
        if not (0 < self.r_thresh < 1):
            raise DataError(f"r_thresh must be a fraction of frame width in (0,1), got {self.r_thresh}")
        if self.tau_dur <= 0:
            raise DataError(f"tau_dur must be positive, got {self.tau_dur}")
        if not (0 < self.tau_scene <= 1):
            raise DataError(f"tau_scene must be in (0,1], got {self.tau_scene}")
        if self.hist_bins_hue < 2 or self.hist_bins_sat < 2:
            raise DataError("histogram needs at least 2 bins per axis")
        if self.interruption_max < 0:
            raise DataError("interruption_max must be non-negative")


@dataclass(frozen=True)
class Fixation:
    index: int
    centroid_x: float
    centroid_y: float
    t_start: float
    t_end: float
    frame_start: int
    frame_end: int
    s_min: float | None = None

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


def extract_candidates(trajectory: GazeTrajectory, config: FixationConfig) -> list[Fixation]:
    """Spatially stable intervals, unfiltered by scene consistency.

    Leftmost-maximal non-overlapping intervals where every member sample
    stays within r_thresh*width of the interval centroid, non-member runs
    are short flicks or dropouts (bracketing gap <= interruption_max) and
    the duration reaches tau_dur. Invalid samples act as interruptions.
    """
    if len(trajectory) == 0:
        raise DataError("cannot extract fixations from an empty trajectory")
    if trajectory.width <= 0:
        raise DataError("trajectory carries no frame width; r_thresh cannot be resolved")
    x, y, t, valid = trajectory.arrays()
    radius = config.r_thresh * trajectory.width
    raw = _backend.scan_intervals(x, y, t, valid, radius, config.tau_dur, config.interruption_max)
    frames = [s.frame_index for s in trajectory.samples]
    return [
        Fixation(
            index=i,
            centroid_x=cx,
            centroid_y=cy,
            t_start=float(t[s]),
            t_end=float(t[e]),
            frame_start=frames[s],
            frame_end=frames[e],
        )
        for i, (s, e, cx, cy) in enumerate(raw)
    ]


def apply_scene_filter(
    candidates: Sequence[Fixation],
    frame_source: Callable[[int], np.ndarray],
    config: FixationConfig,
) -> list[Fixation]:
    """Keep candidates whose sampled frames are visually continuous."""
    kept = []
    for fix in candidates:
        idx = sample_indices(fix.frame_start, fix.frame_end, config.scene_samples)
        frames = [frame_source(i) for i in idx]
        s_min, keep = scene_consistency(frames, config.tau_scene, config.hist_bins_hue, config.hist_bins_sat)
        if keep:
            kept.append(replace(fix, index=len(kept), s_min=s_min))
    return kept


def extract_fixations(
    trajectory: GazeTrajectory,
    frame_source: Callable[[int], np.ndarray],
    config: FixationConfig,
) -> list[Fixation]:
    """Full extraction: stability scan then scene-consistency filter."""
    return apply_scene_filter(extract_candidates(trajectory, config), frame_source, config)


def write_fixations(fixations: Sequence[Fixation], path: Path) -> None:
    """Line-record file: index, centroid_x, centroid_y, t_start, t_end, s_min."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["index", "centroid_x", "centroid_y", "t_start", "t_end", "frame_start", "frame_end", "s_min"])
        for fx in fixations:
            w.writerow(
                [
                    fx.index,
                    f"{fx.centroid_x:.4f}",
                    f"{fx.centroid_y:.4f}",
                    f"{fx.t_start:.6f}",
                    f"{fx.t_end:.6f}",
                    fx.frame_start,
                    fx.frame_end,
                    "" if fx.s_min is None else f"{fx.s_min:.6f}",
                ]
            )


def read_fixations(path: Path) -> list[Fixation]:
    out = []
    with open(path, newline="") as f:
        for row in csv.reader(f):
            if not row or row[0] == "index":
                continue
            out.append(
                Fixation(
                    index=int(row[0]),
                    centroid_x=float(row[1]),
                    centroid_y=float(row[2]),
                    t_start=float(row[3]),
                    t_end=float(row[4]),
                    frame_start=int(row[5]),
                    frame_end=int(row[6]),
                    s_min=float(row[7]) if row[7] else None,
                )
            )
    return out
