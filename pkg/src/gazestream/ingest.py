"""Gaze-to-frame alignment and 3D gaze ray projection.

Turns raw gaze signals (either 3D rays in world coordinates or image-plane
2D points) into one unified per-frame trajectory: for every video frame
there is exactly one gaze sample, flagged invalid when the raw signal was
invalid or the projection left the image.
"""

from __future__ import annotations

import csv
from bisect import bisect_left
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise DataError(f"focal lengths must be positive, got fx={self.fx} fy={self.fy}")
        if not (0 <= self.cx <= self.width) or not (0 <= self.cy <= self.height):
            raise DataError("principal point outside the frame")


@dataclass(frozen=True)
class GazeRay:
    """World-space gaze ray: origin plus a (normalizable) direction."""

    timestamp: float
    origin: np.ndarray
    direction: np.ndarray
    valid: bool = True


@dataclass(frozen=True)
class CameraPose:
    """world_from_camera rigid transform for one frame."""

    timestamp: float
    world_from_camera: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.world_from_camera, dtype=np.float64)
        if m.shape != (4, 4):
            raise DataError(f"pose must be 4x4, got {m.shape}")
        r = m[:3, :3]
        if not np.allclose(r @ r.T, np.eye(3), atol=1e-6):
            raise DataError("pose rotation block is not orthonormal")
        if not np.allclose(m[3], [0.0, 0.0, 0.0, 1.0], atol=1e-9):
            raise DataError("pose last row must be (0,0,0,1)")


@dataclass(frozen=True)
class GazeSample:
    frame_index: int
    timestamp: float
    x: float
    y: float
    valid: bool
    in_frame: bool


@dataclass
class GazeTrajectory:
    """Per-frame gaze samples; source is 'projected' or 'provided-2d'."""

    samples: list[GazeSample]
    source: str = "projected"
    width: int = 0
    height: int = 0

    def __post_init__(self):
        ts = [s.timestamp for s in self.samples]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise DataError("trajectory timestamps must be strictly increasing")
        idx = [s.frame_index for s in self.samples]
        if len(set(idx)) != len(idx):
            raise DataError("duplicate frame index in trajectory")

    def __len__(self) -> int:
        return len(self.samples)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(x, y, t, valid) as float64/bool arrays for the fixation scan."""
        x = np.array([s.x for s in self.samples], dtype=np.float64)
        y = np.array([s.y for s in self.samples], dtype=np.float64)
        t = np.array([s.timestamp for s in self.samples], dtype=np.float64)
        v = np.array([s.valid and s.in_frame for s in self.samples], dtype=bool)
        return x, y, t, v

    @property
    def duration(self) -> float:
        if not self.samples:
            return 0.0
        return self.samples[-1].timestamp - self.samples[0].timestamp


def align_nearest(signal_timestamps: Sequence[float], frame_timestamps: Sequence[float]) -> list[int]:
    """For each frame timestamp, index of the nearest signal timestamp.

    Both lists must be sorted ascending. Ties break toward the earlier
    signal index so alignment is deterministic.
    """
    if len(signal_timestamps) == 0 or len(frame_timestamps) == 0:
        raise DataError("alignment inputs must be non-empty")
    out = []
    for ft in frame_timestamps:
        i = bisect_left(signal_timestamps, ft)
        if i <= 0:
            out.append(0)
            continue
        if i >= len(signal_timestamps):
            out.append(len(signal_timestamps) - 1)
            continue
        # strict < keeps the earlier index on exact ties
        if abs(signal_timestamps[i] - ft) < abs(signal_timestamps[i - 1] - ft):
            out.append(i)
        else:
            out.append(i - 1)
    return out


def gaze_point_3d(ray: GazeRay, d_eye: float) -> np.ndarray:
    """Virtual fixation point d_eye meters along the normalized ray."""
    if d_eye <= 0:
        raise DataError(f"d_eye must be positive, got {d_eye}")
    d = np.asarray(ray.direction, dtype=np.float64)
    norm = float(np.linalg.norm(d))
    if norm == 0.0:
        raise DataError("degenerate gaze ray: zero-length direction")
    return np.asarray(ray.origin, dtype=np.float64) + d_eye * d / norm


def project_pinhole(cam_point: np.ndarray, intrinsics: CameraIntrinsics) -> tuple[float, float, bool]:
    """Project a camera-space point to (u, v, in_frame).

    Raises BehindCameraError when Z <= 0; build_trajectory catches it and
    marks the sample invalid instead of aborting.
    """
    x, y, z = (float(c) for c in cam_point[:3])
    if z <= 0:
        raise BehindCameraError(f"point behind camera (Z={z})")
    u = x / z * intrinsics.fx + intrinsics.cx
    v = y / z * intrinsics.fy + intrinsics.cy
    in_frame = (0 <= u < intrinsics.width) and (0 <= v < intrinsics.height)
    return u, v, in_frame


class BehindCameraError(DataError):
    pass


IDENTITY_4X4 = np.eye(4, dtype=np.float64)


def build_trajectory(
    rays: Sequence[GazeRay],
    poses: Sequence[CameraPose],
    intrinsics: CameraIntrinsics,
    frame_timestamps: Sequence[float],
    d_eye: float = 1.0,
    axis_transform: np.ndarray | None = None,
) -> GazeTrajectory:
    """Project gaze rays onto frames via nearest-neighbor alignment.

    Chain per frame: p_world = origin + d_eye * dir/|dir|, then
    p_cam = axis_transform @ inverse(world_from_camera) @ [p_world, 1],
    then pinhole projection. Frames with invalid raw gaze or behind-camera
    projections carry valid=False so frame indexing stays dense.
    """
    if not poses:
        raise DataError("no camera poses for this video")
    if not rays:
        raise DataError("no gaze rays for this video")
    t_axis = IDENTITY_4X4 if axis_transform is None else np.asarray(axis_transform, dtype=np.float64)
    if t_axis.shape != (4, 4):
        raise DataError(f"axis transform must be 4x4, got {t_axis.shape}")

    ray_ts = [r.timestamp for r in rays]
    pose_ts = [p.timestamp for p in poses]
    ray_idx = align_nearest(ray_ts, frame_timestamps)
    pose_idx = align_nearest(pose_ts, frame_timestamps)

    samples = []
    for fi, ft in enumerate(frame_timestamps):
        ray = rays[ray_idx[fi]]
        pose = poses[pose_idx[fi]]
        x = y = 0.0
        valid = bool(ray.valid)
        in_frame = False
        if valid:
            try:
                p_world = gaze_point_3d(ray, d_eye)
                cam_from_world = np.linalg.inv(pose.world_from_camera)
                p_h = np.append(p_world, 1.0)
                p_cam = t_axis @ (cam_from_world @ p_h)
                x, y, in_frame = project_pinhole(p_cam, intrinsics)
            except DataError:
                valid = False
        samples.append(GazeSample(fi, float(ft), x, y, valid, in_frame))
    return GazeTrajectory(samples, source="projected", width=intrinsics.width, height=intrinsics.height)


def trajectory_from_2d(
    points: Sequence[tuple[float, float, float, bool]],
    frame_timestamps: Sequence[float],
    width: int,
    height: int,
) -> GazeTrajectory:
    """Passthrough path for datasets that ship image-plane gaze directly.

    points are (timestamp, x, y, valid); one gaze point is picked per frame
    by nearest-neighbor alignment.
    """
    if not points:
        raise DataError("no 2d gaze points for this video")
    idx = align_nearest([p[0] for p in points], frame_timestamps)
    samples = []
    for fi, ft in enumerate(frame_timestamps):
        _, x, y, valid = points[idx[fi]]
        in_frame = bool(valid) and (0 <= x < width) and (0 <= y < height)
        samples.append(GazeSample(fi, float(ft), float(x), float(y), bool(valid), in_frame))
    return GazeTrajectory(samples, source="provided-2d", width=width, height=height)


# ---------------------------------------------------------------------------
# file formats


def read_gaze_rays(path: Path) -> list[GazeRay]:
    """Delimited gaze file: timestamp_s, origin_xyz, direction_xyz, valid."""
    rays = []
    with open(path, newline="") as f:
        for row in csv.reader(f):
            if not row or row[0].startswith("#") or row[0] == "timestamp_s":
                continue
            vals = [float(v) for v in row]
            if len(vals) != 8:
                raise DataError(f"{path}: expected 8 columns, got {len(vals)}")
            rays.append(
                GazeRay(
                    timestamp=vals[0],
                    origin=np.array(vals[1:4]),
                    direction=np.array(vals[4:7]),
                    valid=vals[7] != 0,
                )
            )
    return rays


def read_gaze_2d(path: Path) -> list[tuple[float, float, float, bool]]:
    """Delimited gaze file: timestamp_s, x_px, y_px, valid."""
    pts = []
    with open(path, newline="") as f:
        for row in csv.reader(f):
            if not row or row[0].startswith("#") or row[0] == "timestamp_s":
                continue
            vals = [float(v) for v in row]
            if len(vals) != 4:
                raise DataError(f"{path}: expected 4 columns, got {len(vals)}")
            pts.append((vals[0], vals[1], vals[2], vals[3] != 0))
    return pts


def read_poses(path: Path) -> list[CameraPose]:
    """Pose file: timestamp_s plus 16 row-major matrix entries per line."""
    poses = []
    with open(path, newline="") as f:
        for row in csv.reader(f):
            if not row or row[0].startswith("#") or row[0] == "timestamp_s":
                continue
            vals = [float(v) for v in row]
            if len(vals) != 17:
                raise DataError(f"{path}: expected 17 columns, got {len(vals)}")
            poses.append(CameraPose(vals[0], np.array(vals[1:]).reshape(4, 4)))
    return poses


def read_intrinsics(path: Path) -> CameraIntrinsics:
    import yaml

    with open(path) as f:
        doc = yaml.safe_load(f)
    try:
        return CameraIntrinsics(
            fx=float(doc["fx"]),
            fy=float(doc["fy"]),
            cx=float(doc["cx"]),
            cy=float(doc["cy"]),
            width=int(doc["width"]),
            height=int(doc["height"]),
        )
    except KeyError as exc:
        raise DataError(f"{path}: missing intrinsics field {exc}") from exc


def write_trajectory(traj: GazeTrajectory, path: Path) -> None:
    """One record per frame: frame_index, timestamp, x, y, valid, in_frame."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["frame_index", "timestamp", "x", "y", "valid", "in_frame"])
        w.writerow(["# source", traj.source, traj.width, traj.height, "", ""])
        for s in traj.samples:
            w.writerow([s.frame_index, f"{s.timestamp:.6f}", f"{s.x:.4f}", f"{s.y:.4f}", int(s.valid), int(s.in_frame)])


def read_trajectory(path: Path) -> GazeTrajectory:
    samples = []
    source = "projected"
    width = height = 0
    with open(path, newline="") as f:
        for row in csv.reader(f):
            if not row or row[0] == "frame_index":
                continue
            if row[0] == "# source":
                source, width, height = row[1], int(row[2]), int(row[3])
                continue
            samples.append(
                GazeSample(
                    frame_index=int(row[0]),
                    timestamp=float(row[1]),
                    x=float(row[2]),
                    y=float(row[3]),
                    valid=row[4] == "1",
                    in_frame=row[5] == "1",
                )
            )
    return GazeTrajectory(samples, source=source, width=width, height=height)
