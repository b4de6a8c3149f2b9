"""Image I/O and frame sources.

Frames are RGB uint8 arrays everywhere inside the toolkit; conversion to
BGR happens only at the OpenCV encode/decode boundary. A frame source is
any directory of numbered images plus a small metadata file; decoder
adapters can implement the same protocol.
"""

from __future__ import annotations

from collections import OrderedDict
from pathlib import Path

import cv2
import numpy as np
import yaml

from .errors import DataError


def imread_rgb(path: Path) -> np.ndarray:
    img = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if img is None:
        raise DataError(f"cannot read image {path}")
    return cv2.cvtColor(img, cv2.COLOR_BGR2RGB)


def imwrite_rgb(path: Path, image: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if not cv2.imwrite(str(path), cv2.cvtColor(image, cv2.COLOR_RGB2BGR)):
        raise DataError(f"cannot write image {path}")


class FrameDir:
    """Directory of numbered frames (frame_%05d.png) with meta.yaml."""

    def __init__(self, root: Path):
        self.root = Path(root)
        meta_path = self.root / "meta.yaml"
        if not meta_path.exists():
            raise DataError(f"missing frame metadata {meta_path}")
        with open(meta_path) as f:
            meta = yaml.safe_load(f)
        self.fps = float(meta["fps"])
        self.n_frames = int(meta["n_frames"])
        self.width = int(meta["width"])
        self.height = int(meta["height"])
        self._cache: "OrderedDict[int, np.ndarray]" = OrderedDict()
        self._cache_cap = 128

    @property
    def duration(self) -> float:
        return (self.n_frames - 1) / self.fps if self.n_frames else 0.0

    def timestamps(self) -> list[float]:
        return [i / self.fps for i in range(self.n_frames)]

    def frame(self, index: int) -> np.ndarray:
        if not (0 <= index < self.n_frames):
            raise DataError(f"frame index {index} out of range [0, {self.n_frames})")
        if index not in self._cache:
            if len(self._cache) >= self._cache_cap:
                self._cache.popitem(last=False)
            self._cache[index] = imread_rgb(self.root / f"frame_{index:05d}.png")
        else:
            self._cache.move_to_end(index)
        return self._cache[index]

    def index_at(self, timestamp: float) -> int:
        idx = int(round(timestamp * self.fps))
        return min(max(idx, 0), self.n_frames - 1)

    def frame_at(self, timestamp: float) -> np.ndarray:
        return self.frame(self.index_at(timestamp))


class VideoFrameSource:
    """FrameSource over several videos, with per-frame gaze lookup."""

    def __init__(self, frame_dirs: dict[str, FrameDir], trajectories: dict | None = None):
        self.frame_dirs = frame_dirs
        self.trajectories = trajectories or {}

    def frame_at(self, video_id: str, timestamp: float) -> np.ndarray:
        if video_id not in self.frame_dirs:
            raise DataError(f"unknown video {video_id!r}")
        return self.frame_dirs[video_id].frame_at(timestamp)

    def gaze_at(self, video_id: str, timestamp: float) -> tuple[float, float] | None:
        traj = self.trajectories.get(video_id)
        if traj is None:
            return None
        idx = self.frame_dirs[video_id].index_at(timestamp) if video_id in self.frame_dirs else None
        if idx is None or idx >= len(traj.samples):
            return None
        s = traj.samples[idx]
        if not (s.valid and s.in_frame):
            return None
        return (s.x, s.y)


class BlankFrameSource:
    """Tiny constant frames; for calibration runs that ignore pixels."""

    def __init__(self, size: int = 16):
        self._frame = np.zeros((size, size, 3), dtype=np.uint8)

    def frame_at(self, video_id: str, timestamp: float) -> np.ndarray:
        return self._frame

    def gaze_at(self, video_id: str, timestamp: float):
        return None
