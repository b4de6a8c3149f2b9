"""Field-of-view geometry and region imaging.

The FOV is a circular patch of visual-angle radius r_deg (default 15
degrees, the upper perifoveal bound) around the fixation centroid,
converted to pixels through the horizontal field of view. Region products:
a cropped circular patch for in-FOV prompting, a black-disk mask for
out-of-FOV prompting, and a dot-plus-circle overlay for evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import cv2
import numpy as np

from .errors import DataError

RED = (255, 0, 0)
GREEN = (0, 255, 0)
CIRCLE_STROKE_PX = 3
GAZE_DOT_RADIUS_PX = 6


@dataclass(frozen=True)
class FovSpec:
    radius_px: float
    r_deg: float = 15.0
    hfov_deg: float = 90.0
    source: str = "canonical-90"

    def __post_init__(self):
        if self.radius_px <= 0:
            raise DataError(f"FOV radius must be positive, got {self.radius_px}")
        if not (0 < self.hfov_deg < 180):
            raise DataError(f"HFOV must be in (0,180) degrees, got {self.hfov_deg}")


def hfov_from_intrinsics(fx: float, width: float) -> float:
    """Horizontal field of view in degrees: 2*arctan(width / (2*fx))."""
    if fx <= 0 or width <= 0:
        raise DataError("fx and width must be positive")
    return math.degrees(2.0 * math.atan(width / (2.0 * fx)))


def fov_radius_px(width: float, hfov_deg: float, r_deg: float = 15.0) -> float:
    """Angular radius to pixels: r_deg * (width / hfov_deg)."""
    if width <= 0 or hfov_deg <= 0 or r_deg <= 0:
        raise DataError("width, hfov_deg and r_deg must be positive")
    return r_deg * width / hfov_deg


def fov_spec(width: int, fx: float | None = None, r_deg: float = 15.0) -> FovSpec:
    """Build the FOV spec from intrinsics, or assume a canonical 90-degree
    HFOV when no intrinsics are available."""
    if fx is not None:
        hfov = hfov_from_intrinsics(fx, width)
        source = "intrinsics"
    else:
        hfov = 90.0
        source = "canonical-90"
    return FovSpec(radius_px=fov_radius_px(width, hfov, r_deg), r_deg=r_deg, hfov_deg=hfov, source=source)


def _disk_mask(h: int, w: int, cx: float, cy: float, radius: float) -> np.ndarray:
    yy, xx = np.ogrid[:h, :w]
    return (xx - cx) ** 2 + (yy - cy) ** 2 <= radius * radius


def crop_origin(frame_shape: tuple[int, ...], center: tuple[float, float], radius: float) -> tuple[int, int]:
    """Top-left pixel of the (clamped) square patch around the FOV circle."""
    h, w = frame_shape[:2]
    x0 = max(0, int(math.floor(center[0] - radius)))
    y0 = max(0, int(math.floor(center[1] - radius)))
    return x0, y0


def crop_fov_patch(
    frame: np.ndarray,
    center: tuple[float, float],
    radius: float,
    mark_center: bool = False,
) -> np.ndarray:
    """Square crop circumscribing the FOV circle, outside pixels blanked.

    The crop clamps at frame borders (partial patch, no padding). With
    mark_center a small red dot is drawn at the fixation center: 1% of the
    patch width, minimum 3 px.
    """
    h, w = frame.shape[:2]
    cx, cy = center
    if not (0 <= cx < w and 0 <= cy < h):
        raise DataError(f"center {center} outside frame {w}x{h}")
    x0, y0 = crop_origin(frame.shape, center, radius)
    x1 = min(w, int(math.ceil(cx + radius)) + 1)
    y1 = min(h, int(math.ceil(cy + radius)) + 1)
    patch = frame[y0:y1, x0:x1].copy()
    inside = _disk_mask(patch.shape[0], patch.shape[1], cx - x0, cy - y0, radius)
    patch[~inside] = 0
    if mark_center:
        dot = max(3, int(round(0.01 * patch.shape[1])))
        cv2.circle(patch, (int(round(cx - x0)), int(round(cy - y0))), dot, RED, -1)
    return patch


def mask_fov(frame: np.ndarray, center: tuple[float, float], radius: float) -> np.ndarray:
    """Replace the FOV disk with solid black, leaving the context intact."""
    out = frame.copy()
    inside = _disk_mask(out.shape[0], out.shape[1], center[0], center[1], radius)
    out[inside] = 0
    return out


def overlay_eval_prompt(frame: np.ndarray, gaze: tuple[float, float], radius: float) -> np.ndarray:
    """Green gaze dot plus red FOV circle outline, for model evaluation."""
    h, w = frame.shape[:2]
    if not (0 <= gaze[0] < w and 0 <= gaze[1] < h):
        raise DataError(f"gaze {gaze} outside frame {w}x{h}")
    out = frame.copy()
    center = (int(round(gaze[0])), int(round(gaze[1])))
    cv2.circle(out, center, int(round(radius)), RED, CIRCLE_STROKE_PX)
    cv2.circle(out, center, GAZE_DOT_RADIUS_PX, GREEN, -1)
    return out
