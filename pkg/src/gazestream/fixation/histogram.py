"""Hue-saturation histograms and the scene-consistency filter.

A fixation interval that spans a camera cut is visually discontinuous even
when the gaze stays put; consecutive-frame histogram correlation catches
that. Hue lives in [0, 180) and saturation in [0, 256), matching 8-bit HSV.
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from ..errors import DataError


@dataclass(frozen=True)
class HsHistogram:
    """Normalized 2D hue-saturation histogram (sums to 1)."""

    bins: np.ndarray

    def __post_init__(self):
        if np.any(self.bins < 0):
            raise DataError("histogram entries must be non-negative")
        total = float(self.bins.sum())
        if abs(total - 1.0) > 1e-9:
            raise DataError(f"histogram must be normalized, sums to {total}")


def hs_histogram(frame: np.ndarray, bins_hue: int = 30, bins_sat: int = 32) -> HsHistogram:
    """Normalized hue-saturation histogram of an RGB frame."""
    if frame.size == 0:
        raise DataError("cannot histogram a zero-pixel image")
    hsv = cv2.cvtColor(frame, cv2.COLOR_RGB2HSV)
    hist = cv2.calcHist([hsv], [0, 1], None, [bins_hue, bins_sat], [0, 180, 0, 256])
    hist = hist.astype(np.float64)
    return HsHistogram(hist / hist.sum())


def pearson(h1: HsHistogram, h2: HsHistogram) -> float:
    """Pearson correlation between two histograms of identical shape.

    Zero-variance histograms (all mass in one bin pattern identical across
    bins) are degenerate: correlation is 1.0 when the histograms are
    identical and 0.0 otherwise, instead of dividing by zero.
    """
    a = h1.bins.ravel()
    b = h2.bins.ravel()
    if a.shape != b.shape:
        raise DataError(f"histogram shapes differ: {h1.bins.shape} vs {h2.bins.shape}")
    if np.array_equal(a, b):
        return 1.0  # exact, sidestepping sqrt rounding on the norms
    da = a - a.mean()
    db = b - b.mean()
    na = float(np.sqrt(np.sum(da * da)))
    nb = float(np.sqrt(np.sum(db * db)))
    if na == 0.0 or nb == 0.0:
        return 1.0 if np.array_equal(a, b) else 0.0
    return float(np.sum(da * db) / (na * nb))


def scene_consistency(
    frames: list[np.ndarray],
    tau_scene: float,
    bins_hue: int = 30,
    bins_sat: int = 32,
) -> tuple[float | None, bool]:
    """Minimum consecutive-pair correlation over sampled frames.

    Returns (s_min, keep). Fewer than two frames cannot evidence a scene
    change, so such intervals pass with s_min absent.
    """
    if len(frames) < 2:
        return None, True
    hists = [hs_histogram(f, bins_hue, bins_sat) for f in frames]
    s_min = min(pearson(hists[i], hists[i + 1]) for i in range(len(hists) - 1))
    return s_min, s_min >= tau_scene


def sample_indices(start: int, end: int, count: int) -> list[int]:
    """Uniformly spaced integer indices in [start, end], deduplicated."""
    if end < start:
        raise DataError(f"empty index range [{start}, {end}]")
    span = end - start
    if span + 1 <= count:
        return list(range(start, end + 1))
    pts = np.linspace(start, end, count)
    out = []
    for p in pts:
        i = int(round(p))
        if not out or i != out[-1]:
            out.append(i)
    return out
