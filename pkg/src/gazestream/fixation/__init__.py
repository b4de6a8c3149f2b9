"""Fixation extraction: stability scan, flick tolerance, scene filter."""

from ._backend import BACKEND as SCAN_BACKEND
from .core import (
    Fixation,
    FixationConfig,
    apply_scene_filter,
    extract_candidates,
    extract_fixations,
    read_fixations,
    write_fixations,
)
from .histogram import HsHistogram, hs_histogram, pearson, sample_indices, scene_consistency

__all__ = [
    "SCAN_BACKEND",
    "Fixation",
    "FixationConfig",
    "HsHistogram",
    "apply_scene_filter",
    "extract_candidates",
    "extract_fixations",
    "hs_histogram",
    "pearson",
    "read_fixations",
    "sample_indices",
    "scene_consistency",
    "write_fixations",
]
