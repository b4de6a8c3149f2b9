import math

import numpy as np
import pytest

from gazestream.errors import DataError
from gazestream.fov import (
    GREEN,
    RED,
    FovSpec,
    crop_fov_patch,
    crop_origin,
    fov_radius_px,
    fov_spec,
    hfov_from_intrinsics,
    mask_fov,
    overlay_eval_prompt,
)


def checkerboard(h=200, w=300):
    frame = np.zeros((h, w, 3), dtype=np.uint8)
    frame[:, :] = (120, 180, 90)
    frame[::2, ::2] = (200, 50, 50)
    return frame


class TestHfov:
    def test_half_width_focal_gives_90(self):
        assert abs(hfov_from_intrinsics(320.0, 640.0) - 90.0) < 1e-9

    def test_sixty_degrees(self):
        # 2*atan(320/554.256) = 2*30.000 degrees
        assert abs(hfov_from_intrinsics(554.256, 640.0) - 60.0) < 0.01

    def test_long_focal_approaches_zero(self):
        assert hfov_from_intrinsics(1e9, 640.0) < 1e-4

    def test_strictly_decreasing_in_fx(self):
        values = [hfov_from_intrinsics(fx, 640) for fx in (100, 200, 400, 800, 1600)]
        assert all(a > b for a, b in zip(values, values[1:]))


class TestFovRadius:
    def test_canonical_example(self):
        assert abs(fov_radius_px(640, 90, 15) - 106.67) < 0.01

    def test_r_deg_equal_hfov_gives_width(self):
        assert fov_radius_px(640, 72, 72) == 640.0

    def test_canonical_90_when_no_intrinsics(self):
        spec = fov_spec(640, fx=None)
        assert spec.hfov_deg == 90.0 and spec.source == "canonical-90"
        assert abs(spec.radius_px - 106.67) < 0.01

    def test_from_intrinsics(self):
        spec = fov_spec(640, fx=320.0)
        assert spec.source == "intrinsics"
        assert abs(spec.hfov_deg - 90.0) < 1e-9

    def test_linear_in_r_deg_and_width(self):
        base = fov_radius_px(640, 90, 10)
        assert abs(fov_radius_px(640, 90, 20) - 2 * base) < 1e-9
        assert abs(fov_radius_px(1280, 90, 10) - 2 * base) < 1e-9

    def test_invalid_spec(self):
        with pytest.raises(DataError):
            FovSpec(radius_px=-1)
        with pytest.raises(DataError):
            FovSpec(radius_px=10, hfov_deg=190)


class TestCropPatch:
    def test_interior_crop_size(self):
        patch = crop_fov_patch(checkerboard(), (150.0, 100.0), 50.0)
        assert patch.shape[0] == 101 and patch.shape[1] == 101

    def test_corner_clamped(self):
        patch = crop_fov_patch(checkerboard(), (0.0, 0.0), 50.0)
        assert patch.shape[0] == 51 and patch.shape[1] == 51  # no padding

    def test_red_dot_at_center(self):
        patch = crop_fov_patch(checkerboard(), (150.0, 100.0), 50.0, mark_center=True)
        x0, y0 = crop_origin((200, 300), (150.0, 100.0), 50.0)
        assert tuple(patch[100 - y0, 150 - x0]) == RED

    def test_outside_circle_blanked(self):
        patch = crop_fov_patch(checkerboard(), (150.0, 100.0), 50.0)
        assert tuple(patch[0, 0]) == (0, 0, 0)  # corner is outside the disk

    def test_center_outside_frame_rejected(self):
        with pytest.raises(DataError):
            crop_fov_patch(checkerboard(), (400.0, 100.0), 50.0)


class TestMask:
    def test_center_blackened(self):
        out = mask_fov(checkerboard(), (150.0, 100.0), 40.0)
        assert tuple(out[100, 150]) == (0, 0, 0)

    def test_just_outside_unchanged(self):
        frame = checkerboard()
        out = mask_fov(frame, (150.0, 100.0), 40.0)
        assert tuple(out[100, 150 + 41]) == tuple(frame[100, 150 + 41])

    def test_blackened_fraction_matches_area(self):
        h, w, r = 400, 600, 80.0
        frame = np.full((h, w, 3), 255, dtype=np.uint8)
        out = mask_fov(frame, (300.0, 200.0), r)
        black = np.all(out == 0, axis=-1).sum()
        expected = math.pi * r * r
        assert abs(black - expected) / (h * w) < 0.02

    def test_partition_with_crop(self):
        # a pixel carries content in at most one region product
        frame = np.full((100, 120, 3), 77, dtype=np.uint8)
        center, r = (60.0, 50.0), 30.0
        masked = mask_fov(frame, center, r)
        patch = crop_fov_patch(frame, center, r)
        x0, y0 = crop_origin(frame.shape, center, r)
        for px, py in [(60, 50), (60 + 29, 50), (60, 50 - 31), (30, 20), (89, 79)]:
            in_mask = tuple(masked[py, px]) != (0, 0, 0)
            ppx, ppy = px - x0, py - y0
            in_patch = (
                0 <= ppy < patch.shape[0]
                and 0 <= ppx < patch.shape[1]
                and tuple(patch[ppy, ppx]) != (0, 0, 0)
            )
            assert not (in_mask and in_patch)
            assert in_mask or in_patch  # content fully covered for interior pixels


class TestOverlay:
    def test_green_dot_at_gaze(self):
        out = overlay_eval_prompt(checkerboard(), (150.0, 100.0), 60.0)
        assert tuple(out[100, 150]) == GREEN

    def test_red_on_perimeter(self):
        out = overlay_eval_prompt(checkerboard(), (150.0, 100.0), 60.0)
        assert tuple(out[100, 150 + 60]) == RED

    def test_far_pixels_untouched(self):
        frame = checkerboard()
        out = overlay_eval_prompt(frame, (150.0, 100.0), 30.0)
        changed = np.any(out != frame, axis=-1)
        ys, xs = np.nonzero(changed)
        dist = np.hypot(xs - 150, ys - 100)
        assert dist.max() <= 30.0 + 3 + 1  # radius + stroke + rasterization

    def test_gaze_outside_frame_rejected(self):
        with pytest.raises(DataError):
            overlay_eval_prompt(checkerboard(), (500.0, 100.0), 30.0)
