import math
import random

import numpy as np
import pytest

import helpers
import oracles
from iluscan import (
    AxisAlignedBox,
    Detection,
    EmptyBox,
    Frame,
    RotatedBox,
    clip_box,
    intersect_box,
    iou,
    rotate_point,
    rotated_to_corners,
)


class TestAxisAlignedBox:
    def test_dimensions(self):
        box = AxisAlignedBox(2, 3, 10, 7)
        assert box.width == 8
        assert box.height == 4
        assert box.area == 32
        assert box.as_tuple() == (2, 3, 10, 7)

    @pytest.mark.parametrize("bad", [(5, 0, 5, 10), (0, 5, 10, 5), (6, 0, 5, 10)])
    def test_degenerate_rejected(self, bad):
        with pytest.raises(ValueError):
            AxisAlignedBox(*bad)


class TestDetection:
    def test_score_bounds(self):
        box = AxisAlignedBox(0, 0, 1, 1)
        Detection(box, "sb_DB", 0.0)
        Detection(box, "sb_DB", 1.0)
        with pytest.raises(ValueError):
            Detection(box, "sb_DB", 1.5)
        with pytest.raises(ValueError):
            Detection(box, "sb_DB", -0.1)


class TestRotatedBox:
    def test_angle_range(self):
        RotatedBox(0, 0, 2, 1, math.pi / 2)
        with pytest.raises(ValueError):
            RotatedBox(0, 0, 2, 1, -math.pi / 2)
        with pytest.raises(ValueError):
            RotatedBox(0, 0, 2, 1, math.pi)

    def test_positive_extent(self):
        with pytest.raises(ValueError):
            RotatedBox(0, 0, 0, 1, 0.0)
        with pytest.raises(ValueError):
            RotatedBox(0, 0, 1, -1, 0.0)


class TestIou:
    def test_identical(self):
        a = AxisAlignedBox(0, 0, 10, 10)
        assert iou(a, a) == 1.0

    def test_disjoint(self):
        assert iou(AxisAlignedBox(0, 0, 1, 1), AxisAlignedBox(5, 5, 6, 6)) == 0.0

    def test_touching_edges(self):
        assert iou(AxisAlignedBox(0, 0, 5, 5), AxisAlignedBox(5, 0, 10, 5)) == 0.0

    def test_half_overlap(self):
        a = AxisAlignedBox(0, 0, 10, 10)
        b = AxisAlignedBox(5, 0, 15, 10)
        assert iou(a, b) == pytest.approx(1 / 3, abs=1e-12)

    def test_symmetry_and_bounds(self):
        rng = random.Random(11)
        for _ in range(200):
            a = helpers.int_box(rng)
            b = helpers.int_box(rng)
            v = iou(a, b)
            assert v == iou(b, a)
            assert 0.0 <= v <= 1.0

    def test_against_pixel_counting(self):
        rng = random.Random(7)
        for _ in range(300):
            a = helpers.int_box(rng)
            b = helpers.int_box(rng)
            expected = oracles.pixel_iou(a.as_tuple(), b.as_tuple())
            assert iou(a, b) == pytest.approx(expected, abs=1e-9)


class TestClipBox:
    def test_clips_negative_origin(self):
        clipped = clip_box(AxisAlignedBox(-5, -5, 10, 10), 100, 100)
        assert clipped.as_tuple() == (0, 0, 10, 10)

    def test_inside_returns_same_object(self):
        box = AxisAlignedBox(5, 5, 20, 20)
        assert clip_box(box, 100, 100) is box

    def test_fully_outside_raises(self):
        with pytest.raises(EmptyBox):
            clip_box(AxisAlignedBox(150, 150, 200, 200), 100, 100)

    def test_clips_far_edges(self):
        clipped = clip_box(AxisAlignedBox(90, 40, 130, 120), 100, 100)
        assert clipped.as_tuple() == (90, 40, 100, 100)


class TestIntersectBox:
    def test_overlap(self):
        got = intersect_box(AxisAlignedBox(0, 0, 10, 10), AxisAlignedBox(5, 5, 20, 20))
        assert got.as_tuple() == (5, 5, 10, 10)

    def test_disjoint_raises(self):
        with pytest.raises(EmptyBox):
            intersect_box(AxisAlignedBox(0, 0, 1, 1), AxisAlignedBox(2, 2, 3, 3))

    def test_touching_raises(self):
        with pytest.raises(EmptyBox):
            intersect_box(AxisAlignedBox(0, 0, 5, 5), AxisAlignedBox(5, 0, 9, 5))

    def test_matches_iou_nonzero(self):
        rng = random.Random(23)
        for _ in range(200):
            a = helpers.int_box(rng)
            b = helpers.int_box(rng)
            try:
                inter = intersect_box(a, b)
            except EmptyBox:
                assert iou(a, b) == 0.0
                continue
            union = a.area + b.area - inter.area
            assert iou(a, b) == pytest.approx(inter.area / union, abs=1e-12)


class TestRotatePoint:
    def test_zero_angle_identity(self):
        assert rotate_point(3.5, -2.0, 1.0, 1.0, 0.0) == (3.5, -2.0)

    def test_quarter_turn(self):
        # Screen-CCW in y-down coordinates: +x rotates toward -y.
        x, y = rotate_point(1.0, 0.0, 0.0, 0.0, math.pi / 2)
        assert x == pytest.approx(0.0, abs=1e-12)
        assert y == pytest.approx(-1.0, abs=1e-12)

    def test_preserves_distance(self):
        rng = random.Random(3)
        for _ in range(100):
            cx, cy = rng.uniform(-50, 50), rng.uniform(-50, 50)
            px, py = rng.uniform(-50, 50), rng.uniform(-50, 50)
            angle = rng.uniform(-math.pi, math.pi)
            qx, qy = rotate_point(px, py, cx, cy, angle)
            assert math.hypot(px - cx, py - cy) == pytest.approx(
                math.hypot(qx - cx, qy - cy), abs=1e-9
            )

    def test_inverse(self):
        qx, qy = rotate_point(7.0, 2.0, 1.0, 1.0, 0.7)
        px, py = rotate_point(qx, qy, 1.0, 1.0, -0.7)
        assert (px, py) == (pytest.approx(7.0, abs=1e-9), pytest.approx(2.0, abs=1e-9))


class TestRotatedToCorners:
    def test_axis_aligned(self):
        corners = rotated_to_corners(RotatedBox(10, 10, 4, 2, 0.0))
        assert corners == ((8.0, 9.0), (8.0, 11.0), (12.0, 11.0), (12.0, 9.0))

    def test_quarter_pi_square(self):
        corners = rotated_to_corners(RotatedBox(0, 0, 2, 2, math.pi / 4))
        r = math.sqrt(2)
        expected = {(-r, 0.0), (0.0, r), (r, 0.0), (0.0, -r)}
        for cx, cy in corners:
            assert any(
                abs(cx - ex) < 1e-9 and abs(cy - ey) < 1e-9 for ex, ey in expected
            )

    def test_centroid_is_center(self):
        rng = random.Random(5)
        for _ in range(100):
            rbox = RotatedBox(
                rng.uniform(-20, 20),
                rng.uniform(-20, 20),
                rng.uniform(1, 30),
                rng.uniform(1, 30),
                rng.uniform(-math.pi / 2 + 1e-6, math.pi / 2),
            )
            corners = rotated_to_corners(rbox)
            assert sum(c[0] for c in corners) / 4 == pytest.approx(rbox.center_x, abs=1e-9)
            assert sum(c[1] for c in corners) / 4 == pytest.approx(rbox.center_y, abs=1e-9)

    def test_side_lengths(self):
        rbox = RotatedBox(5, 5, 6, 3, 0.4)
        tl, bl, br, tr = rotated_to_corners(rbox)
        assert math.dist(tl, tr) == pytest.approx(6.0, abs=1e-9)
        assert math.dist(tl, bl) == pytest.approx(3.0, abs=1e-9)
        assert math.dist(bl, br) == pytest.approx(6.0, abs=1e-9)

    def test_against_matrix_oracle(self):
        rng = random.Random(13)
        for _ in range(300):
            cx, cy = rng.uniform(-100, 100), rng.uniform(-100, 100)
            w, h = rng.uniform(0.5, 60), rng.uniform(0.5, 60)
            angle = rng.uniform(-math.pi / 2 + 1e-9, math.pi / 2)
            got = np.array(rotated_to_corners(RotatedBox(cx, cy, w, h, angle)))
            expected = oracles.rotated_corners(cx, cy, w, h, angle)
            assert np.allclose(got, expected, atol=1e-9)


class TestFrame:
    def test_from_array(self):
        pixels = np.zeros((10, 20, 3), dtype=np.uint8)
        frame = Frame.from_array(pixels, 4)
        assert (frame.width, frame.height, frame.channels) == (20, 10, 3)
        assert frame.frame_index == 4
        assert frame.source is None

    def test_grayscale(self):
        frame = Frame.from_array(np.zeros((5, 6), dtype=np.uint8))
        assert frame.channels == 1

    def test_rejects_wrong_dtype(self):
        with pytest.raises((TypeError, ValueError)):
            Frame.from_array(np.zeros((5, 6, 3), dtype=np.float32))

    def test_rejects_bad_channel_count(self):
        with pytest.raises(ValueError):
            Frame.from_array(np.zeros((5, 6, 4), dtype=np.uint8))

    def test_source_carried(self):
        frame = Frame.from_array(np.zeros((2, 2, 3), dtype=np.uint8), 0, None, "a.png")
        assert frame.source == "a.png"
