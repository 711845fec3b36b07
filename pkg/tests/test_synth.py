import numpy as np
import pytest

from iluscan import (
    AxisAlignedBox,
    SceneInfeasible,
    SceneSpec,
    aspect_gate,
    generate_suite,
    lower_half,
    parse_csv,
    render,
    render_text,
    text_extent,
    write_suite,
)


def basic_spec(**overrides):
    defaults = dict(
        canvas_width=480,
        canvas_height=360,
        body=AxisAlignedBox(60, 80, 420, 260),
        code_prefix="SJSB",
        code_digits="123456",
        text_height=21,
        text_anchor=(80, 200),
    )
    defaults.update(overrides)
    return SceneSpec(**defaults)


class TestTextExtent:
    def test_single_glyph(self):
        assert text_extent("A", 1) == (5, 7)

    def test_advance_between_glyphs(self):
        assert text_extent("AB", 1) == (11, 7)

    def test_scales_linearly(self):
        w1, h1 = text_extent("SJSB1234", 1)
        w3, h3 = text_extent("SJSB1234", 3)
        assert (w3, h3) == (3 * w1, 3 * h1)


class TestRenderText:
    def test_returns_covering_box(self):
        canvas = np.zeros((100, 200, 3), dtype=np.uint8)
        box = render_text(canvas, "SJSB", 10, 20, 2, (255, 255, 255))
        w, h = text_extent("SJSB", 2)
        assert box.as_tuple() == (10, 20, 10 + w, 20 + h)
        # Ink stays inside the reported box and exists.
        assert canvas[:, :, 0].sum() > 0
        ys, xs = np.nonzero(canvas[:, :, 0])
        assert xs.min() >= 10 and xs.max() < 10 + w
        assert ys.min() >= 20 and ys.max() < 20 + h

    def test_spaces_advance_without_ink(self):
        canvas = np.zeros((50, 200, 3), dtype=np.uint8)
        box_spaced = render_text(canvas, "A A", 0, 0, 1, (255, 255, 255))
        w_spaced, _ = text_extent("A A", 1)
        assert box_spaced.width == w_spaced

    def test_unknown_glyph_rejected(self):
        canvas = np.zeros((50, 50, 3), dtype=np.uint8)
        with pytest.raises(ValueError):
            render_text(canvas, "a?", 0, 0, 1, (255, 255, 255))

    def test_off_canvas_rejected(self):
        canvas = np.zeros((20, 20, 3), dtype=np.uint8)
        with pytest.raises(SceneInfeasible):
            render_text(canvas, "SJSB123456", 0, 0, 3, (255, 255, 255))


class TestSceneSpec:
    def test_code_property(self):
        assert basic_spec().code == "SJSB123456"

    def test_glyph_scale(self):
        assert basic_spec(text_height=21).glyph_scale == 3

    def test_anchor_must_be_in_lower_half(self):
        with pytest.raises(SceneInfeasible):
            basic_spec(text_anchor=(80, 100))

    def test_text_must_fit_inside_body(self):
        with pytest.raises(SceneInfeasible):
            basic_spec(text_anchor=(400, 200))

    def test_text_height_minimum(self):
        with pytest.raises(SceneInfeasible):
            basic_spec(text_height=5)

    def test_lowercase_prefix_rejected(self):
        with pytest.raises(ValueError):
            basic_spec(code_prefix="sjsb")

    def test_non_digit_code_rejected(self):
        with pytest.raises(ValueError):
            basic_spec(code_digits="12x456")


class TestRender:
    def test_deterministic(self):
        spec = basic_spec(noise_level=3.0, seed=11)
        frame_a, truth_a = render(spec)
        frame_b, truth_b = render(spec)
        assert np.array_equal(frame_a.pixels, frame_b.pixels)
        assert truth_a == truth_b

    def test_truth_matches_spec(self):
        spec = basic_spec()
        _, truth = render(spec)
        assert truth.detection_box == spec.body
        assert truth.code == "SJSB123456"
        w, h = text_extent("SJSB123456", spec.glyph_scale)
        assert truth.text_box.as_tuple() == (80, 200, 80 + w, 200 + h)

    def test_background_pure_outside_shapes(self):
        spec = basic_spec(noise_level=0.0)
        frame, _ = render(spec)
        # Sample corners well away from the body.
        for y, x in ((5, 5), (5, 474), (354, 5), (354, 474)):
            assert tuple(frame.pixels[y, x]) == (150, 150, 150)

    def test_body_fill_inside(self):
        spec = basic_spec(noise_level=0.0)
        frame, _ = render(spec)
        # Center of the body, above the text line.
        assert tuple(frame.pixels[120, 240]) == (60, 110, 170)

    def test_text_ink_present(self):
        spec = basic_spec(noise_level=0.0)
        frame, truth = render(spec)
        tb = truth.text_box
        patch = frame.pixels[
            int(tb.y_min) : int(tb.y_max), int(tb.x_min) : int(tb.x_max)
        ]
        assert (patch == 245).any()

    def test_noise_changes_pixels_but_not_duplicates(self):
        clean, _ = render(basic_spec(noise_level=0.0))
        noisy, _ = render(basic_spec(noise_level=4.0, seed=1))
        assert not np.array_equal(clean.pixels, noisy.pixels)

    def test_frame_index_passed_through(self):
        frame, _ = render(basic_spec(), frame_index=9)
        assert frame.frame_index == 9


class TestGenerateSuite:
    def test_count_and_distinctness(self):
        scenes = generate_suite(50, seed=0)
        assert len(scenes) == 50
        signatures = {
            (s.spec.body.as_tuple(), s.spec.code, s.spec.text_anchor)
            for s in scenes
        }
        assert len(signatures) == 50

    def test_deterministic(self):
        first = generate_suite(10, seed=4)
        second = generate_suite(10, seed=4)
        for a, b in zip(first, second):
            assert a.spec == b.spec
            assert np.array_equal(a.frame.pixels, b.frame.pixels)

    def test_different_seeds_differ(self):
        a = generate_suite(5, seed=1)
        b = generate_suite(5, seed=2)
        assert any(x.spec != y.spec for x, y in zip(a, b))

    def test_bodies_pass_aspect_gate(self):
        for scene in generate_suite(30, seed=7):
            assert aspect_gate(scene.truth.detection_box).passed

    def test_text_strictly_in_lower_half(self):
        for scene in generate_suite(30, seed=8):
            half = lower_half(scene.truth.detection_box)
            tb = scene.truth.text_box
            assert tb.y_min >= half.y_min
            assert tb.y_max <= half.y_max
            assert tb.x_min >= half.x_min
            assert tb.x_max <= half.x_max

    def test_truth_box_in_canvas(self):
        for scene in generate_suite(20, seed=9):
            box = scene.truth.detection_box
            assert box.x_min >= 0 and box.y_min >= 0
            assert box.x_max <= scene.frame.width
            assert box.y_max <= scene.frame.height

    def test_codes_valid(self):
        for scene in generate_suite(20, seed=10):
            assert scene.truth.code[:4] in ("SJSB", "SCSB")
            digits = scene.truth.code[4:]
            assert 4 <= len(digits) <= 7
            assert digits.isdigit()


class TestWriteSuite:
    def test_writes_images_and_truth(self, tmp_path):
        scenes = generate_suite(4, seed=2)
        paths = write_suite(scenes, tmp_path)
        assert len(paths) == 4
        assert all(p.exists() and p.suffix == ".png" for p in paths)
        records = parse_csv(tmp_path / "ground_truth.csv")
        assert len(records) == 4
        for scene, record in zip(scenes, records):
            assert record.filename == paths[records.index(record)].name
            ((label, box),) = record.objects
            assert label == "sb_DB"
            truth = scene.truth.detection_box
            assert abs(box.x_min - truth.x_min) <= 1
            assert abs(box.y_max - truth.y_max) <= 1

    def test_images_load_back_identically(self, tmp_path):
        import cv2

        scenes = generate_suite(2, seed=3)
        paths = write_suite(scenes, tmp_path)
        for scene, path in zip(scenes, paths):
            loaded = cv2.imread(str(path))
            assert np.array_equal(loaded, scene.frame.pixels)
