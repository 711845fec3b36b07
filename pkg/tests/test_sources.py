import cv2
import numpy as np
import pytest

from iluscan import (
    Frame,
    ImageDirectorySource,
    ImageFileSource,
    ListSource,
    generate_suite,
    open_source,
    write_suite,
)


class TestListSource:
    def test_yields_frames_in_order(self):
        frames = [
            Frame.from_array(np.zeros((4, 4, 3), dtype=np.uint8), i) for i in range(3)
        ]
        assert list(ListSource(frames)) == frames


class TestImageFileSource:
    def test_reads_one_frame(self, tmp_path):
        scene = generate_suite(1, seed=1)[0]
        path = tmp_path / "one.png"
        cv2.imwrite(str(path), scene.frame.pixels)
        (frame,) = list(ImageFileSource(path))
        assert np.array_equal(frame.pixels, scene.frame.pixels)
        assert frame.frame_index == 0
        assert frame.source == "one.png"

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            list(ImageFileSource(tmp_path / "missing.png"))


class TestImageDirectorySource:
    def test_sorted_with_increasing_indices(self, tmp_path):
        scenes = generate_suite(3, seed=2)
        write_suite(scenes, tmp_path)
        frames = list(ImageDirectorySource(tmp_path))
        assert len(frames) == 3
        assert [f.frame_index for f in frames] == [0, 1, 2]
        assert [f.source for f in frames] == sorted(f.source for f in frames)

    def test_empty_directory(self, tmp_path):
        with pytest.raises(OSError):
            list(ImageDirectorySource(tmp_path))


class TestOpenSource:
    def test_dispatches_directory(self, tmp_path):
        write_suite(generate_suite(2, seed=3), tmp_path)
        source = open_source(tmp_path)
        assert isinstance(source, ImageDirectorySource)

    def test_dispatches_image(self, tmp_path):
        scene = generate_suite(1, seed=4)[0]
        path = tmp_path / "img.png"
        cv2.imwrite(str(path), scene.frame.pixels)
        assert isinstance(open_source(path), ImageFileSource)

    def test_missing_path_raises_on_iteration(self, tmp_path):
        # Sources are lazy; the failure surfaces when frames are pulled.
        with pytest.raises(OSError):
            list(open_source(tmp_path / "ghost.mp4"))
