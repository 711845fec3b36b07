"""Frame sources: where pipeline input comes from.

Each source yields Frame objects with consecutive frame indices. Video
decoding is delegated to OpenCV; tests use the in-memory list source.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Iterator, Sequence

import cv2

from .geometry import Frame

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")


class FrameSource(ABC):
    """An ordered, single-pass stream of frames."""

    @abstractmethod
    def __iter__(self) -> Iterator[Frame]: ...


class ListSource(FrameSource):
    """Wraps pre-built frames; the stub source for tests."""

    def __init__(self, frames: Sequence[Frame]):
        self._frames = list(frames)

    def __iter__(self) -> Iterator[Frame]:
        return iter(self._frames)


class ImageFileSource(FrameSource):
    """A single image file as a one-frame stream."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def __iter__(self) -> Iterator[Frame]:
        pixels = cv2.imread(str(self.path), cv2.IMREAD_COLOR)
        if pixels is None:
            raise OSError(f"could not read image: {self.path}")
        yield Frame.from_array(pixels, frame_index=0, source=self.path.name)


class ImageDirectorySource(FrameSource):
    """All images in a directory, in sorted filename order."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    def __iter__(self) -> Iterator[Frame]:
        if not self.directory.is_dir():
            raise OSError(f"not a directory: {self.directory}")
        paths = sorted(
            p
            for p in self.directory.iterdir()
            if p.suffix.lower() in IMAGE_SUFFIXES
        )
        if not paths:
            raise OSError(f"no images found in {self.directory}")
        for index, path in enumerate(paths):
            pixels = cv2.imread(str(path), cv2.IMREAD_COLOR)
            if pixels is None:
                raise OSError(f"could not read image: {path}")
            yield Frame.from_array(pixels, frame_index=index, source=path.name)


class VideoFileSource(FrameSource):
    """Frames decoded from a video container."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def __iter__(self) -> Iterator[Frame]:
        capture = cv2.VideoCapture(str(self.path))
        if not capture.isOpened():
            capture.release()
            raise OSError(f"could not open video: {self.path}")
        try:
            index = 0
            while True:
                ok, pixels = capture.read()
                if not ok:
                    break
                timestamp = float(capture.get(cv2.CAP_PROP_POS_MSEC))
                yield Frame.from_array(
                    pixels,
                    frame_index=index,
                    timestamp_ms=timestamp,
                    source=self.path.name,
                )
                index += 1
        finally:
            capture.release()


def open_source(path: str | Path) -> FrameSource:
    """Pick a source type from a path: directory, image file, or video."""
    path = Path(path)
    if path.is_dir():
        return ImageDirectorySource(path)
    if path.suffix.lower() in IMAGE_SUFFIXES:
        return ImageFileSource(path)
    return VideoFileSource(path)
