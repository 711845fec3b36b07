"""Geometry primitives and pixel-space operations shared by all stages.

Coordinates are real-valued pixels with the origin at the image's top-left
corner and y growing downward. Boxes are half-open: (0, 0, 10, 10) covers
ten pixel columns and ten pixel rows. Rounding to integer pixels happens
only at crop time, never here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyBox


@dataclass(frozen=True)
class AxisAlignedBox:
    """Axis-aligned rectangle in pixel coordinates."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate box {self.as_tuple()}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def as_tuple(self) -> tuple[float, float, float, float]:
        return self.x_min, self.y_min, self.x_max, self.y_max


@dataclass(frozen=True)
class Detection:
    """Scored, labeled box emitted by a detector backend."""

    box: AxisAlignedBox
    label: str
    score: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")
        if not self.label:
            raise ValueError("label must be non-empty")


@dataclass(frozen=True)
class RotatedBox:
    """Rectangle given by center, extents and rotation angle.

    The angle is in radians, counter-clockwise positive as seen on screen
    (y pointing down), restricted to (-pi/2, pi/2].
    """

    center_x: float
    center_y: float
    width: float
    height: float
    angle: float

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"non-positive extent {self.width}x{self.height}")
        if not -math.pi / 2 < self.angle <= math.pi / 2:
            raise ValueError(f"angle {self.angle} outside (-pi/2, pi/2]")


@dataclass(frozen=True, eq=False)
class Frame:
    """Decoded image buffer plus sequence metadata.

    `pixels` is uint8 with shape (height, width) for single-channel frames
    and (height, width, 3) for color; color frames are BGR channel order.
    """

    pixels: np.ndarray
    width: int
    height: int
    channels: int
    frame_index: int = 0
    timestamp_ms: float | None = None
    source: str | None = None

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"bad frame size {self.width}x{self.height}")
        if self.channels not in (1, 3):
            raise ValueError(f"unsupported channel count {self.channels}")
        if self.frame_index < 0:
            raise ValueError("frame_index must be >= 0")
        if self.pixels.dtype != np.uint8:
            raise ValueError(f"expected uint8 pixels, got {self.pixels.dtype}")
        if self.pixels.size != self.width * self.height * self.channels:
            raise ValueError("pixel buffer does not match declared dimensions")

    @classmethod
    def from_array(
        cls,
        pixels: np.ndarray,
        frame_index: int = 0,
        timestamp_ms: float | None = None,
        source: str | None = None,
    ) -> "Frame":
        """Wrap an (H, W) or (H, W, 3) uint8 array as a Frame."""
        arr = np.ascontiguousarray(pixels)
        if arr.ndim == 2:
            channels = 1
        elif arr.ndim == 3 and arr.shape[2] in (1, 3):
            channels = arr.shape[2]
            if channels == 1:
                arr = arr[:, :, 0]
        else:
            raise ValueError(f"unsupported pixel array shape {arr.shape}")
        return cls(
            pixels=arr,
            width=arr.shape[1],
            height=arr.shape[0],
            channels=channels,
            frame_index=frame_index,
            timestamp_ms=timestamp_ms,
            source=source,
        )


def iou(a: AxisAlignedBox, b: AxisAlignedBox) -> float:
    """Intersection over union of two boxes; 0.0 when disjoint."""
    inter_w = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    inter_h = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if inter_w <= 0 or inter_h <= 0:
        return 0.0
    inter = inter_w * inter_h
    return inter / (a.area + b.area - inter)


def clip_box(b: AxisAlignedBox, frame_w: float, frame_h: float) -> AxisAlignedBox:
    """Clamp a box to [0, frame_w] x [0, frame_h].

    Raises EmptyBox when nothing remains inside the frame.
    """
    x_min = max(b.x_min, 0.0)
    y_min = max(b.y_min, 0.0)
    x_max = min(b.x_max, float(frame_w))
    y_max = min(b.y_max, float(frame_h))
    if x_min >= x_max or y_min >= y_max:
        raise EmptyBox(f"box {b.as_tuple()} clipped to nothing in {frame_w}x{frame_h}")
    if (x_min, y_min, x_max, y_max) == b.as_tuple():
        return b
    return AxisAlignedBox(x_min, y_min, x_max, y_max)


def intersect_box(a: AxisAlignedBox, b: AxisAlignedBox) -> AxisAlignedBox:
    """Intersection of two boxes; raises EmptyBox when disjoint."""
    x_min = max(a.x_min, b.x_min)
    y_min = max(a.y_min, b.y_min)
    x_max = min(a.x_max, b.x_max)
    y_max = min(a.y_max, b.y_max)
    if x_min >= x_max or y_min >= y_max:
        raise EmptyBox(f"boxes {a.as_tuple()} and {b.as_tuple()} do not intersect")
    return AxisAlignedBox(x_min, y_min, x_max, y_max)


def rotate_point(
    x: float, y: float, cx: float, cy: float, angle: float
) -> tuple[float, float]:
    """Rotate (x, y) about (cx, cy); positive angle is counter-clockwise on
    screen, i.e. in y-down pixel coordinates."""
    dx = x - cx
    dy = y - cy
    cos_a = math.cos(angle)
    sin_a = math.sin(angle)
    return cx + cos_a * dx + sin_a * dy, cy - sin_a * dx + cos_a * dy


def rotated_to_corners(
    r: RotatedBox,
) -> tuple[tuple[float, float], tuple[float, float], tuple[float, float], tuple[float, float]]:
    """Corner points of a rotated box.

    Order is top-left first at angle 0, then counter-clockwise on screen:
    top-left, bottom-left, bottom-right, top-right.
    """
    hw = r.width / 2.0
    hh = r.height / 2.0
    local = ((-hw, -hh), (-hw, hh), (hw, hh), (hw, -hh))
    return tuple(  # type: ignore[return-value]
        rotate_point(r.center_x + lx, r.center_y + ly, r.center_x, r.center_y, r.angle)
        for lx, ly in local
    )
