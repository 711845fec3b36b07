"""Region-of-interest gating and cropping ahead of text detection.

ILU codes sit on the lower part of a swap body, so detections are cut to
their lower half, filtered by aspect ratio, and resized to dimensions the
text detector accepts (multiples of 32).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import cv2
import numpy as np

from .geometry import AxisAlignedBox, Frame, clip_box


@dataclass(frozen=True)
class RoiCrop:
    """A cropped, resized view of a frame region.

    `region` holds the integer pixel bounds actually cut from the frame;
    `scale_x`/`scale_y` map resized-crop coordinates back to crop pixels.
    """

    region: AxisAlignedBox
    pixels: np.ndarray
    scale_x: float
    scale_y: float

    def __post_init__(self) -> None:
        if self.scale_x <= 0 or self.scale_y <= 0:
            raise ValueError("scale factors must be positive")

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])


@dataclass(frozen=True)
class AspectDecision:
    """Outcome of the aspect-ratio gate, with the measured ratio."""

    passed: bool
    ratio: float


def lower_half(box: AxisAlignedBox) -> AxisAlignedBox:
    """The bottom half of a box: same x-extent, top edge at the y midpoint."""
    return AxisAlignedBox(
        box.x_min, (box.y_min + box.y_max) / 2.0, box.x_max, box.y_max
    )


def aspect_gate(box: AxisAlignedBox, min_ratio: float = 1.5) -> AspectDecision:
    """Pass boxes at least `min_ratio` times wider than tall (inclusive)."""
    if min_ratio <= 0:
        raise ValueError(f"min_ratio must be positive, got {min_ratio}")
    ratio = box.width / box.height
    return AspectDecision(ratio >= min_ratio, ratio)


def size_to_multiple_of_32(w: int, h: int) -> tuple[int, int]:
    """Round both dimensions down to multiples of 32, never below 32."""
    if w < 1 or h < 1:
        raise ValueError(f"dimensions must be >= 1, got {w}x{h}")
    return max(32, 32 * (w // 32)), max(32, 32 * (h // 32))


def crop_and_resize(
    frame: Frame, region: AxisAlignedBox, max_side: int | None = None
) -> RoiCrop:
    """Cut `region` out of `frame` and resize it for text detection.

    The region is clipped to the frame, rounded outward to whole pixels
    (floor on the min corner, ceil on the max), then resized to the
    multiple-of-32 shape; `max_side` optionally caps the longer resized
    dimension, preserving the multiple-of-32 guarantee.
    """
    clipped = clip_box(region, frame.width, frame.height)
    x0 = int(math.floor(clipped.x_min))
    y0 = int(math.floor(clipped.y_min))
    x1 = min(int(math.ceil(clipped.x_max)), frame.width)
    y1 = min(int(math.ceil(clipped.y_max)), frame.height)
    crop = frame.pixels[y0:y1, x0:x1]
    crop_w, crop_h = x1 - x0, y1 - y0
    w32, h32 = size_to_multiple_of_32(crop_w, crop_h)
    if max_side is not None and max(w32, h32) > max_side:
        shrink = max_side / max(w32, h32)
        w32, h32 = size_to_multiple_of_32(
            max(32, int(w32 * shrink)), max(32, int(h32 * shrink))
        )
    if (w32, h32) != (crop_w, crop_h):
        resized = cv2.resize(crop, (w32, h32), interpolation=cv2.INTER_LINEAR)
    else:
        resized = crop.copy()
    return RoiCrop(
        region=AxisAlignedBox(x0, y0, x1, y1),
        pixels=resized,
        scale_x=crop_w / w32,
        scale_y=crop_h / h32,
    )


def region_to_frame(x: float, y: float, crop: RoiCrop) -> tuple[float, float]:
    """Map a resized-crop point back into frame coordinates."""
    return (
        crop.region.x_min + x * crop.scale_x,
        crop.region.y_min + y * crop.scale_y,
    )


def box_to_frame(box: AxisAlignedBox, crop: RoiCrop) -> AxisAlignedBox:
    """Map a resized-crop box back into frame coordinates."""
    x0, y0 = region_to_frame(box.x_min, box.y_min, crop)
    x1, y1 = region_to_frame(box.x_max, box.y_max, crop)
    return AxisAlignedBox(x0, y0, x1, y1)
