"""Text localization over ROI crops.

A text-detection backend turns a crop into a per-cell score map plus a
five-channel geometry map (four edge distances and an angle, one value
per map cell, cells spaced `stride` input pixels apart). Decoding those
maps yields rotated candidate boxes; suppression and rescaling produce
frame-space text regions.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import BackendFailure, IluScanError, MapShapeError
from .geometry import AxisAlignedBox, RotatedBox, iou, rotate_point, rotated_to_corners
from .roi import RoiCrop, region_to_frame

if TYPE_CHECKING:
    from .config import PipelineConfig

# Map cell spacing in input pixels. The detector emits one prediction per
# stride x stride input patch.
MAP_STRIDE = 4

# Geometry channel order: distances from the anchor to the box's top,
# right, bottom and left edges (measured along the box axes), then the
# rotation angle in radians.
CH_TOP, CH_RIGHT, CH_BOTTOM, CH_LEFT, CH_ANGLE = range(5)


@dataclass(frozen=True)
class EastMaps:
    """Score and geometry maps for one crop."""

    score: np.ndarray
    geometry: np.ndarray
    stride: int = MAP_STRIDE

    def __post_init__(self) -> None:
        if self.score.ndim != 2:
            raise MapShapeError(f"score map must be 2-D, got shape {self.score.shape}")
        if self.geometry.shape != (5,) + self.score.shape:
            raise MapShapeError(
                f"geometry shape {self.geometry.shape} does not match "
                f"score shape {self.score.shape}"
            )
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if self.score.size:
            lo, hi = float(self.score.min()), float(self.score.max())
            if lo < 0.0 or hi > 1.0:
                raise ValueError(f"score values outside [0, 1]: [{lo}, {hi}]")
            if float(self.geometry[:CH_ANGLE].min()) < 0.0:
                raise ValueError("edge distances must be >= 0")

    @property
    def input_width(self) -> int:
        return self.stride * self.score.shape[1]

    @property
    def input_height(self) -> int:
        return self.stride * self.score.shape[0]


@dataclass(frozen=True)
class TextRegion:
    """One suppressed text candidate.

    `rbox` lives in resized-crop coordinates; `quad` holds its four
    corners mapped into frame coordinates (top-left first, counter-
    clockwise on screen).
    """

    quad: tuple[tuple[float, float], ...]
    rbox: RotatedBox
    score: float

    def __post_init__(self) -> None:
        if len(self.quad) != 4:
            raise ValueError(f"quad needs 4 corners, got {len(self.quad)}")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")

    @property
    def frame_envelope(self) -> AxisAlignedBox:
        xs = [p[0] for p in self.quad]
        ys = [p[1] for p in self.quad]
        return AxisAlignedBox(min(xs), min(ys), max(xs), max(ys))


class TextBackend(ABC):
    """Text-detection contract: one crop in, score/geometry maps out.

    Instances must be called from at most one thread at a time.
    """

    name: str = "text-backend"

    @abstractmethod
    def compute_maps(self, pixels: np.ndarray) -> EastMaps:
        """Maps for one crop whose dimensions are multiples of 32."""


def _normalize_angle(angle: float) -> float:
    """Fold an angle into (-pi/2, pi/2]; a rectangle is pi-periodic."""
    while angle <= -math.pi / 2:
        angle += math.pi
    while angle > math.pi / 2:
        angle -= math.pi
    return angle


def decode_east(
    maps: EastMaps, score_threshold: float
) -> list[tuple[RotatedBox, float]]:
    """Turn maps into one rotated candidate per qualifying cell.

    A cell at (cx, cy) anchors the point p = (stride*cx, stride*cy); the
    geometry channels give the distances from p to the box edges along
    the box axes, so the center sits at p plus the rotated half-distance
    imbalance. Cells with degenerate extent are skipped.
    """
    if not 0.0 <= score_threshold <= 1.0:
        raise ValueError(f"score_threshold {score_threshold} outside [0, 1]")
    out: list[tuple[RotatedBox, float]] = []
    ys, xs = np.nonzero(maps.score >= score_threshold)
    for cy, cx in zip(ys.tolist(), xs.tolist()):
        d_top, d_right, d_bottom, d_left, angle = (
            float(maps.geometry[ch, cy, cx]) for ch in range(5)
        )
        width = d_left + d_right
        height = d_top + d_bottom
        if width <= 0.0 or height <= 0.0:
            continue
        px, py = float(maps.stride * cx), float(maps.stride * cy)
        center_x, center_y = rotate_point(
            px + (d_right - d_left) / 2.0,
            py + (d_bottom - d_top) / 2.0,
            px,
            py,
            angle,
        )
        box = RotatedBox(center_x, center_y, width, height, _normalize_angle(angle))
        out.append((box, float(maps.score[cy, cx])))
    return out


def envelope(rbox: RotatedBox) -> AxisAlignedBox:
    """Axis-aligned bounding box of a rotated box."""
    corners = rotated_to_corners(rbox)
    xs = [p[0] for p in corners]
    ys = [p[1] for p in corners]
    return AxisAlignedBox(min(xs), min(ys), max(xs), max(ys))


def suppress_text(
    cands: Sequence[tuple[RotatedBox, float]], iou_threshold: float
) -> list[tuple[RotatedBox, float]]:
    """Greedy NMS on the candidates' axis-aligned envelopes.

    Visit order: descending score, ties by smaller envelope x_min then
    y_min; a candidate survives iff its envelope IoU with every kept
    envelope stays below the threshold.
    """
    if not 0.0 <= iou_threshold <= 1.0:
        raise ValueError(f"iou_threshold {iou_threshold} outside [0, 1]")
    boxed = [(rbox, score, envelope(rbox)) for rbox, score in cands]
    boxed.sort(key=lambda t: (-t[1], t[2].x_min, t[2].y_min))
    kept: list[tuple[RotatedBox, float, AxisAlignedBox]] = []
    for rbox, score, env in boxed:
        if all(iou(env, k_env) < iou_threshold for _, _, k_env in kept):
            kept.append((rbox, score, env))
    return [(rbox, score) for rbox, score, _ in kept]


def detect_text(
    backend: TextBackend, crop: RoiCrop, cfg: "PipelineConfig"
) -> list[TextRegion]:
    """Localize text in one crop and map the results to frame space."""
    try:
        maps = backend.compute_maps(crop.pixels)
    except IluScanError:
        raise
    except Exception as exc:
        raise BackendFailure(f"{backend.name}: {exc}") from exc
    if (maps.input_width, maps.input_height) != (crop.width, crop.height):
        raise MapShapeError(
            f"{backend.name}: maps cover {maps.input_width}x{maps.input_height} "
            f"but the crop is {crop.width}x{crop.height}"
        )
    cands = decode_east(maps, cfg.text_score_threshold)
    kept = suppress_text(cands, cfg.text_nms_iou)
    regions = []
    for rbox, score in kept:
        quad = tuple(
            region_to_frame(x, y, crop) for x, y in rotated_to_corners(rbox)
        )
        regions.append(TextRegion(quad, rbox, score))
    return regions


def east_maps_from_regions(
    width: int,
    height: int,
    regions: Sequence[tuple[RotatedBox, float]] = (),
    stride: int = MAP_STRIDE,
) -> EastMaps:
    """Build maps that decode back to the given boxes.

    Every cell whose anchor falls inside a box gets that box's geometry
    (later regions overwrite earlier ones where they overlap). Used by
    scripted backends and the synthetic-scene generator.
    """
    if width % stride or height % stride:
        raise MapShapeError(
            f"input {width}x{height} not a multiple of stride {stride}"
        )
    map_w, map_h = width // stride, height // stride
    score = np.zeros((map_h, map_w), dtype=np.float64)
    geometry = np.zeros((5, map_h, map_w), dtype=np.float64)
    for rbox, region_score in regions:
        if not 0.0 <= region_score <= 1.0:
            raise ValueError(f"region score {region_score} outside [0, 1]")
        env = envelope(rbox)
        cx_lo = max(0, int(math.floor(env.x_min / stride)))
        cx_hi = min(map_w - 1, int(math.ceil(env.x_max / stride)))
        cy_lo = max(0, int(math.floor(env.y_min / stride)))
        cy_hi = min(map_h - 1, int(math.ceil(env.y_max / stride)))
        hw, hh = rbox.width / 2.0, rbox.height / 2.0
        covered = 0
        for cy in range(cy_lo, cy_hi + 1):
            for cx in range(cx_lo, cx_hi + 1):
                px, py = float(stride * cx), float(stride * cy)
                # Anchor position in the box's own axes.
                gx, gy = rotate_point(
                    px, py, rbox.center_x, rbox.center_y, -rbox.angle
                )
                lx, ly = gx - rbox.center_x, gy - rbox.center_y
                if abs(lx) >= hw or abs(ly) >= hh:
                    continue
                geometry[CH_TOP, cy, cx] = hh + ly
                geometry[CH_RIGHT, cy, cx] = hw - lx
                geometry[CH_BOTTOM, cy, cx] = hh - ly
                geometry[CH_LEFT, cy, cx] = hw + lx
                geometry[CH_ANGLE, cy, cx] = rbox.angle
                score[cy, cx] = region_score
                covered += 1
        if not covered:
            raise ValueError(
                f"box at ({rbox.center_x}, {rbox.center_y}) covers no map cell"
            )
    return EastMaps(score, geometry, stride)


@dataclass
class StubTextDetector(TextBackend):
    """Scripted text backend.

    Returns `maps` verbatim when given, otherwise synthesizes maps that
    decode to `regions` (resized-crop coordinates).
    """

    maps: EastMaps | None = None
    regions: Sequence[tuple[RotatedBox, float]] = field(default_factory=tuple)
    name: str = "stub-text"

    def compute_maps(self, pixels: np.ndarray) -> EastMaps:
        if self.maps is not None:
            return self.maps
        h, w = pixels.shape[:2]
        return east_maps_from_regions(w, h, self.regions)


@dataclass
class FullCropTextDetector(TextBackend):
    """Deterministic backend that treats the whole crop as one text line.

    It synthesizes maps for a single axis-aligned box covering the crop
    minus a small inset, so decode and suppression still run for real.
    Useful when the code is known to fill the ROI, and for end-to-end
    runs without a trained model.
    """

    inset: int = 4
    score: float = 0.9
    name: str = "full-crop-text"

    def compute_maps(self, pixels: np.ndarray) -> EastMaps:
        h, w = pixels.shape[:2]
        inset = min(self.inset, (min(w, h) - MAP_STRIDE) // 2)
        inset = max(inset, 0)
        box = RotatedBox(w / 2.0, h / 2.0, w - 2 * inset, h - 2 * inset, 0.0)
        return east_maps_from_regions(w, h, [(box, self.score)])


class OpenCvEastDetector(TextBackend):
    """Adapter for a frozen EAST graph run through OpenCV's dnn module.

    Optional at runtime: requires the model file. The test suite never
    needs it.
    """

    _SCORE_LAYER = "feature_fusion/Conv_7/Sigmoid"
    _GEOMETRY_LAYER = "feature_fusion/concat_3"

    def __init__(self, model_path: str | Path, name: str = "opencv-east"):
        import cv2

        model_path = Path(model_path)
        if not model_path.exists():
            raise BackendFailure(f"model file not found: {model_path}")
        try:
            self._net = cv2.dnn.readNet(str(model_path))
        except cv2.error as exc:
            raise BackendFailure(f"could not load {model_path}: {exc}") from exc
        self._cv2 = cv2
        self.name = name

    def compute_maps(self, pixels: np.ndarray) -> EastMaps:
        from .errors import InputShapeError

        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise InputShapeError(f"{self.name}: expected a 3-channel crop")
        h, w = pixels.shape[:2]
        cv2 = self._cv2
        blob = cv2.dnn.blobFromImage(
            pixels, 1.0, (w, h), (123.68, 116.78, 103.94), swapRB=True, crop=False
        )
        try:
            self._net.setInput(blob)
            scores, geometry = self._net.forward(
                [self._SCORE_LAYER, self._GEOMETRY_LAYER]
            )
        except cv2.error as exc:
            raise BackendFailure(f"{self.name}: {exc}") from exc
        score = np.clip(scores[0, 0].astype(np.float64), 0.0, 1.0)
        geo = geometry[0].astype(np.float64)
        geo[:CH_ANGLE] = np.maximum(geo[:CH_ANGLE], 0.0)
        return EastMaps(score, geo)
