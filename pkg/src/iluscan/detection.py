"""Detector backend contract, label maps, score filtering and NMS."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .errors import BackendFailure, DuplicateId, EmptyBox, IluScanError, ParseError
from .geometry import AxisAlignedBox, Detection, Frame, clip_box, iou

# Single object class used throughout the swap-body pipeline.
SWAP_BODY_LABEL = "sb_DB"


@dataclass(frozen=True)
class LabelMap:
    """Mapping from positive integer class ids to unique class names."""

    entries: Mapping[int, str]

    def __post_init__(self) -> None:
        names = set()
        for class_id, name in self.entries.items():
            if class_id < 1:
                raise ValueError(f"class id {class_id} must be >= 1")
            if not name:
                raise ValueError(f"class id {class_id} has an empty name")
            if name in names:
                raise ValueError(f"class name {name!r} appears twice")
            names.add(name)
        object.__setattr__(self, "entries", dict(self.entries))

    def name_for(self, class_id: int) -> str:
        return self.entries[class_id]

    @property
    def names(self) -> frozenset[str]:
        return frozenset(self.entries.values())

    def __len__(self) -> int:
        return len(self.entries)


def load_label_map(path: str | Path) -> LabelMap:
    """Parse a label-map file: one ``<id> <name>`` per line.

    Lines starting with ``#`` and blank lines are ignored.
    """
    entries: dict[int, str] = {}
    names: set[str] = set()
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        where = f"{path}:{lineno}"
        id_part, sep, name = line.partition(" ")
        if not sep or not name or name != name.strip() or " " in name:
            raise ParseError(f"expected '<id> <name>', got {line!r}", where)
        try:
            class_id = int(id_part)
        except ValueError:
            raise ParseError(f"bad class id {id_part!r}", where) from None
        if class_id < 1:
            raise ParseError(f"class id must be >= 1, got {class_id}", where)
        if class_id in entries:
            raise DuplicateId(f"class id {class_id} already defined", where)
        if name in names:
            raise ParseError(f"class name {name!r} already defined", where)
        entries[class_id] = name
        names.add(name)
    return LabelMap(entries)


class DetectorBackend(ABC):
    """Object-detector contract.

    `detect` must be deterministic for a fixed backend state and input.
    An instance must be called from at most one thread at a time.
    """

    name: str = "backend"
    expected_input: tuple[int, int] | None = None
    label_map: LabelMap | None = None

    @abstractmethod
    def detect(self, frame: Frame) -> list[Detection]:
        """Raw detections for one frame, in backend-native order."""


@dataclass
class StubDetector(DetectorBackend):
    """Scripted backend: returns pre-set detections keyed by frame_index."""

    script: Mapping[int, Sequence[Detection]] = field(default_factory=dict)
    label_map: LabelMap | None = None
    name: str = "stub"

    def detect(self, frame: Frame) -> list[Detection]:
        return list(self.script.get(frame.frame_index, ()))


def infer(backend: DetectorBackend, frame: Frame) -> list[Detection]:
    """Run a backend on one frame and sanitize its output.

    Boxes are clipped to the frame (detections entirely outside are
    dropped) and labels are checked against the backend's label map.
    """
    try:
        raw = backend.detect(frame)
    except IluScanError:
        raise
    except Exception as exc:
        raise BackendFailure(f"{backend.name}: {exc}") from exc
    out: list[Detection] = []
    for det in raw:
        if backend.label_map is not None and det.label not in backend.label_map.names:
            raise BackendFailure(
                f"{backend.name}: label {det.label!r} not in its label map"
            )
        try:
            box = clip_box(det.box, frame.width, frame.height)
        except EmptyBox:
            continue
        out.append(det if box is det.box else Detection(box, det.label, det.score))
    return out


def filter_by_score(dets: Sequence[Detection], min_score: float) -> list[Detection]:
    """Order-preserving subset with score >= min_score."""
    if not 0.0 <= min_score <= 1.0:
        raise ValueError(f"min_score {min_score} outside [0, 1]")
    return [d for d in dets if d.score >= min_score]


def greedy_nms(dets: Sequence[Detection], iou_threshold: float) -> list[Detection]:
    """Greedy non-maximum suppression within each label.

    Candidates are visited in descending score (ties broken by smaller
    x_min, then smaller y_min); one is kept iff its IoU with every
    already-kept detection of the same label stays below the threshold.
    """
    if not 0.0 <= iou_threshold <= 1.0:
        raise ValueError(f"iou_threshold {iou_threshold} outside [0, 1]")
    ordered = sorted(dets, key=lambda d: (-d.score, d.box.x_min, d.box.y_min))
    kept: list[Detection] = []
    for det in ordered:
        if all(
            k.label != det.label or iou(det.box, k.box) < iou_threshold for k in kept
        ):
            kept.append(det)
    return kept


class OpenCvSsdDetector(DetectorBackend):
    """Adapter for an exported SSD graph run through OpenCV's dnn module.

    Optional at runtime: requires a frozen graph file. The test suite never
    needs it; everything is exercised through StubDetector.
    """

    def __init__(
        self,
        model_path: str | Path,
        config_path: str | Path | None = None,
        label_map: LabelMap | None = None,
        name: str = "opencv-ssd",
    ):
        import cv2

        model_path = Path(model_path)
        if not model_path.exists():
            raise BackendFailure(f"model file not found: {model_path}")
        try:
            if config_path is not None:
                self._net = cv2.dnn.readNetFromTensorflow(
                    str(model_path), str(config_path)
                )
            else:
                self._net = cv2.dnn.readNet(str(model_path))
        except cv2.error as exc:
            raise BackendFailure(f"could not load {model_path}: {exc}") from exc
        self._cv2 = cv2
        self.name = name
        self.label_map = label_map
        self.expected_input = (300, 300)

    def detect(self, frame: Frame) -> list[Detection]:
        from .errors import InputShapeError

        if frame.channels != 3:
            raise InputShapeError(f"{self.name}: expected a 3-channel frame")
        cv2 = self._cv2
        blob = cv2.dnn.blobFromImage(
            frame.pixels, size=self.expected_input, swapRB=True, crop=False
        )
        try:
            self._net.setInput(blob)
            raw = self._net.forward()
        except cv2.error as exc:
            raise BackendFailure(f"{self.name}: {exc}") from exc
        dets: list[Detection] = []
        for row in raw[0, 0]:
            score = float(row[2])
            if score <= 0.0:
                continue
            class_id = int(row[1])
            if self.label_map is not None and class_id in self.label_map.entries:
                label = self.label_map.name_for(class_id)
            else:
                label = str(class_id)
            x_min = float(row[3]) * frame.width
            y_min = float(row[4]) * frame.height
            x_max = float(row[5]) * frame.width
            y_max = float(row[6]) * frame.height
            if x_min >= x_max or y_min >= y_max:
                continue
            dets.append(
                Detection(
                    AxisAlignedBox(x_min, y_min, x_max, y_max),
                    label,
                    min(score, 1.0),
                )
            )
        return dets
