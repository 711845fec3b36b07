"""Dataset workflow: annotation parsing, CSV interchange, splitting,
augmentation and training-config emission.

The CSV format (`filename,width,height,class,xmin,ymin,xmax,ymax`,
integer coordinates) is the interchange terminus; converting onward
into a training framework's binary record format is somebody else's
job and documented as such.
"""

from __future__ import annotations

import csv
import random
import warnings
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

import cv2
import numpy as np
import yaml

from .errors import EmptyBox, MissingField, ParseError
from .geometry import AxisAlignedBox, Frame, clip_box, intersect_box

CSV_HEADER = ("filename", "width", "height", "class", "xmin", "ymin", "xmax", "ymax")


@dataclass(frozen=True)
class AnnotationRecord:
    """One image's annotation: dimensions plus labeled boxes."""

    filename: str
    width: int
    height: int
    objects: tuple[tuple[str, AxisAlignedBox], ...] = ()

    def __post_init__(self) -> None:
        if not self.filename:
            raise ValueError("filename must be non-empty")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"bad image size {self.width}x{self.height}")
        object.__setattr__(self, "objects", tuple(self.objects))
        for label, box in self.objects:
            if not label:
                raise ValueError(f"{self.filename}: empty object label")
            if (
                box.x_min < 0
                or box.y_min < 0
                or box.x_max > self.width
                or box.y_max > self.height
            ):
                raise ValueError(
                    f"{self.filename}: box {box.as_tuple()} outside "
                    f"{self.width}x{self.height}"
                )


def _child_text(parent: ET.Element, tag: str, path: str) -> str:
    child = parent.find(tag)
    if child is None:
        raise MissingField(tag, path)
    if child.text is None or not child.text.strip():
        raise ParseError(f"empty element {tag!r}", path)
    return child.text.strip()


def _child_number(parent: ET.Element, tag: str, path: str) -> float:
    text = _child_text(parent, tag, path)
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"{tag} is not a number: {text!r}", path) from None


def parse_annotation(path: str | Path) -> AnnotationRecord:
    """Parse one PascalVOC-style annotation document.

    Out-of-bounds boxes are clipped to the image with a warning; a box
    entirely outside, or inverted, is a ParseError.
    """
    path = Path(path)
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as exc:
        raise ParseError(f"not well-formed XML: {exc}", str(path)) from None
    filename = _child_text(root, "filename", f"{path}:annotation")
    size = root.find("size")
    if size is None:
        raise MissingField("size", f"{path}:annotation")
    width = int(_child_number(size, "width", f"{path}:annotation/size"))
    height = int(_child_number(size, "height", f"{path}:annotation/size"))
    if width < 1 or height < 1:
        raise ParseError(
            f"bad image size {width}x{height}", f"{path}:annotation/size"
        )
    objects: list[tuple[str, AxisAlignedBox]] = []
    for i, obj in enumerate(root.findall("object"), start=1):
        obj_path = f"{path}:annotation/object[{i}]"
        label = _child_text(obj, "name", obj_path)
        bndbox = obj.find("bndbox")
        if bndbox is None:
            raise MissingField("bndbox", obj_path)
        box_path = f"{obj_path}/bndbox"
        x_min = _child_number(bndbox, "xmin", box_path)
        y_min = _child_number(bndbox, "ymin", box_path)
        x_max = _child_number(bndbox, "xmax", box_path)
        y_max = _child_number(bndbox, "ymax", box_path)
        if x_min >= x_max or y_min >= y_max:
            raise ParseError(
                f"degenerate box ({x_min}, {y_min}, {x_max}, {y_max})", box_path
            )
        box = AxisAlignedBox(x_min, y_min, x_max, y_max)
        try:
            clipped = clip_box(box, width, height)
        except EmptyBox:
            raise ParseError(
                f"box {box.as_tuple()} lies outside the {width}x{height} image",
                box_path,
            ) from None
        if clipped is not box:
            warnings.warn(
                f"{box_path}: box {box.as_tuple()} clipped to image bounds",
                stacklevel=2,
            )
        objects.append((label, clipped))
    return AnnotationRecord(filename, width, height, tuple(objects))


def annotations_to_csv(
    records: Sequence[AnnotationRecord], out_path: str | Path
) -> int:
    """Write one CSV row per object; returns the data-row count.

    Rows are ordered by filename, then by object order within a record;
    coordinates are rounded to integers.
    """
    rows = 0
    with open(out_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        for record in sorted(records, key=lambda r: r.filename):
            for label, box in record.objects:
                writer.writerow(
                    [
                        record.filename,
                        record.width,
                        record.height,
                        label,
                        int(round(box.x_min)),
                        int(round(box.y_min)),
                        int(round(box.x_max)),
                        int(round(box.y_max)),
                    ]
                )
                rows += 1
    return rows


def parse_csv(path: str | Path) -> list[AnnotationRecord]:
    """Read annotation records back from the CSV format.

    Rows for the same filename must agree on image size; records come
    back in first-appearance order. Images without objects cannot be
    represented in this format, so none come back.
    """
    path = Path(path)
    grouped: dict[str, AnnotationRecord] = {}
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file, expected a header row", str(path)) from None
        if tuple(header) != CSV_HEADER:
            raise ParseError(
                f"bad header {header!r}, expected {','.join(CSV_HEADER)}", str(path)
            )
        for lineno, row in enumerate(reader, start=2):
            where = f"{path}:{lineno}"
            if len(row) != len(CSV_HEADER):
                raise ParseError(f"expected {len(CSV_HEADER)} columns", where)
            filename, w_s, h_s, label, *coords = row
            try:
                width, height = int(w_s), int(h_s)
                x_min, y_min, x_max, y_max = (int(c) for c in coords)
            except ValueError:
                raise ParseError(f"non-integer numeric column in {row!r}", where) from None
            if x_min >= x_max or y_min >= y_max:
                raise ParseError(f"degenerate box in {row!r}", where)
            obj = (label, AxisAlignedBox(x_min, y_min, x_max, y_max))
            if filename in grouped:
                previous = grouped[filename]
                if (previous.width, previous.height) != (width, height):
                    raise ParseError(
                        f"conflicting sizes for {filename!r}", where
                    )
                grouped[filename] = AnnotationRecord(
                    filename, width, height, previous.objects + (obj,)
                )
            else:
                grouped[filename] = AnnotationRecord(filename, width, height, (obj,))
    return list(grouped.values())


def split_dataset(
    records: Sequence[AnnotationRecord], train_fraction: float = 0.8, *, seed: int
) -> tuple[list[AnnotationRecord], list[AnnotationRecord]]:
    """Shuffle deterministically and cut into train/test.

    Train size is round(n * train_fraction); the two parts are disjoint
    and together contain every input record.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction {train_fraction} outside (0, 1)")
    shuffled = list(records)
    random.Random(seed).shuffle(shuffled)
    n_train = round(len(shuffled) * train_fraction)
    return shuffled[:n_train], shuffled[n_train:]


class AugmentationKind(Enum):
    RANDOM_CROP = "random_crop"
    BRIGHTNESS = "brightness"
    CONTRAST = "contrast"
    HUE = "hue"
    SATURATION = "saturation"


# Per-kind parameter names, default values, and hard bounds. Range
# parameters are (lo, hi) pairs; keep_area is a plain fraction.
_PARAM_SCHEMA: dict[AugmentationKind, dict[str, tuple]] = {
    AugmentationKind.BRIGHTNESS: {"delta": ((-32.0, 32.0), (-255.0, 255.0))},
    AugmentationKind.CONTRAST: {"factor": ((0.5, 1.5), (0.0, 10.0))},
    AugmentationKind.HUE: {"delta": ((-18.0, 18.0), (-360.0, 360.0))},
    AugmentationKind.SATURATION: {"factor": ((0.5, 1.5), (0.0, 10.0))},
    AugmentationKind.RANDOM_CROP: {
        "scale": ((0.6, 1.0), (0.05, 1.0)),
        "keep_area": (0.25, (0.0, 1.0)),
    },
}


@dataclass(frozen=True)
class AugmentationSpec:
    """One augmentation to apply: a kind, its parameters, and a seed.

    Range parameters accept a scalar (fixed value) or a (lo, hi) pair;
    either way they are stored normalized as pairs.
    """

    kind: AugmentationKind
    params: Mapping[str, object] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self) -> None:
        schema = _PARAM_SCHEMA[self.kind]
        unknown = set(self.params) - set(schema)
        if unknown:
            raise ValueError(
                f"{self.kind.value}: unknown parameter(s) "
                f"{', '.join(sorted(unknown))}"
            )
        normalized: dict[str, object] = {}
        for name, (default, (lo_bound, hi_bound)) in schema.items():
            raw = self.params.get(name, default)
            if name == "keep_area":
                value: object = float(raw)  # type: ignore[arg-type]
                checked = (value,)
            elif isinstance(raw, (int, float)):
                value = (float(raw), float(raw))
                checked = value
            else:
                pair = tuple(float(v) for v in raw)  # type: ignore[union-attr]
                if len(pair) != 2 or pair[0] > pair[1]:
                    raise ValueError(
                        f"{self.kind.value}.{name}: bad range {raw!r}"
                    )
                value = pair
                checked = pair
            for v in checked:
                if not lo_bound <= v <= hi_bound:
                    raise ValueError(
                        f"{self.kind.value}.{name}: {v} outside "
                        f"[{lo_bound}, {hi_bound}]"
                    )
            if self.kind is AugmentationKind.RANDOM_CROP and name == "scale":
                if checked[0] <= 0:
                    raise ValueError("random_crop.scale must be positive")
            normalized[name] = value
        object.__setattr__(self, "params", normalized)

    def range(self, name: str) -> tuple[float, float]:
        return self.params[name]  # type: ignore[return-value]


def _photometric(frame: Frame, spec: AugmentationSpec, rng) -> Frame:
    pixels = frame.pixels
    if spec.kind is AugmentationKind.BRIGHTNESS:
        delta = rng.uniform(*spec.range("delta"))
        out = np.clip(np.rint(pixels.astype(np.float64) + delta), 0, 255)
        return Frame.from_array(
            out.astype(np.uint8), frame.frame_index, frame.timestamp_ms, frame.source
        )
    if spec.kind is AugmentationKind.CONTRAST:
        factor = rng.uniform(*spec.range("factor"))
        out = np.clip(np.rint(128.0 + factor * (pixels.astype(np.float64) - 128.0)), 0, 255)
        return Frame.from_array(
            out.astype(np.uint8), frame.frame_index, frame.timestamp_ms, frame.source
        )
    # Hue and saturation work on the HSV representation and only apply
    # to color frames; the exact-identity draw skips the round-trip so
    # an identity spec stays byte-identical.
    if frame.channels != 3:
        raise ValueError(f"{spec.kind.value} needs a 3-channel frame")
    if spec.kind is AugmentationKind.HUE:
        delta = rng.uniform(*spec.range("delta"))
        if delta == 0.0:
            return frame
        hsv = cv2.cvtColor(pixels.astype(np.float32) / 255.0, cv2.COLOR_BGR2HSV)
        hsv[:, :, 0] = (hsv[:, :, 0] + delta) % 360.0
    else:
        factor = rng.uniform(*spec.range("factor"))
        if factor == 1.0:
            return frame
        hsv = cv2.cvtColor(pixels.astype(np.float32) / 255.0, cv2.COLOR_BGR2HSV)
        hsv[:, :, 1] = np.clip(hsv[:, :, 1] * factor, 0.0, 1.0)
    bgr = cv2.cvtColor(hsv, cv2.COLOR_HSV2BGR)
    out = np.clip(np.rint(bgr.astype(np.float64) * 255.0), 0, 255)
    return Frame.from_array(
        out.astype(np.uint8), frame.frame_index, frame.timestamp_ms, frame.source
    )


def _random_crop(
    frame: Frame, boxes: Sequence[AxisAlignedBox], spec: AugmentationSpec, rng
) -> tuple[Frame, list[AxisAlignedBox]]:
    lo, hi = spec.range("scale")
    keep_area: float = spec.params["keep_area"]  # type: ignore[assignment]
    for _ in range(10):
        crop_w = max(1, int(round(frame.width * rng.uniform(lo, hi))))
        crop_h = max(1, int(round(frame.height * rng.uniform(lo, hi))))
        x0 = int(rng.integers(0, frame.width - crop_w + 1))
        y0 = int(rng.integers(0, frame.height - crop_h + 1))
        window = AxisAlignedBox(x0, y0, x0 + crop_w, y0 + crop_h)
        kept: list[AxisAlignedBox] = []
        for box in boxes:
            try:
                clipped = intersect_box(box, window)
            except EmptyBox:
                continue
            if clipped.area < keep_area * box.area:
                continue
            kept.append(
                AxisAlignedBox(
                    clipped.x_min - x0,
                    clipped.y_min - y0,
                    clipped.x_max - x0,
                    clipped.y_max - y0,
                )
            )
        if boxes and not kept:
            # Degenerate: the window lost every box. Try again.
            continue
        pixels = frame.pixels[y0 : y0 + crop_h, x0 : x0 + crop_w]
        cropped = Frame.from_array(
            np.ascontiguousarray(pixels),
            frame.frame_index,
            frame.timestamp_ms,
            frame.source,
        )
        return cropped, kept
    return frame, list(boxes)


def augment(
    frame: Frame, boxes: Sequence[AxisAlignedBox], spec: AugmentationSpec
) -> tuple[Frame, list[AxisAlignedBox]]:
    """Apply one augmentation; photometric kinds never touch boxes.

    Randomness comes from numpy's default_rng seeded with spec.seed.
    Photometric kinds draw one uniform value from their range; random
    crop draws, per attempt, a width fraction, a height fraction, then
    integer x and y offsets spanning the valid placements. A crop
    attempt that loses every box is retried, up to ten attempts, after
    which frame and boxes come back unchanged.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.kind is AugmentationKind.RANDOM_CROP:
        return _random_crop(frame, boxes, spec, rng)
    return _photometric(frame, spec, rng), list(boxes)


def default_augmentations(seed: int = 0) -> tuple[AugmentationSpec, ...]:
    """The training recipe: random crop plus the four photometric kinds."""
    kinds = (
        AugmentationKind.RANDOM_CROP,
        AugmentationKind.BRIGHTNESS,
        AugmentationKind.CONTRAST,
        AugmentationKind.HUE,
        AugmentationKind.SATURATION,
    )
    return tuple(
        AugmentationSpec(kind=kind, seed=seed + i) for i, kind in enumerate(kinds)
    )


@dataclass(frozen=True)
class TrainingConfig:
    """Hyperparameters for the detector training hand-off document.

    `dropout_probability` is stored exactly as configured; whether a
    framework reads it as keep-probability or drop-probability is that
    framework's convention, so port it with care.
    """

    num_classes: int = 1
    batch_size: int = 32
    learning_rate: float = 0.0001
    dropout_probability: float = 0.8
    total_steps: int = 35000
    checkpoint_step: int = 16000
    augmentations: tuple[AugmentationSpec, ...] = field(
        default_factory=default_augmentations
    )

    def __post_init__(self) -> None:
        for name in ("num_classes", "batch_size", "total_steps", "checkpoint_step"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate {self.learning_rate} must be > 0")
        if not 0.0 < self.dropout_probability < 1.0:
            raise ValueError(
                f"dropout_probability {self.dropout_probability} outside (0, 1)"
            )
        object.__setattr__(self, "augmentations", tuple(self.augmentations))


def emit_training_config(
    tc: TrainingConfig,
    out_path: str | Path,
    label_map_path: str = "label_map.txt",
    train_csv: str = "train.csv",
    eval_csv: str = "test.csv",
) -> None:
    """Write the training hand-off document (YAML).

    Contains every hyperparameter plus the label-map and dataset paths,
    ready for hand-porting into a training framework's own config.
    """
    doc = {
        "model": {
            "num_classes": tc.num_classes,
            "dropout_probability": tc.dropout_probability,
        },
        "training": {
            "batch_size": tc.batch_size,
            "learning_rate": tc.learning_rate,
            "total_steps": tc.total_steps,
            "checkpoint_step": tc.checkpoint_step,
        },
        "augmentations": [
            {
                "kind": spec.kind.value,
                "seed": spec.seed,
                "params": {
                    name: (list(value) if isinstance(value, tuple) else value)
                    for name, value in spec.params.items()
                },
            }
            for spec in tc.augmentations
        ],
        "data": {
            "label_map": label_map_path,
            "train_csv": train_csv,
            "eval_csv": eval_csv,
        },
    }
    with open(out_path, "w", encoding="utf-8") as handle:
        yaml.safe_dump(doc, handle, sort_keys=False)


def load_training_config(path: str | Path) -> tuple[TrainingConfig, dict]:
    """Read back an emitted document; returns (config, data paths)."""
    path = Path(path)
    doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise ParseError("expected a mapping at top level", str(path))
    try:
        model = doc["model"]
        training = doc["training"]
        augs = doc.get("augmentations", [])
        data = doc.get("data", {})
        tc = TrainingConfig(
            num_classes=int(model["num_classes"]),
            batch_size=int(training["batch_size"]),
            learning_rate=float(training["learning_rate"]),
            dropout_probability=float(model["dropout_probability"]),
            total_steps=int(training["total_steps"]),
            checkpoint_step=int(training["checkpoint_step"]),
            augmentations=tuple(
                AugmentationSpec(
                    kind=AugmentationKind(a["kind"]),
                    params=a.get("params", {}),
                    seed=int(a.get("seed", 0)),
                )
                for a in augs
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad training config: {exc}", str(path)) from exc
    return tc, dict(data)
