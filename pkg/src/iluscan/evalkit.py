"""Detection-quality metrics: IoU matching, AP, mAP.

Protocol: greedy best-IoU matching per image at a single IoU threshold
(default 0.5), average precision by all-points interpolation, mAP as
the arithmetic mean over classes. Ground truth arrives in the dataset
CSV format; predictions as the pipeline's newline-delimited JSON.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .data_tools import parse_csv
from .errors import ParseError, ZeroTruth
from .geometry import AxisAlignedBox, Detection, iou


def match_detections(
    preds: Sequence[Detection],
    truths: Sequence[AxisAlignedBox],
    iou_threshold: float = 0.5,
) -> tuple[list[bool], list[bool]]:
    """Greedy single-image, single-class matching.

    Predictions are processed in descending score (ties keep input
    order); each claims its best-IoU still-unmatched truth and is a
    true positive iff that IoU reaches the threshold. Returns TP flags
    aligned with the input predictions and matched flags aligned with
    the truths.
    """
    if not 0.0 <= iou_threshold <= 1.0:
        raise ValueError(f"iou_threshold {iou_threshold} outside [0, 1]")
    tp = [False] * len(preds)
    matched = [False] * len(truths)
    order = sorted(range(len(preds)), key=lambda i: -preds[i].score)
    for i in order:
        best_iou = 0.0
        best_j = -1
        for j, truth in enumerate(truths):
            if matched[j]:
                continue
            overlap = iou(preds[i].box, truth)
            if overlap > best_iou:
                best_iou = overlap
                best_j = j
        if best_j >= 0 and best_iou >= iou_threshold:
            tp[i] = True
            matched[best_j] = True
    return tp, matched


def average_precision(
    tp_flags: Sequence[bool], scores: Sequence[float], truth_count: int
) -> float:
    """Area under the interpolated precision-recall curve.

    Ranks predictions by descending score (stable under ties), walks
    the TP/FP sequence into precision-recall points, takes the running
    maximum of precision from the high-recall end, and integrates over
    the recall steps.
    """
    if len(tp_flags) != len(scores):
        raise ValueError(
            f"{len(tp_flags)} flags vs {len(scores)} scores"
        )
    if truth_count < 0:
        raise ValueError(f"negative truth_count {truth_count}")
    if truth_count == 0:
        raise ZeroTruth("no ground-truth boxes to evaluate against")
    if not tp_flags:
        return 0.0
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    precisions: list[float] = []
    recalls: list[float] = []
    tp_cum = 0
    for rank, i in enumerate(order, start=1):
        if tp_flags[i]:
            tp_cum += 1
        precisions.append(tp_cum / rank)
        recalls.append(tp_cum / truth_count)
    envelope = precisions[:]
    for i in range(len(envelope) - 2, -1, -1):
        if envelope[i + 1] > envelope[i]:
            envelope[i] = envelope[i + 1]
    ap = 0.0
    previous_recall = 0.0
    for recall, value in zip(recalls, envelope):
        ap += (recall - previous_recall) * value
        previous_recall = recall
    return ap


def mean_average_precision(per_class: Mapping[str, float] | Sequence[float]) -> float:
    """Arithmetic mean over per-class AP values."""
    values = (
        list(per_class.values())
        if isinstance(per_class, Mapping)
        else list(per_class)
    )
    if not values:
        raise ValueError("need at least one class")
    return sum(values) / len(values)


@dataclass(frozen=True)
class EvalResult:
    ap_by_class: Mapping[str, float]
    mean: float


def evaluate(
    truths: Mapping[str, Sequence[tuple[str, AxisAlignedBox]]],
    preds: Mapping[str, Sequence[Detection]],
    iou_threshold: float = 0.5,
) -> EvalResult:
    """Dataset-level evaluation.

    Matching runs per image; the ranked TP/FP lists are then pooled per
    class across images for AP. Classes are those present in the ground
    truth; predictions for other labels are ignored.
    """
    classes = sorted({label for objs in truths.values() for label, _ in objs})
    if not classes:
        raise ZeroTruth("ground truth contains no objects")
    ap_by_class: dict[str, float] = {}
    for cls in classes:
        flags: list[bool] = []
        scores: list[float] = []
        truth_count = 0
        for image, objs in truths.items():
            cls_truths = [box for label, box in objs if label == cls]
            truth_count += len(cls_truths)
            cls_preds = [
                d for d in preds.get(image, ()) if d.label == cls
            ]
            tp, _ = match_detections(cls_preds, cls_truths, iou_threshold)
            flags.extend(tp)
            scores.extend(d.score for d in cls_preds)
        ap_by_class[cls] = average_precision(flags, scores, truth_count)
    return EvalResult(ap_by_class=ap_by_class, mean=mean_average_precision(ap_by_class))


def load_truth_csv(
    path: str | Path,
) -> dict[str, list[tuple[str, AxisAlignedBox]]]:
    """Ground truth from the dataset CSV, keyed by filename."""
    return {
        record.filename: list(record.objects) for record in parse_csv(path)
    }


def load_predictions_ndjson(
    path: str | Path,
) -> list[tuple[str | None, list[Detection]]]:
    """Per-frame predictions from a pipeline report file.

    Returns (source, detections) in frame order; the trailing summary
    object (and any other non-frame line) is skipped.
    """
    path = Path(path)
    frames: list[tuple[str | None, list[Detection]]] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad JSON: {exc}", where) from None
            if not isinstance(obj, dict):
                raise ParseError("expected a JSON object", where)
            if "summary" in obj:
                continue
            if "detections" not in obj:
                raise ParseError("frame object without 'detections'", where)
            dets: list[Detection] = []
            for d in obj["detections"]:
                try:
                    box = AxisAlignedBox(*d["box"])
                    dets.append(Detection(box, d["label"], float(d["score"])))
                except (KeyError, TypeError, ValueError) as exc:
                    raise ParseError(f"bad detection entry: {exc}", where) from None
            frames.append((obj.get("source"), dets))
    return frames


def evaluate_files(
    truth_csv: str | Path,
    pred_ndjson: str | Path,
    iou_threshold: float = 0.5,
) -> EvalResult:
    """Evaluate a prediction report against a ground-truth CSV.

    Frames carrying a source filename join on it; when any frame lacks
    one, frames pair with truth images positionally (first-appearance
    order), which then requires equal counts.
    """
    truths = load_truth_csv(truth_csv)
    frames = load_predictions_ndjson(pred_ndjson)
    preds: dict[str, list[Detection]] = {}
    if frames and all(source is not None for source, _ in frames):
        for source, dets in frames:
            assert source is not None
            if source not in truths:
                raise ParseError(
                    f"prediction source {source!r} not in the ground truth"
                )
            preds.setdefault(source, []).extend(dets)
    else:
        names = list(truths)
        if len(frames) != len(names):
            raise ParseError(
                f"{len(frames)} prediction frames vs {len(names)} ground-truth "
                "images; positional pairing needs equal counts"
            )
        for (source, dets), name in zip(frames, names):
            preds.setdefault(name, []).extend(dets)
    return evaluate(truths, preds, iou_threshold)
