"""Pipeline orchestration.

Image path: detect, gate by aspect ratio, crop the lower half, localize
text, read it, parse the code. Video path: the same per frame, plus
k-of-n temporal voting before a code is finalized.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, replace
from typing import IO, Iterable

from .config import PipelineConfig
from .detection import DetectorBackend, filter_by_score, greedy_nms, infer
from .errors import EmptyBox, IluScanError, StageError
from .geometry import Detection, Frame
from .ocr import IluCodeReading, OcrEngine, parse_ilu, recognize
from .roi import aspect_gate, crop_and_resize, lower_half
from .text_detect import TextBackend, detect_text


@dataclass(frozen=True)
class Backends:
    """The three pluggable stages of one pipeline instance."""

    detector: DetectorBackend
    text: TextBackend
    ocr_engine: OcrEngine


@dataclass(frozen=True)
class FrameReport:
    """Everything one frame produced, immutable once emitted."""

    frame_index: int
    detections: tuple[Detection, ...] = ()
    gated_out: int = 0
    text_regions: int = 0
    readings: tuple[IluCodeReading, ...] = ()
    accepted_code: str | None = None
    errors: tuple[str, ...] = ()
    source: str | None = None


@dataclass(frozen=True)
class AcceptedCode:
    code: str
    frame_index: int


@dataclass(frozen=True)
class VideoSummary:
    frames: int
    accepted: tuple[AcceptedCode, ...]


@dataclass(frozen=True)
class VideoResult:
    reports: tuple[FrameReport, ...]
    summary: VideoSummary


class TemporalAggregator:
    """k-of-n vote over per-frame best readings.

    Each frame pushes its best code (or None); a code is finalized the
    first time it fills at least `require_k` slots of the last
    `window_n` frames, after which the window resets so one sighting is
    never counted toward two acceptances.
    """

    def __init__(self, window_n: int = 10, require_k: int = 3):
        if not 1 <= require_k <= window_n:
            raise ValueError(
                f"need 1 <= require_k <= window_n, got k={require_k} n={window_n}"
            )
        self.window_n = window_n
        self.require_k = require_k
        self._window: deque[str | None] = deque(maxlen=window_n)

    def update(self, code: str | None) -> str | None:
        """Push one frame's code; return a finalized code or None.

        Only the just-pushed code can newly reach the quorum, because
        eviction can only lower the other counts.
        """
        self._window.append(code)
        if code is not None and sum(1 for c in self._window if c == code) >= self.require_k:
            self._window.clear()
            return code
        return None

    def reset(self) -> None:
        self._window.clear()

    @property
    def window(self) -> tuple[str | None, ...]:
        return tuple(self._window)


def aggregator_update(
    agg: TemporalAggregator, reading: IluCodeReading | None
) -> str | None:
    """Feed one frame's best reading (or absence) into the vote."""
    return agg.update(reading.code if reading is not None else None)


def process_image(
    frame: Frame, backends: Backends, cfg: PipelineConfig
) -> FrameReport:
    """Run the full image path on one frame.

    A detector failure aborts the frame (StageError tagged "detect");
    failures further down are recorded per detection in the report's
    errors and the remaining detections still run.
    """
    try:
        dets = infer(backends.detector, frame)
        dets = filter_by_score(dets, cfg.det_score_threshold)
        dets = greedy_nms(dets, cfg.det_nms_iou)
    except IluScanError as exc:
        raise StageError("detect", exc) from exc

    gated_out = 0
    text_region_count = 0
    readings: list[IluCodeReading] = []
    errors: list[str] = []
    for det in dets:
        if not aspect_gate(det.box, cfg.aspect_min_ratio).passed:
            gated_out += 1
            continue
        try:
            crop = crop_and_resize(
                frame, lower_half(det.box), cfg.max_text_input_side
            )
            regions = detect_text(backends.text, crop, cfg)
        except EmptyBox:
            continue
        except IluScanError as exc:
            errors.append(f"text-detect: {exc}")
            continue
        text_region_count += len(regions)
        for region in regions:
            try:
                result = recognize(
                    backends.ocr_engine, frame, region.frame_envelope, cfg.ocr
                )
            except IluScanError as exc:
                errors.append(f"ocr: {exc}")
                continue
            parsed = parse_ilu(
                result,
                cfg.ocr_min_confidence,
                cfg.ilu_pattern,
                frame_index=frame.frame_index,
                region=region.frame_envelope,
            )
            if isinstance(parsed, IluCodeReading):
                readings.append(parsed)
    readings.sort(key=lambda r: -r.confidence)
    return FrameReport(
        frame_index=frame.frame_index,
        detections=tuple(dets),
        gated_out=gated_out,
        text_regions=text_region_count,
        readings=tuple(readings),
        errors=tuple(errors),
        source=frame.source,
    )


def process_video(
    frames: Iterable[Frame], backends: Backends, cfg: PipelineConfig
) -> VideoResult:
    """Run the video path: one report per frame plus a final summary.

    Per-frame failures become that frame's error entry; the stream
    continues. A frame's report carries `accepted_code` when its push
    made the vote fire; the summary keeps first acceptances only.
    """
    agg = TemporalAggregator(cfg.window_n, cfg.require_k)
    reports: list[FrameReport] = []
    first_accepted: dict[str, int] = {}
    for frame in frames:
        try:
            report = process_image(frame, backends, cfg)
        except StageError as exc:
            report = FrameReport(
                frame_index=frame.frame_index,
                errors=(str(exc),),
                source=frame.source,
            )
        best = report.readings[0] if report.readings else None
        code = aggregator_update(agg, best)
        if code is not None:
            report = replace(report, accepted_code=code)
            first_accepted.setdefault(code, frame.frame_index)
        reports.append(report)
    summary = VideoSummary(
        frames=len(reports),
        accepted=tuple(
            AcceptedCode(code, idx) for code, idx in first_accepted.items()
        ),
    )
    return VideoResult(reports=tuple(reports), summary=summary)


def report_to_dict(report: FrameReport) -> dict:
    """JSON-ready form of one report; boxes as [x_min,y_min,x_max,y_max]."""
    return {
        "frame_index": report.frame_index,
        "source": report.source,
        "detections": [
            {
                "box": list(det.box.as_tuple()),
                "label": det.label,
                "score": det.score,
            }
            for det in report.detections
        ],
        "gated_out": report.gated_out,
        "text_regions": report.text_regions,
        "readings": [
            {
                "prefix": r.prefix,
                "digits": r.digits,
                "confidence": r.confidence,
                "frame_index": r.frame_index,
            }
            for r in report.readings
        ],
        "accepted_code": report.accepted_code,
        "errors": list(report.errors),
    }


def summary_to_dict(summary: VideoSummary) -> dict:
    return {
        "summary": {
            "frames": summary.frames,
            "accepted": [
                {"code": a.code, "frame_index": a.frame_index}
                for a in summary.accepted
            ],
        }
    }


def write_ndjson(result: VideoResult, stream: IO[str]) -> int:
    """One line per frame, then the summary line; returns lines written."""
    lines = 0
    for report in result.reports:
        stream.write(json.dumps(report_to_dict(report)) + "\n")
        lines += 1
    stream.write(json.dumps(summary_to_dict(result.summary)) + "\n")
    return lines + 1
