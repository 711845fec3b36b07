"""Command-line interface.

Exit codes are uniform across commands: 0 when the command produced a
result (a code was read, rows were written), 2 when it succeeded but
found nothing, 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import Any, Sequence

from .config import CliConfig, load_cli_config
from .data_tools import (
    AugmentationKind,
    AugmentationSpec,
    TrainingConfig,
    annotations_to_csv,
    augment,
    emit_training_config,
    parse_annotation,
    parse_csv,
    split_dataset,
)
from .detection import (
    DetectorBackend,
    OpenCvSsdDetector,
    StubDetector,
    load_label_map,
)
from .errors import ConfigError, IluScanError, ZeroTruth
from .evalkit import evaluate_files
from .geometry import AxisAlignedBox, Detection, RotatedBox
from .ocr import OcrEngine, OcrResult, StubOcr, TesseractOcr
from .pipeline import (
    Backends,
    process_image,
    process_video,
    report_to_dict,
    write_ndjson,
)
from .sources import ImageDirectorySource, ImageFileSource, open_source
from .synth import generate_suite, write_suite
from .text_detect import (
    FullCropTextDetector,
    OpenCvEastDetector,
    StubTextDetector,
    TextBackend,
)


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit 1, not argparse's 2.

    Exit code 2 means "ran fine, found nothing" here.
    """

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _load_json(path: str, what: str) -> Any:
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise ConfigError(f"{what}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what}: bad JSON: {exc}") from exc


def _detector_from_config(options: dict, cfg: CliConfig) -> DetectorBackend:
    if options["kind"] == "opencv-ssd":
        label_map = (
            load_label_map(options["label_map"]) if "label_map" in options else None
        )
        return OpenCvSsdDetector(
            options["model"], options.get("config"), label_map
        )
    script: dict[int, list[Detection]] = {}
    if "script" in options:
        raw = _load_json(options["script"], "detector script")
        if not isinstance(raw, dict):
            raise ConfigError("detector script: expected {frame_index: [...]}")
        for key, entries in raw.items():
            script[int(key)] = [
                Detection(
                    AxisAlignedBox(*entry["box"]),
                    entry["label"],
                    float(entry["score"]),
                )
                for entry in entries
            ]
    return StubDetector(script=script)


def _text_from_config(options: dict) -> TextBackend:
    kind = options["kind"]
    if kind == "opencv-east":
        return OpenCvEastDetector(options["model"])
    if kind == "full-crop":
        kwargs: dict[str, Any] = {}
        if "inset" in options:
            kwargs["inset"] = int(options["inset"])
        if "score" in options:
            kwargs["score"] = float(options["score"])
        return FullCropTextDetector(**kwargs)
    regions: list[tuple[RotatedBox, float]] = []
    if "script" in options:
        raw = _load_json(options["script"], "text script")
        if not isinstance(raw, list):
            raise ConfigError("text script: expected a list of regions")
        for entry in raw:
            regions.append(
                (
                    RotatedBox(
                        float(entry["center"][0]),
                        float(entry["center"][1]),
                        float(entry["size"][0]),
                        float(entry["size"][1]),
                        float(entry.get("angle", 0.0)),
                    ),
                    float(entry.get("score", 0.9)),
                )
            )
    return StubTextDetector(regions=tuple(regions))


def _ocr_from_config(options: dict, cfg: CliConfig) -> OcrEngine:
    if options["kind"] == "tesseract":
        return TesseractOcr(cfg.pipeline.ocr)
    script: list[OcrResult] = []
    if "script" in options:
        raw = _load_json(options["script"], "ocr script")
        if not isinstance(raw, list):
            raise ConfigError("ocr script: expected a list of results")
        script = [
            OcrResult(entry["text"], float(entry["confidence"])) for entry in raw
        ]
    return StubOcr(script=tuple(script))


def _build_backends(cfg: CliConfig) -> Backends:
    return Backends(
        detector=_detector_from_config(dict(cfg.backends["detector"]), cfg),
        text=_text_from_config(dict(cfg.backends["text"])),
        ocr_engine=_ocr_from_config(dict(cfg.backends["ocr"]), cfg),
    )


def _print_report(report) -> None:
    print(
        f"frame {report.frame_index}: {len(report.detections)} detection(s), "
        f"{report.gated_out} gated out, {report.text_regions} text region(s)"
    )
    for reading in report.readings:
        print(
            f"  {reading.prefix} {reading.digits}  "
            f"(confidence {reading.confidence:.3f})"
        )
    for error in report.errors:
        print(f"  error: {error}", file=sys.stderr)


def _cmd_detect_image(args: argparse.Namespace) -> int:
    cfg = load_cli_config(args.config)
    backends = _build_backends(cfg)
    frames = list(ImageFileSource(args.input))
    report = process_image(frames[0], backends, cfg.pipeline)
    _print_report(report)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as handle:
            handle.write(json.dumps(report_to_dict(report)) + "\n")
    return 0 if report.readings else 2


def _cmd_detect_video(args: argparse.Namespace) -> int:
    cfg = load_cli_config(args.config)
    backends = _build_backends(cfg)
    result = process_video(open_source(args.input), backends, cfg.pipeline)
    with open(args.report, "w", encoding="utf-8") as handle:
        write_ndjson(result, handle)
    print(f"frames: {result.summary.frames}")
    for accepted in result.summary.accepted:
        print(f"accepted {accepted.code} at frame {accepted.frame_index}")
    return 0 if result.summary.accepted else 2


def _cmd_prep_parse(args: argparse.Namespace) -> int:
    record = parse_annotation(args.input)
    print(
        f"{record.filename}: {record.width}x{record.height}, "
        f"{len(record.objects)} object(s)"
    )
    for label, box in record.objects:
        print(f"  {label} {tuple(int(round(v)) for v in box.as_tuple())}")
    return 0


def _cmd_prep_to_csv(args: argparse.Namespace) -> int:
    in_path = Path(args.input)
    paths = sorted(in_path.glob("*.xml")) if in_path.is_dir() else [in_path]
    if not paths:
        raise ConfigError(f"no annotation files found in {in_path}")
    records = [parse_annotation(p) for p in paths]
    rows = annotations_to_csv(records, args.out)
    print(f"{rows} row(s) -> {args.out}")
    return 0 if rows else 2


def _cmd_prep_split(args: argparse.Namespace) -> int:
    records = parse_csv(args.input)
    train, test = split_dataset(records, args.fraction, seed=args.seed)
    train_rows = annotations_to_csv(train, args.train_out)
    test_rows = annotations_to_csv(test, args.test_out)
    print(f"train: {len(train)} record(s), {train_rows} row(s) -> {args.train_out}")
    print(f"test:  {len(test)} record(s), {test_rows} row(s) -> {args.test_out}")
    return 0


_KIND_PARAMS = {
    AugmentationKind.BRIGHTNESS: "delta",
    AugmentationKind.HUE: "delta",
    AugmentationKind.CONTRAST: "factor",
    AugmentationKind.SATURATION: "factor",
}


def _cmd_prep_augment(args: argparse.Namespace) -> int:
    import cv2

    kind = AugmentationKind(args.kind.replace("-", "_"))
    params: dict[str, Any] = {}
    if kind in _KIND_PARAMS:
        value = getattr(args, _KIND_PARAMS[kind])
        if value is None:
            raise ConfigError(f"--{_KIND_PARAMS[kind]} is required for {args.kind}")
        params[_KIND_PARAMS[kind]] = value[0] if len(value) == 1 else tuple(value)
    else:
        if args.scale is not None:
            params["scale"] = tuple(args.scale)
        if args.keep_area is not None:
            params["keep_area"] = args.keep_area
    seed = args.seed
    if seed is None:
        seed = random.randrange(2**32)
        print(f"seed: {seed}")
    in_path = Path(args.input)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    frames = (
        ImageDirectorySource(in_path)
        if in_path.is_dir()
        else ImageFileSource(in_path)
    )
    written = 0
    for offset, frame in enumerate(frames):
        spec = AugmentationSpec(kind=kind, params=params, seed=seed + offset)
        out_frame, _ = augment(frame, [], spec)
        out_path = out_dir / (frame.source or f"frame_{frame.frame_index:04d}.png")
        if not cv2.imwrite(str(out_path), out_frame.pixels):
            raise OSError(f"could not write {out_path}")
        written += 1
    print(f"{written} image(s) -> {out_dir}")
    return 0 if written else 2


def _cmd_prep_emit_config(args: argparse.Namespace) -> int:
    tc = TrainingConfig(
        num_classes=args.num_classes,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        dropout_probability=args.dropout,
        total_steps=args.total_steps,
        checkpoint_step=args.checkpoint_step,
    )
    emit_training_config(
        tc,
        args.out,
        label_map_path=args.label_map,
        train_csv=args.train_csv,
        eval_csv=args.eval_csv,
    )
    print(f"training config -> {args.out}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    result = evaluate_files(args.truth, args.pred, args.iou)
    for cls, ap in sorted(result.ap_by_class.items()):
        print(f"AP {cls} {ap:.4f}")
    print(f"mAP {result.mean:.4f}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    seed = args.seed
    if seed is None:
        seed = random.randrange(2**32)
        print(f"seed: {seed}")
    scenes = generate_suite(args.count, seed)
    paths = write_suite(scenes, args.out_dir)
    print(f"{len(paths)} scene(s) -> {args.out_dir}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="iluscan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("detect-image", help="read codes in one image")
    p.add_argument("--config", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--json", help="write the frame report as a JSON line")
    p.set_defaults(func=_cmd_detect_image)

    p = sub.add_parser("detect-video", help="read codes in a stream")
    p.add_argument("--config", required=True)
    p.add_argument("--input", required=True, help="video file or image directory")
    p.add_argument("--report", required=True, help="NDJSON output path")
    p.set_defaults(func=_cmd_detect_video)

    prep = sub.add_parser("prep-data", help="dataset tooling")
    tools = prep.add_subparsers(dest="tool", required=True, parser_class=_Parser)

    p = tools.add_parser("parse", help="show one annotation file")
    p.add_argument("--input", required=True)
    p.set_defaults(func=_cmd_prep_parse)

    p = tools.add_parser("to-csv", help="annotations to CSV")
    p.add_argument("--input", required=True, help="annotation file or directory")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_prep_to_csv)

    p = tools.add_parser("split", help="deterministic train/test split")
    p.add_argument("--input", required=True, help="dataset CSV")
    p.add_argument("--train-out", required=True)
    p.add_argument("--test-out", required=True)
    p.add_argument("--fraction", type=float, default=0.8)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_prep_split)

    p = tools.add_parser("augment", help="augment images")
    p.add_argument("--input", required=True, help="image file or directory")
    p.add_argument("--out-dir", required=True)
    p.add_argument(
        "--kind",
        required=True,
        choices=["brightness", "contrast", "hue", "saturation", "random-crop"],
    )
    p.add_argument("--delta", type=float, nargs="+")
    p.add_argument("--factor", type=float, nargs="+")
    p.add_argument("--scale", type=float, nargs=2)
    p.add_argument("--keep-area", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_prep_augment)

    p = tools.add_parser("emit-config", help="write training hand-off")
    p.add_argument("--out", required=True)
    p.add_argument("--num-classes", type=int, default=1)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=0.0001)
    p.add_argument("--dropout", type=float, default=0.8)
    p.add_argument("--total-steps", type=int, default=35000)
    p.add_argument("--checkpoint-step", type=int, default=16000)
    p.add_argument("--label-map", default="label_map.txt")
    p.add_argument("--train-csv", default="train.csv")
    p.add_argument("--eval-csv", default="test.csv")
    p.set_defaults(func=_cmd_prep_emit_config)

    p = sub.add_parser("eval", help="AP/mAP against ground truth")
    p.add_argument("--truth", required=True, help="ground-truth CSV")
    p.add_argument("--pred", required=True, help="prediction NDJSON")
    p.add_argument("--iou", type=float, default=0.5)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("synth", help="generate synthetic scenes")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except ZeroTruth as exc:
        print(f"no ground truth: {exc}", file=sys.stderr)
        return 2
    except (IluScanError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
