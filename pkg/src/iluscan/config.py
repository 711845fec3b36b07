"""Pipeline configuration and the YAML config-file format.

Every numeric threshold lives here exactly once; the CLI loads the same
structure from a YAML document and rejects anything it does not know.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ConfigError
from .ocr import (
    DEFAULT_PATTERN,
    EngineMode,
    IluPattern,
    OcrConfig,
    SegmentationMode,
)


@dataclass(frozen=True)
class PipelineConfig:
    """All knobs of the detection-to-code pipeline."""

    det_score_threshold: float = 0.5
    det_nms_iou: float = 0.5
    aspect_min_ratio: float = 1.5
    text_score_threshold: float = 0.5
    text_nms_iou: float = 0.4
    ocr_min_confidence: float = 0.99
    ocr: OcrConfig = field(default_factory=OcrConfig)
    ilu_pattern: IluPattern = DEFAULT_PATTERN
    window_n: int = 10
    require_k: int = 3
    max_text_input_side: int = 1280

    def __post_init__(self) -> None:
        for name in (
            "det_score_threshold",
            "det_nms_iou",
            "text_score_threshold",
            "text_nms_iou",
            "ocr_min_confidence",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} {value} outside [0, 1]")
        if self.aspect_min_ratio <= 0:
            raise ValueError(f"aspect_min_ratio {self.aspect_min_ratio} must be > 0")
        if not 1 <= self.require_k <= self.window_n:
            raise ValueError(
                f"need 1 <= require_k <= window_n, "
                f"got k={self.require_k} n={self.window_n}"
            )
        if self.max_text_input_side < 32:
            raise ValueError(
                f"max_text_input_side {self.max_text_input_side} must be >= 32"
            )


@dataclass(frozen=True)
class CliConfig:
    """A parsed CLI config file: pipeline knobs plus backend choices.

    `backends` holds one validated option mapping per stage (detector,
    text, ocr); instantiation happens in the CLI layer.
    """

    pipeline: PipelineConfig
    backends: Mapping[str, Mapping[str, Any]]


# Per-stage backend kinds and the option keys each accepts. "model" is
# required for the dnn-backed kinds.
_BACKEND_KINDS: dict[str, dict[str, set[str]]] = {
    "detector": {"stub": {"script"}, "opencv-ssd": {"model", "config", "label_map"}},
    "text": {"stub": {"script"}, "full-crop": {"inset", "score"}, "opencv-east": {"model"}},
    "ocr": {"stub": {"script"}, "tesseract": set()},
}
_MODEL_REQUIRED = {"opencv-ssd", "opencv-east"}

_DEFAULT_BACKENDS: dict[str, dict[str, Any]] = {
    "detector": {"kind": "stub"},
    "text": {"kind": "full-crop"},
    "ocr": {"kind": "stub"},
}


def _require_mapping(value: Any, where: str) -> dict[str, Any]:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{where} must be a mapping, got {type(value).__name__}")
    return value


def _take(section: dict[str, Any], where: str, allowed: set[str]) -> dict[str, Any]:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    return section


def _enum_by_value(enum_cls: Any, raw: Any, where: str) -> Any:
    try:
        return enum_cls(raw)
    except ValueError:
        valid = ", ".join(m.value for m in enum_cls)
        raise ConfigError(f"{where} must be one of: {valid}; got {raw!r}") from None


def _parse_ocr(section: dict[str, Any]) -> OcrConfig:
    _take(
        section,
        "ocr",
        {"language", "engine_mode", "segmentation_mode", "padding_ratio"},
    )
    kwargs: dict[str, Any] = {}
    if "language" in section:
        kwargs["language"] = str(section["language"])
    if "engine_mode" in section:
        kwargs["engine_mode"] = _enum_by_value(
            EngineMode, section["engine_mode"], "ocr.engine_mode"
        )
    if "segmentation_mode" in section:
        kwargs["segmentation_mode"] = _enum_by_value(
            SegmentationMode, section["segmentation_mode"], "ocr.segmentation_mode"
        )
    if "padding_ratio" in section:
        kwargs["padding_ratio"] = float(section["padding_ratio"])
    try:
        return OcrConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"ocr: {exc}") from exc


def _parse_ilu(section: dict[str, Any]) -> IluPattern:
    _take(section, "ilu", {"prefixes", "digits_min", "digits_max"})
    kwargs: dict[str, Any] = {}
    if "prefixes" in section:
        raw = section["prefixes"]
        if not isinstance(raw, list) or not all(isinstance(p, str) for p in raw):
            raise ConfigError("ilu.prefixes must be a list of strings")
        kwargs["prefixes"] = frozenset(p.upper() for p in raw)
    if "digits_min" in section:
        kwargs["digits_min"] = int(section["digits_min"])
    if "digits_max" in section:
        kwargs["digits_max"] = int(section["digits_max"])
    try:
        return IluPattern(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"ilu: {exc}") from exc


def _parse_backends(section: dict[str, Any]) -> dict[str, dict[str, Any]]:
    _take(section, "backends", set(_BACKEND_KINDS))
    out: dict[str, dict[str, Any]] = {}
    for stage, default in _DEFAULT_BACKENDS.items():
        raw = _require_mapping(section.get(stage, default), f"backends.{stage}")
        raw = dict(raw) or dict(default)
        kind = raw.pop("kind", default["kind"])
        kinds = _BACKEND_KINDS[stage]
        if kind not in kinds:
            raise ConfigError(
                f"backends.{stage}.kind must be one of: "
                f"{', '.join(sorted(kinds))}; got {kind!r}"
            )
        _take(raw, f"backends.{stage} ({kind})", kinds[kind])
        if kind in _MODEL_REQUIRED and "model" not in raw:
            raise ConfigError(f"backends.{stage} ({kind}) requires a model path")
        out[stage] = {"kind": kind, **raw}
    return out


def load_cli_config(path: str | Path) -> CliConfig:
    """Parse and validate a YAML config file.

    Unknown keys anywhere in the document are errors, and every value
    is checked against the same invariants the dataclasses enforce.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    doc = _require_mapping(doc, str(path))
    _take(doc, str(path), {"pipeline", "ocr", "ilu", "backends"})

    ocr_cfg = _parse_ocr(_require_mapping(doc.get("ocr"), "ocr"))
    ilu = _parse_ilu(_require_mapping(doc.get("ilu"), "ilu"))

    pipe_section = _require_mapping(doc.get("pipeline"), "pipeline")
    scalar_fields = {
        f.name
        for f in fields(PipelineConfig)
        if f.name not in ("ocr", "ilu_pattern")
    }
    _take(pipe_section, "pipeline", scalar_fields)
    kwargs: dict[str, Any] = {"ocr": ocr_cfg, "ilu_pattern": ilu}
    for name in scalar_fields:
        if name in pipe_section:
            caster = int if name in ("window_n", "require_k", "max_text_input_side") else float
            try:
                kwargs[name] = caster(pipe_section[name])
            except (TypeError, ValueError):
                raise ConfigError(
                    f"pipeline.{name}: expected a number, got {pipe_section[name]!r}"
                ) from None
    try:
        pipeline = PipelineConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"pipeline: {exc}") from exc

    backends = _parse_backends(_require_mapping(doc.get("backends"), "backends"))
    return CliConfig(pipeline=pipeline, backends=backends)
