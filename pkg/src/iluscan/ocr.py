"""OCR over text regions and ILU code extraction.

The engine adapter reads a single line of English text from a grayscale
crop. Downstream, the raw string is cleaned, digit-position confusions
are corrected, and a reading is accepted only above a confidence floor.
"""

from __future__ import annotations

import math
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import cv2
import numpy as np

from .errors import EngineFailure, EngineUnavailable, IluScanError
from .geometry import AxisAlignedBox, Frame, clip_box

# Characters the engine tends to misread inside the numeric part of a
# code. Applied to digit positions only; letter positions keep their
# recognized value.
CONFUSION_MAP = {"S": "5", "O": "0", "I": "1", "B": "8", "Z": "2"}


class EngineMode(Enum):
    LSTM_ONLY = "lstm-only"


class SegmentationMode(Enum):
    SINGLE_LINE = "single-line"


@dataclass(frozen=True)
class OcrConfig:
    language: str = "eng"
    engine_mode: EngineMode = EngineMode.LSTM_ONLY
    segmentation_mode: SegmentationMode = SegmentationMode.SINGLE_LINE
    padding_ratio: float = 0.05

    def __post_init__(self) -> None:
        if not self.language:
            raise ValueError("language must be non-empty")
        if not 0.0 <= self.padding_ratio <= 0.5:
            raise ValueError(
                f"padding_ratio {self.padding_ratio} outside [0, 0.5]"
            )


@dataclass(frozen=True)
class OcrResult:
    text: str
    confidence: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class IluPattern:
    """Shape of an acceptable code: owner prefixes plus digit-count range.

    `check_digit` is a hook for a future checksum rule; when set it is
    called with the digit string and must return True to accept.
    """

    prefixes: frozenset[str] = frozenset({"SJSB", "SCSB"})
    digits_min: int = 4
    digits_max: int = 7
    check_digit: object = None

    def __post_init__(self) -> None:
        if not self.prefixes:
            raise ValueError("at least one prefix required")
        for p in self.prefixes:
            if not p or not p.isalpha() or p != p.upper():
                raise ValueError(f"prefix {p!r} must be uppercase letters")
        if not 1 <= self.digits_min <= self.digits_max:
            raise ValueError(
                f"bad digit bounds {self.digits_min}..{self.digits_max}"
            )

    @property
    def regex(self) -> re.Pattern[str]:
        alternatives = "|".join(sorted(self.prefixes))
        return re.compile(
            f"({alternatives})([0-9]{{{self.digits_min},{self.digits_max}}})"
        )


DEFAULT_PATTERN = IluPattern()


@dataclass(frozen=True)
class IluCodeReading:
    """An accepted code with its provenance."""

    prefix: str
    digits: str
    raw_text: str
    confidence: float
    frame_index: int = 0
    region: AxisAlignedBox | None = None

    def __post_init__(self) -> None:
        if not self.prefix.isalpha() or self.prefix != self.prefix.upper():
            raise ValueError(f"prefix {self.prefix!r} must be uppercase letters")
        if not self.digits.isdigit():
            raise ValueError(f"digits {self.digits!r} must be decimal digits")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        if self.frame_index < 0:
            raise ValueError(f"frame_index {self.frame_index} must be >= 0")

    @property
    def code(self) -> str:
        return self.prefix + self.digits


class RejectReason(Enum):
    LOW_CONFIDENCE = "low-confidence"
    NO_PREFIX = "no-prefix"


@dataclass(frozen=True)
class IluRejection:
    """Why a recognized string was not accepted as a code."""

    reason: RejectReason
    raw_text: str
    confidence: float


class OcrEngine(ABC):
    """Engine contract: one grayscale line crop in, text plus confidence out.

    Instances must be called from at most one thread at a time.
    """

    name: str = "ocr-engine"

    @abstractmethod
    def read_line(self, gray: np.ndarray) -> OcrResult:
        """Recognize a single line of text in a grayscale crop."""


@dataclass
class StubOcr(OcrEngine):
    """Scripted engine: replays canned results in call order.

    The last result repeats once the script runs out; an empty script
    reads as no text at all.
    """

    script: Sequence[OcrResult] = field(default_factory=tuple)
    name: str = "stub-ocr"
    _calls: int = field(default=0, repr=False)

    def read_line(self, gray: np.ndarray) -> OcrResult:
        if not self.script:
            return OcrResult("", 0.0)
        result = self.script[min(self._calls, len(self.script) - 1)]
        self._calls += 1
        return result


class TesseractOcr(OcrEngine):
    """Adapter for the Tesseract engine via pytesseract.

    Flags are fixed to the pipeline's use case: English, LSTM-only
    engine mode, single-line page segmentation. Raises EngineUnavailable
    when the package or the binary is missing, so callers can fall back.
    """

    _OEM = {EngineMode.LSTM_ONLY: "1"}
    _PSM = {SegmentationMode.SINGLE_LINE: "7"}

    def __init__(self, cfg: OcrConfig | None = None, name: str = "tesseract"):
        try:
            import pytesseract
        except ImportError as exc:
            raise EngineUnavailable(f"pytesseract not installed: {exc}") from exc
        try:
            pytesseract.get_tesseract_version()
        except Exception as exc:
            raise EngineUnavailable(f"tesseract binary not usable: {exc}") from exc
        self._pytesseract = pytesseract
        self.cfg = cfg if cfg is not None else OcrConfig()
        self._flags = (
            f"--oem {self._OEM[self.cfg.engine_mode]} "
            f"--psm {self._PSM[self.cfg.segmentation_mode]}"
        )
        self.name = name

    def read_line(self, gray: np.ndarray) -> OcrResult:
        pt = self._pytesseract
        try:
            data = pt.image_to_data(
                gray,
                lang=self.cfg.language,
                config=self._flags,
                output_type=pt.Output.DICT,
            )
        except Exception as exc:
            raise EngineFailure(f"{self.name}: {exc}") from exc
        words: list[str] = []
        confs: list[float] = []
        for text, conf in zip(data["text"], data["conf"]):
            conf = float(conf)
            if conf < 0 or not str(text).strip():
                continue
            words.append(str(text).strip())
            confs.append(conf / 100.0)
        if not words:
            return OcrResult("", 0.0)
        mean_conf = min(1.0, max(0.0, sum(confs) / len(confs)))
        return OcrResult(" ".join(words), mean_conf)


def recognize(
    engine: OcrEngine, frame: Frame, region: AxisAlignedBox, cfg: OcrConfig
) -> OcrResult:
    """Run the engine on a frame region.

    The region is padded by `cfg.padding_ratio` of its own size on each
    side (clipped to the frame) and converted to grayscale first; text
    touching the crop edge recognizes poorly without the margin.
    """
    pad_x = cfg.padding_ratio * region.width
    pad_y = cfg.padding_ratio * region.height
    padded = AxisAlignedBox(
        region.x_min - pad_x,
        region.y_min - pad_y,
        region.x_max + pad_x,
        region.y_max + pad_y,
    )
    clipped = clip_box(padded, frame.width, frame.height)
    x0 = int(math.floor(clipped.x_min))
    y0 = int(math.floor(clipped.y_min))
    x1 = min(int(math.ceil(clipped.x_max)), frame.width)
    y1 = min(int(math.ceil(clipped.y_max)), frame.height)
    crop = frame.pixels[y0:y1, x0:x1]
    gray = cv2.cvtColor(crop, cv2.COLOR_BGR2GRAY) if frame.channels == 3 else crop
    try:
        return engine.read_line(gray)
    except IluScanError:
        raise
    except Exception as exc:
        raise EngineFailure(f"{engine.name}: {exc}") from exc


def normalize_confusions(raw: str, pattern: IluPattern = DEFAULT_PATTERN) -> str:
    """Clean a recognized string and fix digit-position confusions.

    Uppercases, drops everything but A-Z and 0-9, then rewrites the
    confusable characters in the digit window right after the leftmost
    prefix. Strings without a prefix come back cleaned but otherwise
    untouched.
    """
    cleaned = "".join(
        c for c in raw.upper() if "A" <= c <= "Z" or "0" <= c <= "9"
    )
    starts = [
        idx for p in pattern.prefixes if (idx := cleaned.find(p)) != -1
    ]
    if not starts:
        return cleaned
    start = min(starts)
    # Longest prefix wins when one is a prefix of another.
    prefix_len = next(
        len(p)
        for p in sorted(pattern.prefixes, key=len, reverse=True)
        if cleaned.startswith(p, start)
    )
    lo = start + prefix_len
    hi = min(len(cleaned), lo + pattern.digits_max)
    window = "".join(CONFUSION_MAP.get(c, c) for c in cleaned[lo:hi])
    return cleaned[:lo] + window + cleaned[hi:]


def parse_ilu(
    result: OcrResult,
    min_conf: float = 0.99,
    pattern: IluPattern = DEFAULT_PATTERN,
    frame_index: int = 0,
    region: AxisAlignedBox | None = None,
) -> IluCodeReading | IluRejection:
    """Extract an ILU code from one OCR result, or say why not.

    The confidence floor is checked before any text handling; rejections
    are returned, never raised.
    """
    if not 0.0 <= min_conf <= 1.0:
        raise ValueError(f"min_conf {min_conf} outside [0, 1]")
    if result.confidence < min_conf:
        return IluRejection(
            RejectReason.LOW_CONFIDENCE, result.text, result.confidence
        )
    normalized = normalize_confusions(result.text, pattern)
    match = pattern.regex.search(normalized)
    if match is None:
        return IluRejection(RejectReason.NO_PREFIX, result.text, result.confidence)
    prefix, digits = match.group(1), match.group(2)
    if pattern.check_digit is not None and not pattern.check_digit(digits):
        return IluRejection(RejectReason.NO_PREFIX, result.text, result.confidence)
    return IluCodeReading(
        prefix=prefix,
        digits=digits,
        raw_text=result.text,
        confidence=result.confidence,
        frame_index=frame_index,
        region=region,
    )
