"""Swap-body detection and ILU code reading pipeline.

Detect swap-bodies with a pluggable backend, crop each detection's
lower half, localize text there, read it with an OCR-engine adapter,
and validate the ILU code, plus the dataset tooling, evaluation kit
and synthetic scenes used to test all of it.
"""

from .config import CliConfig, PipelineConfig, load_cli_config
from .data_tools import (
    AnnotationRecord,
    AugmentationKind,
    AugmentationSpec,
    TrainingConfig,
    annotations_to_csv,
    augment,
    default_augmentations,
    emit_training_config,
    load_training_config,
    parse_annotation,
    parse_csv,
    split_dataset,
)
from .detection import (
    DetectorBackend,
    LabelMap,
    OpenCvSsdDetector,
    StubDetector,
    SWAP_BODY_LABEL,
    filter_by_score,
    greedy_nms,
    infer,
    load_label_map,
)
from .errors import (
    BackendFailure,
    ConfigError,
    DuplicateId,
    EmptyBox,
    EngineFailure,
    EngineUnavailable,
    IluScanError,
    InputShapeError,
    MapShapeError,
    MissingField,
    ParseError,
    SceneInfeasible,
    StageError,
    ZeroTruth,
)
from .evalkit import (
    EvalResult,
    average_precision,
    evaluate,
    evaluate_files,
    load_predictions_ndjson,
    load_truth_csv,
    match_detections,
    mean_average_precision,
)
from .geometry import (
    AxisAlignedBox,
    Detection,
    Frame,
    RotatedBox,
    clip_box,
    intersect_box,
    iou,
    rotate_point,
    rotated_to_corners,
)
from .ocr import (
    DEFAULT_PATTERN,
    EngineMode,
    IluCodeReading,
    IluPattern,
    IluRejection,
    OcrConfig,
    OcrEngine,
    OcrResult,
    RejectReason,
    SegmentationMode,
    StubOcr,
    TesseractOcr,
    normalize_confusions,
    parse_ilu,
    recognize,
)
from .pipeline import (
    AcceptedCode,
    Backends,
    FrameReport,
    TemporalAggregator,
    VideoResult,
    VideoSummary,
    aggregator_update,
    process_image,
    process_video,
    report_to_dict,
    summary_to_dict,
    write_ndjson,
)
from .roi import (
    AspectDecision,
    RoiCrop,
    aspect_gate,
    box_to_frame,
    crop_and_resize,
    lower_half,
    region_to_frame,
    size_to_multiple_of_32,
)
from .sources import (
    FrameSource,
    ImageDirectorySource,
    ImageFileSource,
    ListSource,
    VideoFileSource,
    open_source,
)
from .synth import (
    SceneSpec,
    SceneTruth,
    SyntheticScene,
    generate_suite,
    render,
    render_text,
    text_extent,
    write_suite,
)
from .text_detect import (
    CH_ANGLE,
    CH_BOTTOM,
    CH_LEFT,
    CH_RIGHT,
    CH_TOP,
    EastMaps,
    FullCropTextDetector,
    MAP_STRIDE,
    OpenCvEastDetector,
    StubTextDetector,
    TextBackend,
    TextRegion,
    decode_east,
    detect_text,
    east_maps_from_regions,
    envelope,
    suppress_text,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
