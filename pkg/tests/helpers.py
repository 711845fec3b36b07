"""Shared generators for randomized test instances."""
from __future__ import annotations

import random

import numpy as np

from iluscan import (
    AxisAlignedBox,
    Backends,
    Detection,
    Frame,
    FullCropTextDetector,
    OcrResult,
    StubDetector,
    StubOcr,
)


def int_box(rng: random.Random, limit: int = 64, max_side: int | None = None) -> AxisAlignedBox:
    """Random integer box inside [0, limit)^2 with positive extent."""
    side = max_side or limit
    w = rng.randint(1, min(side, limit - 1))
    h = rng.randint(1, min(side, limit - 1))
    x0 = rng.randint(0, limit - 1 - w)
    y0 = rng.randint(0, limit - 1 - h)
    return AxisAlignedBox(x0, y0, x0 + w, y0 + h)


def float_box(rng: random.Random, width: float, height: float) -> AxisAlignedBox:
    x0 = rng.uniform(0, width - 2)
    y0 = rng.uniform(0, height - 2)
    x1 = rng.uniform(x0 + 1, width)
    y1 = rng.uniform(y0 + 1, height)
    return AxisAlignedBox(x0, y0, x1, y1)


def distinct_scores(rng: random.Random, n: int) -> list[float]:
    """Scores guaranteed pairwise distinct (threshold oracles need it)."""
    return [v / 10000.0 for v in rng.sample(range(1, 10000), n)]


def random_detections(
    rng: random.Random,
    n: int,
    labels: tuple[str, ...] = ("sb_DB",),
    limit: int = 64,
    tie_scores: bool = False,
) -> list[Detection]:
    if tie_scores:
        scores = [rng.randrange(1, 11) / 10.0 for _ in range(n)]
    else:
        scores = distinct_scores(rng, n)
    return [
        Detection(int_box(rng, limit), rng.choice(labels), scores[i])
        for i in range(n)
    ]


def solid_frame(
    width: int, height: int, value: tuple[int, int, int] = (120, 120, 120), index: int = 0
) -> Frame:
    pixels = np.full((height, width, 3), value, dtype=np.uint8)
    return Frame.from_array(pixels, index)


def noise_frame(rng_seed: int, width: int = 64, height: int = 48) -> Frame:
    pixels = np.random.default_rng(rng_seed).integers(
        0, 256, size=(height, width, 3), dtype=np.uint8
    )
    return Frame.from_array(np.ascontiguousarray(pixels))


def scene_backends(scene, confidence: float = 0.995) -> Backends:
    """Wire stub backends that replay a synthetic scene's ground truth."""
    return Backends(
        detector=StubDetector(
            script={scene.frame.frame_index: [Detection(scene.truth.detection_box, "sb_DB", 0.9)]}
        ),
        text=FullCropTextDetector(),
        ocr_engine=StubOcr(script=(OcrResult(scene.truth.code, confidence),)),
    )
