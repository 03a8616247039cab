"""Scan-to-glyphs orchestration and result serialization.

One page flows binarize -> denoise -> deskew (estimate on the binary, rotate
the grayscale original, re-binarize) -> layout -> per-block segmentation.
Every stage is a pure function of its input, so a fixed input and config
always produce the same page model.
"""
from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import binarize as _bin
from .binarize import GlobalThresholdConfig, LocalThresholdConfig
from .denoise import DenoiseConfig, denoise_binary
from .deskew import SkewEstimate, estimate_skew
from .errors import EmptyImageError, InsufficientInkError, UniformImageError
from .layout import Block, PageLayout, combined_smear, rlsa_segment, \
    smear_thresholds, _run_lengths
from .raster import BinaryImage, GrayImage, Rect, rotate_gray, save_pgm
from .segment import SegmentConfig, TextLine, segment_block

BINARIZE_METHODS = ("global", "otsu", "niblack", "adaptive-niblack", "sauvola")

OVERLAY_LINE = 64
OVERLAY_WORD = 128
OVERLAY_GLYPH = 192


@dataclass(frozen=True)
class StageFlags:
    denoise: bool = True
    deskew: bool = True
    layout: bool = True
    median: bool = False   # gray median pass at the head of the denoise stage


@dataclass(frozen=True)
class PipelineConfig:
    method: str = "otsu"
    global_threshold: GlobalThresholdConfig = GlobalThresholdConfig(128)
    local_threshold: LocalThresholdConfig = LocalThresholdConfig(15, _bin.NIBLACK_K)
    denoise: DenoiseConfig = DenoiseConfig()
    max_skew: float = 15.0
    skew_step: float = 0.1
    smear_h: Optional[int] = None
    smear_v: Optional[int] = None
    segment: SegmentConfig = SegmentConfig()
    stages: StageFlags = StageFlags()
    debug_dir: Optional[str] = None
    dump_glyphs: Optional[str] = None

    def __post_init__(self):
        if self.method not in BINARIZE_METHODS:
            raise ValueError(f"unknown binarize method {self.method!r}")


@dataclass(frozen=True)
class BlockResult:
    bbox: Rect
    kind: str
    lines: tuple[TextLine, ...]


@dataclass(frozen=True)
class PageResult:
    source: str
    skew: Optional[SkewEstimate]
    layout: PageLayout
    blocks: tuple[BlockResult, ...]
    timings: dict = field(compare=False)


def binarize_image(gray: GrayImage, cfg: PipelineConfig) -> BinaryImage:
    if cfg.method == "global":
        return _bin.global_fixed(gray, cfg.global_threshold)
    try:
        if cfg.method == "otsu":
            return _bin.otsu(gray)
        if cfg.method == "niblack":
            return _bin.niblack(gray, cfg.local_threshold)
        if cfg.method == "sauvola":
            return _bin.sauvola(gray, cfg.local_threshold)
        return _bin.adaptive_niblack(gray)
    except UniformImageError:
        # a featureless page holds no ink
        return BinaryImage(np.zeros(gray.pixels.shape, dtype=bool))


def _fallback_layout(img: BinaryImage) -> PageLayout:
    """Whole-ink single text block, for runs with the layout stage disabled."""
    ys, xs = np.nonzero(img.pixels)
    if len(xs) == 0:
        return PageLayout(blocks=(), page_size=(img.width, img.height))
    bbox = Rect(int(xs.min()), int(ys.min()),
                int(xs.max() - xs.min()) + 1, int(ys.max() - ys.min()) + 1)
    region = img.pixels[bbox.y:bbox.bottom, bbox.x:bbox.right]
    runs = _run_lengths(region)
    block = Block(bbox=bbox, kind="text",
                  ink_density=float(region.sum()) / bbox.area,
                  mean_run=float(runs.mean()) if runs.size else 0.0)
    return PageLayout(blocks=(block,), page_size=(img.width, img.height))


class _StageTimer:
    """Times a stage and labels any error it raises with the stage name."""

    def __init__(self, name: str, timings: dict):
        self.name = name
        self.timings = timings

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.timings[self.name] = (time.perf_counter() - self.t0) * 1000.0
        if exc is not None and isinstance(exc, ValueError) \
                and not getattr(exc, "_stage_tagged", False):
            exc.args = (f"{self.name} stage: {exc.args[0] if exc.args else ''}",)
            exc._stage_tagged = True
        return False


def run_pipeline(gray: GrayImage, cfg: PipelineConfig,
                 source: str = "<memory>") -> PageResult:
    """Process one grayscale page into the nested block/line/word/glyph model."""
    timings: dict[str, float] = {}
    intermediates: dict[str, object] = {"gray": gray}

    with _StageTimer("binarize", timings):
        binary = binarize_image(gray, cfg)
    intermediates["binary"] = binary

    with _StageTimer("denoise", timings):
        if cfg.stages.denoise and binary.ink_count:
            binary = denoise_binary(binary, cfg.denoise,
                                    use_median=cfg.stages.median)
    intermediates["denoised"] = binary

    est: Optional[SkewEstimate] = None
    deskewed_gray = gray
    with _StageTimer("deskew", timings):
        if cfg.stages.deskew:
            try:
                est = estimate_skew(binary, cfg.max_skew, cfg.skew_step)
            except (EmptyImageError, InsufficientInkError):
                est = None
            if est is not None and est.theta_degrees != 0.0:
                deskewed_gray = rotate_gray(gray, -est.theta_degrees)
                binary = binarize_image(deskewed_gray, cfg)
                if cfg.stages.denoise and binary.ink_count:
                    binary = denoise_binary(binary, cfg.denoise,
                                            use_median=cfg.stages.median)
    intermediates["deskewed"] = deskewed_gray
    intermediates["final_binary"] = binary

    with _StageTimer("layout", timings):
        if cfg.stages.layout:
            layout = rlsa_segment(binary, cfg.smear_h, cfg.smear_v)
        else:
            layout = _fallback_layout(binary)

    with _StageTimer("segment", timings):
        blocks = []
        for block in layout.blocks:
            lines: tuple[TextLine, ...] = ()
            if block.kind == "text":
                lines = tuple(segment_block(binary, block.bbox, cfg.segment))
            blocks.append(BlockResult(bbox=block.bbox, kind=block.kind,
                                      lines=lines))

    result = PageResult(source=source, skew=est, layout=layout,
                        blocks=tuple(blocks), timings=timings)
    if cfg.debug_dir:
        dump_debug(result, intermediates, cfg.debug_dir,
                   smear=(cfg.smear_h, cfg.smear_v))
    if cfg.dump_glyphs:
        _dump_glyph_crops(result, binary, cfg.dump_glyphs)
    return result


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def _rect(rect: Rect):
    return [rect.x, rect.y, rect.w, rect.h]


def emit_json(result: PageResult, include_timings: bool = True) -> str:
    """Canonical JSON: documented key order, floats capped at 4 decimals,
    LF endings.  Golden-file comparisons drop the (wall-clock) timings."""
    doc = {
        "source": result.source,
        "skew": {
            "theta": round(result.skew.theta_degrees, 4) if result.skew else 0.0,
            "score": round(result.skew.score, 4) if result.skew else 0.0,
        },
        "blocks": [
            {
                "bbox": _rect(block.bbox),
                "kind": block.kind,
                "lines": [
                    {
                        "bbox": _rect(line.bbox),
                        "matra": list(line.matra_span) if line.matra_span else None,
                        "baseline": line.baseline_row,
                        "words": [
                            {
                                "bbox": _rect(word.bbox),
                                "glyphs": [
                                    {"bbox": _rect(g.bbox),
                                     "zone_class": g.zone_class}
                                    for g in word.glyphs
                                ],
                            }
                            for word in line.words
                        ],
                    }
                    for line in block.lines
                ],
            }
            for block in result.blocks
        ],
    }
    if include_timings:
        doc["timings"] = {k: round(v, 4) for k, v in result.timings.items()}
    return json.dumps(doc, indent=1) + "\n"


def write_atomic(path: str, data: bytes):
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# Debug artifacts
# ---------------------------------------------------------------------------

def _draw_rect(canvas: np.ndarray, rect: Rect, value: int):
    h, w = canvas.shape
    x0 = max(0, rect.x)
    y0 = max(0, rect.y)
    x1 = min(w - 1, rect.right - 1)
    y1 = min(h - 1, rect.bottom - 1)
    if x0 > x1 or y0 > y1:
        return
    canvas[y0, x0:x1 + 1] = value
    canvas[y1, x0:x1 + 1] = value
    canvas[y0:y1 + 1, x0] = value
    canvas[y0:y1 + 1, x1] = value


def build_overlay(result: PageResult, base: GrayImage) -> GrayImage:
    """Line/word/glyph boxes burned into the page at gray 64/128/192."""
    canvas = base.pixels.copy()
    for block in result.blocks:
        for line in block.lines:
            _draw_rect(canvas, line.bbox, OVERLAY_LINE)
    for block in result.blocks:
        for line in block.lines:
            for word in line.words:
                _draw_rect(canvas, word.bbox, OVERLAY_WORD)
    for block in result.blocks:
        for line in block.lines:
            for word in line.words:
                for glyph in word.glyphs:
                    _draw_rect(canvas, glyph.bbox, OVERLAY_GLYPH)
    return GrayImage(canvas)


def dump_debug(result: PageResult, intermediates: dict, directory: str,
               smear: tuple[Optional[int], Optional[int]] = (None, None)):
    """Write the numbered stage images (01-gray .. 06-overlay) as PGM."""
    os.makedirs(directory, exist_ok=True)
    final_binary: BinaryImage = intermediates["final_binary"]
    smear_h, smear_v = smear_thresholds(final_binary, *smear)
    images = {
        "01-gray": intermediates["gray"],
        "02-binary": intermediates["binary"],
        "03-denoised": intermediates["denoised"],
        "04-deskewed": intermediates["deskewed"],
        "05-rlsa": combined_smear(final_binary, smear_h, smear_v),
        "06-overlay": build_overlay(result, intermediates["deskewed"]),
    }
    for name, img in images.items():
        write_atomic(os.path.join(directory, f"{name}.pgm"), save_pgm(img))


def _dump_glyph_crops(result: PageResult, binary: BinaryImage, directory: str):
    os.makedirs(directory, exist_ok=True)
    index = 0
    for block in result.blocks:
        for line in block.lines:
            for word in line.words:
                for glyph in word.glyphs:
                    r = glyph.bbox
                    crop = BinaryImage(binary.pixels[r.y:r.bottom, r.x:r.right])
                    write_atomic(os.path.join(directory, f"glyph_{index:05d}.pgm"),
                                 save_pgm(crop))
                    index += 1
