"""Preprocessing and segmentation front end for matra-script documents.

The package turns a scanned grayscale page into a structured page model:
binarization, noise cleanup, skew correction, run-length layout analysis,
and headline/baseline driven line -> word -> glyph segmentation, plus a
synthetic page generator that provides exact ground truth for testing.
"""

from .binarize import (
    GlobalThresholdConfig,
    LocalThresholdConfig,
    adaptive_niblack,
    choose_adaptive_config,
    global_fixed,
    niblack,
    otsu,
    otsu_threshold,
    sauvola,
)
from .denoise import (
    DenoiseConfig,
    denoise_binary,
    median_filter,
    remove_background_components,
    remove_single_pixels,
    smooth_staircase,
)
from .deskew import (
    Envelope,
    SkewEstimate,
    deskew_page,
    deskew_page_binary,
    estimate_skew,
    upper_envelope,
)
from .errors import (
    EmptyImageError,
    InsufficientInkError,
    InvalidBaselineError,
    PageGeometryError,
    PgmError,
    UniformImageError,
)
from .layout import Block, PageLayout, classify_block, rlsa_segment, rlsa_smear
from .pipeline import (
    BlockResult,
    PageResult,
    PipelineConfig,
    StageFlags,
    emit_json,
    run_pipeline,
)
from .raster import (
    BinaryImage,
    Component,
    GrayImage,
    Rect,
    WindowStats,
    column_histogram,
    connected_components,
    gray_from_rgb,
    load_pgm,
    rotate_binary,
    rotate_gray,
    row_histogram,
    save_pgm,
    window_stats,
)
from .segment import (
    Glyph,
    SegmentConfig,
    TextLine,
    Word,
    classify_glyph_zone,
    detect_baseline,
    detect_matra,
    segment_block,
    segment_characters,
    segment_lines,
    segment_words,
)
from .synthgen import (
    GroundTruth,
    PageSpec,
    apply_skew,
    inject_noise,
    plan_page,
    render_page,
)

__version__ = "0.1.0"
