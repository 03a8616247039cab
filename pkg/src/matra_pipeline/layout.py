"""Run-length smoothing layout analysis: text vs non-text blocks.

The classic recipe: smear short background runs horizontally and vertically,
AND the two results, smear once more horizontally, and take the connected
components as layout units.  Component boxes are then grouped into blocks
(lines closer than ~1.2 line heights belong together) and classified by run
length and ink density.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import BinaryImage, Rect, component_sizes, label_ink
from scipy import ndimage

MIN_BLOCK_PIXELS = 50
DENSITY_RANGE = (0.05, 0.6)
RUN_FACTOR = 4.0          # text iff mean run < RUN_FACTOR * stroke width
GROUP_FACTOR = 1.2        # blocks merge across gaps up to this many line heights


@dataclass(frozen=True)
class Block:
    bbox: Rect
    kind: str             # "text" or "non_text"
    ink_density: float
    mean_run: float


@dataclass(frozen=True)
class PageLayout:
    blocks: tuple[Block, ...]
    page_size: tuple[int, int]


def rlsa_smear(img: BinaryImage, threshold: int, axis: str) -> BinaryImage:
    """Fill background runs of length <= threshold strictly between ink.

    Runs touching the image border stay background.  ``axis`` is
    ``"horizontal"`` or ``"vertical"``.
    """
    if threshold < 0:
        raise ValueError("smear threshold must be >= 0")
    if axis not in ("horizontal", "vertical"):
        raise ValueError(f"unknown axis {axis!r}")
    ink = img.pixels if axis == "horizontal" else img.pixels.T
    out = ink.copy()
    if threshold > 0:
        n = out.shape[1]
        for row in out:
            idx = np.flatnonzero(row)
            if idx.size < 2:
                continue
            gaps = np.diff(idx)
            fill = (gaps > 1) & (gaps <= threshold + 1)
            if not fill.any():
                continue
            starts = idx[:-1][fill] + 1
            ends = idx[1:][fill]
            delta = np.zeros(n + 1, dtype=np.int32)
            np.add.at(delta, starts, 1)
            np.add.at(delta, ends, -1)
            row |= np.cumsum(delta[:-1]) > 0
    return BinaryImage(out if axis == "horizontal" else out.T)


def _run_lengths(ink: np.ndarray) -> np.ndarray:
    """Lengths of all maximal horizontal ink runs."""
    if ink.size == 0 or not ink.any():
        return np.array([], dtype=np.int64)
    padded = np.zeros((ink.shape[0], ink.shape[1] + 2), dtype=np.int8)
    padded[:, 1:-1] = ink
    flat = padded.ravel()
    d = np.diff(flat)
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1)
    return ends - starts


def estimate_line_height(img: BinaryImage) -> float:
    """Median component height: a cheap stand-in for the text line height."""
    labels, count = label_ink(img)
    if count == 0:
        return 0.0
    slices = ndimage.find_objects(labels)
    heights = [s[0].stop - s[0].start for s in slices if s is not None]
    return float(np.median(heights))


def classify_block(img: BinaryImage, bbox: Rect,
                   stroke_width: float | None = None) -> str:
    """Text iff the mean horizontal run stays near the stroke width and the
    ink density is plausible for glyphs."""
    if bbox.x < 0 or bbox.y < 0 or bbox.right > img.width or bbox.bottom > img.height:
        raise ValueError(f"bbox {bbox} outside image")
    if stroke_width is None:
        stroke_width = _stroke_width(img)
    region = img.pixels[bbox.y:bbox.bottom, bbox.x:bbox.right]
    density = float(region.sum()) / bbox.area
    runs = _run_lengths(region)
    mean_run = float(runs.mean()) if runs.size else 0.0
    lo, hi = DENSITY_RANGE
    if lo <= density <= hi and mean_run < RUN_FACTOR * stroke_width:
        return "text"
    return "non_text"


def _stroke_width(img: BinaryImage) -> float:
    runs = _run_lengths(img.pixels)
    return float(np.median(runs)) if runs.size else 1.0


def _component_boxes(img: BinaryImage) -> list[tuple[Rect, int]]:
    labels, count = label_ink(img)
    if count == 0:
        return []
    sizes = component_sizes(labels, count)
    out = []
    for cid, sl in enumerate(ndimage.find_objects(labels), start=1):
        if sl is None:
            continue
        rect = Rect(sl[1].start, sl[0].start,
                    sl[1].stop - sl[1].start, sl[0].stop - sl[0].start)
        out.append((rect, int(sizes[cid])))
    return out


def _near(a: Rect, b: Rect, vertical_slack: int) -> bool:
    if a.overlaps(b):
        return True
    h_overlap = a.x < b.right and b.x < a.right
    v_gap = max(b.y - a.bottom, a.y - b.bottom)
    return h_overlap and v_gap <= vertical_slack


def _merge_boxes(rects: list[Rect], vertical_slack: int) -> list[Rect]:
    """Union boxes that overlap, or that share columns and sit within
    ``vertical_slack`` rows of each other, until no such pair remains."""
    rects = list(rects)
    merged = True
    while merged:
        merged = False
        for i in range(len(rects)):
            for j in range(i + 1, len(rects)):
                if _near(rects[i], rects[j], vertical_slack):
                    rects[i] = rects[i].union(rects[j])
                    del rects[j]
                    merged = True
                    break
            if merged:
                break
    return rects


def _absorb_small(rects: list[Rect], small: list[Rect], vertical_slack: int) -> list[Rect]:
    """Fold sub-threshold components (detached dots, small marks) into the
    block they sit next to; components far from every block stay suppressed."""
    pending = list(small)
    changed = True
    while changed:
        changed = False
        for s in pending[:]:
            for i, r in enumerate(rects):
                if _near(r, s, vertical_slack):
                    rects[i] = r.union(s)
                    pending.remove(s)
                    changed = True
                    break
    return rects


def smear_thresholds(img: BinaryImage, smear_h: int | None = None,
                     smear_v: int | None = None) -> tuple[int, int]:
    """Resolve smear thresholds, defaulting to multiples of the estimated
    line height: horizontal 5x (clamped to [20, 300]), vertical 0.8x
    (clamped to [10, 60])."""
    if smear_h is not None and smear_v is not None:
        return smear_h, smear_v
    line_height = estimate_line_height(img)
    if smear_h is None:
        smear_h = int(round(min(300, max(20, 5.0 * line_height))))
    if smear_v is None:
        smear_v = int(round(min(60, max(10, 0.8 * line_height))))
    return smear_h, smear_v


def combined_smear(img: BinaryImage, smear_h: int, smear_v: int) -> BinaryImage:
    """AND of the two directional smears plus the short recombination smear."""
    out = BinaryImage(rlsa_smear(img, smear_h, "horizontal").pixels
                      & rlsa_smear(img, smear_v, "vertical").pixels)
    return rlsa_smear(out, smear_h // 4, "horizontal")


def rlsa_segment(img: BinaryImage, smear_h: int | None = None,
                 smear_v: int | None = None) -> PageLayout:
    """Divide the page into disjoint text / non-text blocks."""
    line_height = estimate_line_height(img)
    smear_h, smear_v = smear_thresholds(img, smear_h, smear_v)
    combined = combined_smear(img, smear_h, smear_v)
    boxes = _component_boxes(combined)
    big = [rect for rect, size in boxes if size >= MIN_BLOCK_PIXELS]
    small = [rect for rect, size in boxes if size < MIN_BLOCK_PIXELS]
    slack = int(round(GROUP_FACTOR * line_height)) if line_height else smear_v
    rects = _merge_boxes(big, slack)
    rects = _absorb_small(rects, small, slack)
    rects = _merge_boxes(rects, slack)
    rects.sort(key=lambda r: (r.y, r.x))
    stroke = _stroke_width(img)
    blocks = []
    for rect in rects:
        kind = classify_block(img, rect, stroke_width=stroke)
        region = img.pixels[rect.y:rect.bottom, rect.x:rect.right]
        runs = _run_lengths(region)
        blocks.append(Block(
            bbox=rect,
            kind=kind,
            ink_density=float(region.sum()) / rect.area,
            mean_run=float(runs.mean()) if runs.size else 0.0,
        ))
    return PageLayout(blocks=tuple(blocks), page_size=(img.width, img.height))
