"""Line, word, and glyph segmentation for headline (matra) scripts.

Lines fall out of the row histogram, words out of width-thresholded column
gaps.  Within a word the headline bar is located as the dominant row peak and
erased, the middle zone is cut at empty columns, pieces that never reach the
baseline are merged rightward (a stroke pair can separate once the bar that
joined it is gone), and lower/upper-zone satellites are attached to the glyph
they overlap most.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .errors import InvalidBaselineError
from .raster import BinaryImage, Rect, column_histogram, row_histogram

_EIGHT = np.ones((3, 3), dtype=bool)

MIN_LINE_HEIGHT = 3
BASELINE_DROP_RATIO = 0.3
MATRA_DOMINANCE = 0.5          # peak must cover half the region width
THIN_GLYPH_RATIO = 0.5         # of the middle-zone height

ZONE_BASE = "base"
ZONE_UPPER = "upper_modifier"
ZONE_MIDDLE = "middle_modifier"
ZONE_LOWER = "lower_modifier"
ZONE_UPPER_MIDDLE = "upper_middle_modifier"


@dataclass(frozen=True)
class SegmentConfig:
    blank_row_tolerance: int = 0       # rows with this much ink still count as blank
    word_gap_factor: float = 0.25      # of the line height
    matra_extend_ratio: float = 0.85   # rows this close to the peak join the bar
    baseline_touch_tolerance: int = 2  # rows a base glyph may stop short

    def __post_init__(self):
        if self.blank_row_tolerance < 0:
            raise ValueError("blank row tolerance must be >= 0")
        if not 0.0 <= self.word_gap_factor < 1.0:
            raise ValueError("word gap factor must be in [0, 1)")
        if not 0.0 < self.matra_extend_ratio <= 1.0:
            raise ValueError("matra extend ratio must be in (0, 1]")
        if self.baseline_touch_tolerance < 0:
            raise ValueError("baseline tolerance must be >= 0")


@dataclass(frozen=True)
class Glyph:
    bbox: Rect
    zone_class: str
    pixels: np.ndarray  # (n, 2) absolute (x, y)


@dataclass(frozen=True)
class Word:
    bbox: Rect
    glyphs: tuple[Glyph, ...]


@dataclass(frozen=True)
class TextLine:
    bbox: Rect
    matra_span: Optional[tuple[int, int]]
    baseline_row: int
    words: tuple[Word, ...]


# ---------------------------------------------------------------------------
# Lines and words
# ---------------------------------------------------------------------------

def _runs(mask: np.ndarray):
    """(start, stop) pairs of maximal True runs; stop is exclusive."""
    padded = np.concatenate([[False], mask, [False]])
    d = np.diff(padded.astype(np.int8))
    return list(zip(np.flatnonzero(d == 1), np.flatnonzero(d == -1)))


def segment_lines(img: BinaryImage, block: Rect, cfg: SegmentConfig) -> list[Rect]:
    """Maximal row runs with more ink than the blank tolerance, each
    tightened horizontally to its ink; runs under 3 rows are noise."""
    hist = row_histogram(img, block)
    lines = []
    for start, stop in _runs(hist > cfg.blank_row_tolerance):
        if stop - start < MIN_LINE_HEIGHT:
            continue
        band = Rect(block.x, block.y + int(start), block.w, int(stop - start))
        cols = column_histogram(img, band)
        occupied = np.flatnonzero(cols)
        x0, x1 = int(occupied[0]), int(occupied[-1])
        lines.append(Rect(block.x + x0, band.y, x1 - x0 + 1, band.h))
    return lines


def segment_words(img: BinaryImage, line: Rect, cfg: SegmentConfig) -> list[Rect]:
    """Split a line at empty column runs at least max(2, beta*height) wide.

    Narrower gaps stay inside the word: headline-less glyphs sit a pixel or
    two clear of their neighbors and must not become words of their own.
    """
    hist = column_histogram(img, line)
    ink_runs = _runs(hist > 0)
    if not ink_runs:
        return []
    min_gap = max(2.0, cfg.word_gap_factor * line.h)
    groups = [[ink_runs[0]]]
    for run in ink_runs[1:]:
        gap = run[0] - groups[-1][-1][1]
        if gap >= min_gap:
            groups.append([run])
        else:
            groups[-1].append(run)
    words = []
    for group in groups:
        c0, c1 = int(group[0][0]), int(group[-1][1]) - 1
        span = Rect(line.x + c0, line.y, c1 - c0 + 1, line.h)
        rows = np.flatnonzero(row_histogram(img, span))
        y0, y1 = int(rows[0]), int(rows[-1])
        words.append(Rect(span.x, line.y + y0, span.w, y1 - y0 + 1))
    return words


# ---------------------------------------------------------------------------
# Headline bar and baseline
# ---------------------------------------------------------------------------

def detect_matra(img: BinaryImage, region: Rect,
                 cfg: SegmentConfig) -> Optional[tuple[int, int]]:
    """Dominant-row span, or None when no row covers half the region width.

    The peak row (ties: topmost) extends to every contiguous row whose count
    reaches ``matra_extend_ratio`` of the peak, tracking the bar's thickness.
    """
    hist = row_histogram(img, region)
    peak_row = int(np.argmax(hist))
    peak = int(hist[peak_row])
    if peak < MATRA_DOMINANCE * region.w:
        return None
    floor = cfg.matra_extend_ratio * peak
    top = peak_row
    while top > 0 and hist[top - 1] >= floor:
        top -= 1
    bottom = peak_row
    while bottom + 1 < len(hist) and hist[bottom + 1] >= floor:
        bottom += 1
    return region.y + top, region.y + bottom


def detect_baseline(img: BinaryImage, line: Rect, cfg: SegmentConfig) -> int:
    """Row of the sharpest ink drop in the lower half of the line.

    A weak drop (under 30% of the peak row count) means the line has no
    lower zone, and the baseline coincides with the line's bottom row.
    """
    if line.h < 4:
        raise ValueError("line too short for baseline detection")
    hist = row_histogram(img, line)
    peak = int(hist.max())
    best_b, best_drop = None, None
    for b in range(line.h // 2, line.h - 1):
        drop = int(hist[b]) - int(hist[b + 1])
        if best_drop is None or drop > best_drop:
            best_b, best_drop = b, drop
    if best_drop is None or best_drop < BASELINE_DROP_RATIO * peak:
        return line.y + line.h - 1
    return line.y + best_b


# ---------------------------------------------------------------------------
# Glyph extraction
# ---------------------------------------------------------------------------

class _Piece:
    __slots__ = ("xs", "ys", "touches")

    def __init__(self, xs, ys, touches):
        self.xs = xs
        self.ys = ys
        self.touches = touches

    def merge(self, other: "_Piece") -> "_Piece":
        return _Piece(np.concatenate([self.xs, other.xs]),
                      np.concatenate([self.ys, other.ys]),
                      self.touches or other.touches)

    @property
    def col_span(self):
        return int(self.xs.min()), int(self.xs.max())


def _zone_components(region: np.ndarray):
    labels, count = ndimage.label(region, structure=_EIGHT)
    comps = []
    for cid in range(1, count + 1):
        ys, xs = np.nonzero(labels == cid)
        comps.append((xs, ys))
    return comps


def classify_glyph_zone(pixels: np.ndarray, matra: Optional[tuple[int, int]],
                        baseline: int) -> str:
    """Zone occupancy mapping for one glyph's pixels.

    Thin middle-zone ink marks a modifier; anything carrying real body width
    in the middle zone counts as a base character.
    """
    ys = pixels[:, 1]
    xs = pixels[:, 0]
    above = (ys < matra[0]) if matra else np.zeros(len(ys), dtype=bool)
    if matra:
        middle = (ys > matra[1]) & (ys <= baseline)
    else:
        middle = ys <= baseline
    below = ys > baseline
    has_u, has_m, has_l = bool(above.any()), bool(middle.any()), bool(below.any())
    if has_l and not has_u and not has_m:
        return ZONE_LOWER
    if has_u and not has_m and not has_l:
        return ZONE_UPPER
    if not has_m:
        return ZONE_BASE
    mid_xs = xs[middle]
    width = int(mid_xs.max()) - int(mid_xs.min()) + 1
    if matra:
        zone_height = baseline - matra[1]
    else:
        zone_height = baseline - int(ys.min()) + 1
    thin = width < THIN_GLYPH_RATIO * zone_height
    if has_u and thin:
        return ZONE_UPPER_MIDDLE
    if thin and not has_u and not has_l:
        return ZONE_MIDDLE
    return ZONE_BASE


def segment_characters(img: BinaryImage, word: Rect,
                       matra: Optional[tuple[int, int]], baseline: int,
                       cfg: SegmentConfig) -> list[Glyph]:
    """Cut one word into glyphs.

    The headline bar rows are erased first, so bar-joined glyphs separate.
    Middle-zone column runs become candidates; candidates whose ink stops
    more than ``baseline_touch_tolerance`` rows above the baseline merge into
    their right neighbor (a trailing one merges leftward).  Components below
    the baseline and above the bar attach to the glyph sharing the most
    columns, or stand alone when they overlap none.
    """
    if not word.y <= baseline < word.bottom:
        raise InvalidBaselineError(f"baseline {baseline} outside word rows "
                                   f"[{word.y}, {word.bottom})")
    region = img.pixels[word.y:word.bottom, word.x:word.right].copy()
    if matra is not None:
        m0 = max(matra[0] - word.y, 0)
        m1 = min(matra[1] - word.y, word.h - 1)
        region[m0:m1 + 1, :] = False
        mid_top = m1 + 1
    else:
        mid_top = 0
    base_rel = baseline - word.y

    band = region[mid_top:base_rel + 1, :]
    pieces = []
    if band.size:
        col_ink = band.any(axis=0)
        for c0, c1 in _runs(col_ink):
            sub = band[:, c0:c1]
            ys, xs = np.nonzero(sub)
            ys = ys + mid_top
            xs = xs + c0
            touches = bool(ys.max() >= base_rel - cfg.baseline_touch_tolerance)
            pieces.append(_Piece(xs, ys, touches))

    glyphs: list[_Piece] = []
    carry = None
    for piece in pieces:
        current = carry.merge(piece) if carry else piece
        if current.touches:
            glyphs.append(current)
            carry = None
        else:
            carry = current
    if carry is not None:
        if glyphs:
            glyphs[-1] = glyphs[-1].merge(carry)
        else:
            glyphs.append(carry)

    def attach(components):
        for xs, ys in components:
            c0, c1 = int(xs.min()), int(xs.max())
            best, best_overlap = None, 0
            for piece in glyphs:
                g0, g1 = piece.col_span
                overlap = min(c1, g1) - max(c0, g0) + 1
                if overlap > best_overlap:
                    best, best_overlap = piece, overlap
            satellite = _Piece(xs, ys, False)
            if best is None:
                glyphs.append(satellite)
            else:
                glyphs[glyphs.index(best)] = best.merge(satellite)

    lower = region[base_rel + 1:, :]
    if lower.size:
        comps = [(xs, ys + base_rel + 1) for xs, ys in _zone_components(lower)]
        attach(comps)
    if matra is not None:
        top_rel = max(matra[0] - word.y, 0)
        if top_rel > 0:
            attach(_zone_components(region[:top_rel, :]))

    out = []
    for piece in glyphs:
        xs = piece.xs + word.x
        ys = piece.ys + word.y
        pixels = np.column_stack([xs, ys]).astype(np.int32)
        bbox = Rect(int(xs.min()), int(ys.min()),
                    int(xs.max() - xs.min()) + 1, int(ys.max() - ys.min()) + 1)
        out.append(Glyph(bbox=bbox,
                         zone_class=classify_glyph_zone(pixels, matra, baseline),
                         pixels=pixels))
    out.sort(key=lambda g: (g.bbox.x, g.bbox.y))
    return out


# ---------------------------------------------------------------------------
# Block-level composition
# ---------------------------------------------------------------------------

def segment_block(img: BinaryImage, block: Rect, cfg: SegmentConfig) -> list[TextLine]:
    """Full decomposition of one text block into lines, words, and glyphs."""
    result = []
    for line in segment_lines(img, block, cfg):
        line_matra = detect_matra(img, line, cfg)
        if line.h >= 4:
            baseline = detect_baseline(img, line, cfg)
        else:
            baseline = line.bottom - 1
        words = []
        for word_rect in segment_words(img, line, cfg):
            word_baseline = min(max(baseline, word_rect.y), word_rect.bottom - 1)
            word_matra = detect_matra(img, word_rect, cfg)
            if word_matra is not None and word_matra[1] >= word_baseline:
                word_matra = None  # degenerate: the bar would swallow the body
            glyphs = segment_characters(img, word_rect, word_matra,
                                        word_baseline, cfg)
            if glyphs:
                words.append(Word(bbox=Rect.bounding([g.bbox for g in glyphs]),
                                  glyphs=tuple(glyphs)))
        result.append(TextLine(bbox=line, matra_span=line_matra,
                               baseline_row=baseline, words=tuple(words)))
    return result
