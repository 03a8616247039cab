"""Synthetic matra-script page renderer with exact ground truth.

Pages are built from stroke-pattern glyphs (stems, staircase connectors,
feet, hooks, dots, marks) joined by a continuous headline bar, laid out in
the three vertical zones of the script: upper (above the headline), middle
(headline to baseline), lower (below the baseline).  No font is involved, so
every box, headline row, and baseline row is known exactly — the renderer is
the oracle the rest of the test suite measures against.

Zone proportions are fixed at 25% / 55% / 20% of the nominal glyph height.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import PageGeometryError
from .raster import BACKGROUND, INK, GrayImage, Rect, rotate_gray, rotate_point

RNG_ALGORITHM = "numpy-pcg64"

BASE_KINDS = ("plain", "matraless", "dotted", "split_prone", "descender")
MARK_KINDS = ("middle_modifier", "lower_modifier", "upper_modifier",
              "upper_middle_modifier")
LOWER_KINDS = ("dotted", "descender", "lower_modifier")
UPPER_KINDS = ("upper_modifier", "upper_middle_modifier")

DEFAULT_MIX: dict[str, float] = {
    "matraless": 0.06,
    "dotted": 0.08,
    "split_prone": 0.08,
    "descender": 0.22,
    "middle_modifier": 0.04,
    "lower_modifier": 0.03,
    "upper_modifier": 0.03,
    "upper_middle_modifier": 0.02,
}

UPPER_FRACTION = 0.25
MIDDLE_FRACTION = 0.55
LOWER_FRACTION = 0.20


@dataclass(frozen=True)
class PageSpec:
    """Recipe for one synthetic page.

    ``scale`` is the nominal glyph height in pixels; ``lines`` counts lines
    per column.  ``glyph_mix`` maps fixture kinds to fractions, the remainder
    renders as plain glyphs.  A fixed ``seed`` reproduces the page exactly.
    """

    scale: int = 40
    lines: int = 8
    words_per_line: int | tuple[int, int] = (3, 5)
    glyphs_per_word: int | tuple[int, int] = (2, 5)
    glyph_mix: Optional[Mapping[str, float]] = None
    columns: int = 1
    image_block: Optional[Rect] = None
    noise: float = 0.0
    skew: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.scale < 28:
            raise PageGeometryError("scale below 28 px cannot host the glyph geometry")
        if self.lines < 0:
            raise PageGeometryError("negative line count")
        if self.columns not in (1, 2):
            raise PageGeometryError("columns must be 1 or 2")
        if not 0.0 <= self.noise <= 1.0:
            raise PageGeometryError("noise density outside [0, 1]")
        if abs(self.skew) > 45:
            raise PageGeometryError("skew outside +/-45 degrees")
        mix = dict(self.glyph_mix) if self.glyph_mix is not None else dict(DEFAULT_MIX)
        known = set(BASE_KINDS) | set(MARK_KINDS)
        for kind, frac in mix.items():
            if kind not in known:
                raise PageGeometryError(f"unknown glyph kind {kind!r}")
            if frac < 0:
                raise PageGeometryError("negative mix fraction")
        if sum(mix.values()) > 1.0 + 1e-9:
            raise PageGeometryError("glyph mix fractions exceed 1")
        object.__setattr__(self, "glyph_mix", mix)


@dataclass(frozen=True)
class GlyphTruth:
    rect: Rect            # strokes only; headline-bar pixels excluded
    zone_class: str
    kind: str


@dataclass(frozen=True)
class WordTruth:
    rect: Rect            # full ink extent including the headline bar
    matra_span: Optional[tuple[int, int]]
    glyphs: tuple[GlyphTruth, ...]


@dataclass(frozen=True)
class LineTruth:
    rect: Rect
    matra_span: Optional[tuple[int, int]]
    baseline_row: int
    has_lower_ink: bool
    has_upper_ink: bool
    column: int
    words: tuple[WordTruth, ...]


@dataclass(frozen=True)
class BlockTruth:
    rect: Rect
    kind: str             # "text" or "non_text"


@dataclass(frozen=True)
class GroundTruth:
    page_size: tuple[int, int]
    skew_true: float
    noise_density: float
    noise_pixels: tuple[tuple[int, int, int], ...]  # (x, y, value)
    rng_algorithm: str
    seed: int
    zone_fractions: tuple[float, float, float]
    blocks: tuple[BlockTruth, ...]
    lines: tuple[LineTruth, ...]


@dataclass(frozen=True)
class Metrics:
    """Pixel geometry derived from the nominal glyph height."""

    scale: int

    @property
    def upper_h(self):
        return round(UPPER_FRACTION * self.scale)

    @property
    def matra_top(self):
        return self.upper_h

    @property
    def matra_thickness(self):
        return max(1, round(0.06 * self.scale))

    @property
    def matra_bottom(self):
        return self.matra_top + self.matra_thickness - 1

    @property
    def body_top(self):
        return self.matra_bottom + 1

    @property
    def baseline(self):
        return self.scale - round(LOWER_FRACTION * self.scale) - 1

    @property
    def base_w(self):
        return round(0.6 * self.scale)

    @property
    def mark_w(self):
        return max(6, round(0.25 * self.scale))

    @property
    def stem_w(self):
        return max(2, round(0.05 * self.scale))

    @property
    def foot_w(self):
        return round(0.5 * self.base_w)

    @property
    def letter_gap(self):
        return max(2, round(0.06 * self.scale))

    @property
    def word_gap(self):
        return round(0.4 * self.scale)

    @property
    def line_gap(self):
        return max(2, round(0.08 * self.scale))

    @property
    def margin(self):
        return self.scale

    @property
    def dot_h(self):
        return max(3, round(0.15 * self.scale))

    @property
    def dot_w(self):
        return max(3, round(0.2 * self.scale))

    def cell_width(self, kind: str) -> int:
        return self.mark_w if kind in MARK_KINDS else self.base_w

    @property
    def gutter(self):
        # must stay wider than the horizontal smear used by layout analysis
        return round(5 * 0.75 * self.scale) + self.scale

    @property
    def image_clearance(self):
        # vertical keep-out between text lines and an embedded image region
        return round(0.8 * self.scale)


# ---------------------------------------------------------------------------
# Content sampling
# ---------------------------------------------------------------------------

def _as_range(value) -> tuple[int, int]:
    if isinstance(value, int):
        return value, value
    lo, hi = int(value[0]), int(value[1])
    if lo < 1 or hi < lo:
        raise PageGeometryError(f"bad count range {value!r}")
    return lo, hi


def _sample_kind(rng, mix: Mapping[str, float]) -> str:
    u = float(rng.random())
    acc = 0.0
    for kind, frac in mix.items():
        acc += frac
        if u < acc:
            return kind
    return "plain"


def _sample_base_kind(rng, mix: Mapping[str, float]) -> str:
    base = {k: mix.get(k, 0.0) for k in BASE_KINDS}
    total = sum(base.values())
    plain_share = max(0.0, 1.0 - sum(mix.values()))
    base["plain"] = base.get("plain", 0.0) + plain_share
    total += plain_share
    if total <= 0:
        return "plain"
    u = float(rng.random()) * total
    acc = 0.0
    for kind, frac in base.items():
        acc += frac
        if u < acc:
            return kind
    return "plain"


def _bar_coverage(kinds: Sequence[str], m: Metrics) -> float:
    total = 0
    covered = 0
    prev_bar = None
    for kind in kinds:
        w = m.cell_width(kind)
        bar = kind != "matraless"
        if total:
            total += m.letter_gap
            if bar and prev_bar:
                covered += m.letter_gap
        total += w
        if bar:
            covered += w
        prev_bar = bar
    return covered / total if total else 0.0


def _sample_word(rng, spec: PageSpec, m: Metrics, suppress_lower: bool) -> list[str]:
    lo, hi = _as_range(spec.glyphs_per_word)
    n = int(rng.integers(lo, hi + 1))
    kinds = [_sample_base_kind(rng, spec.glyph_mix)]
    kinds += [_sample_kind(rng, spec.glyph_mix) for _ in range(n - 1)]
    if suppress_lower:
        kinds = ["plain" if k in LOWER_KINDS else k for k in kinds]
    # modifiers hang off a base; two in a row would leave the line without
    # enough baseline contact for the density cliff to register
    for i in range(1, len(kinds)):
        if kinds[i] in MARK_KINDS and kinds[i - 1] in MARK_KINDS:
            kinds[i] = "plain"
    if all(k == "matraless" for k in kinds):
        return kinds  # a fully headline-less word is a legitimate fixture
    # keep the headline bar dominant so its row stays the histogram peak
    while _bar_coverage(kinds, m) < 0.6:
        idx = next(i for i, k in enumerate(kinds) if k == "matraless")
        kinds[idx] = "plain"
    return kinds


def _ensure_descender_with_dots(words: list[list[str]]) -> list[list[str]]:
    """A line with detached dots needs a descender too.

    Dots float a couple of rows below the baseline; without any other lower
    ink in the line, the empty rows in between would read as a line break.
    Real lines with dots have descenders around; force the same here.
    """
    kinds = [k for w in words for k in w]
    if "dotted" not in kinds or "descender" in kinds:
        return words
    for w in words:
        for i, k in enumerate(w):
            if k == "plain":
                w[i] = "descender"
                return words
    for w in words:
        for i, k in enumerate(w):
            if k == "dotted":
                w[i] = "descender"
                return words
    return words


@dataclass(frozen=True)
class PagePlan:
    width: int
    height: int
    columns: tuple[Rect, ...]
    # content[column][line slot] -> list of words, each a list of glyph kinds
    content: tuple[tuple[tuple[tuple[str, ...], ...], ...], ...]
    variants: tuple[int, ...]  # flattened per-glyph shape variant stream
    suppressed_lower: tuple[tuple[bool, ...], ...]


def _word_width(kinds: Sequence[str], m: Metrics) -> int:
    return sum(m.cell_width(k) for k in kinds) + m.letter_gap * (len(kinds) - 1)


def _line_width(words, m: Metrics) -> int:
    return sum(_word_width(w, m) for w in words) + m.word_gap * (len(words) - 1)


def plan_page(spec: PageSpec) -> PagePlan:
    """Sample the page content and fix the page geometry.

    Deterministic for a given spec; rendering the same spec consumes the
    random stream identically, so the plan always matches the render.
    """
    m = Metrics(spec.scale)
    rng = np.random.default_rng(spec.seed)
    w_lo, w_hi = _as_range(spec.words_per_line)
    content = []
    suppressed = []
    variants = []
    for _col in range(spec.columns):
        col_lines = []
        col_suppressed = []
        for li in range(spec.lines):
            suppress = (li % 5) == 4  # keep some lines free of lower-zone ink
            n_words = int(rng.integers(w_lo, w_hi + 1))
            words = []
            for _ in range(n_words):
                kinds = _sample_word(rng, spec, m, suppress)
                words.append(kinds)
                variants.extend(int(rng.integers(0, 3)) for _ in kinds)
            words = _ensure_descender_with_dots(words)
            words = [tuple(w) for w in words]
            col_lines.append(tuple(words))
            col_suppressed.append(suppress)
        content.append(tuple(col_lines))
        suppressed.append(tuple(col_suppressed))

    if spec.lines == 0 or spec.columns == 0:
        size = 2 * m.margin
        return PagePlan(size, size, (), tuple(map(tuple, content)), tuple(variants),
                        tuple(map(tuple, suppressed)))

    col_w = max((_line_width(words, m) for col in content for words in col if words),
                default=m.base_w)
    height = 2 * m.margin + spec.lines * spec.scale + (spec.lines - 1) * m.line_gap
    width = 2 * m.margin + spec.columns * col_w + (spec.columns - 1) * m.gutter
    col_rects = tuple(
        Rect(m.margin + i * (col_w + m.gutter), m.margin, col_w,
             height - 2 * m.margin)
        for i in range(spec.columns)
    )
    return PagePlan(width, height, col_rects, tuple(content), tuple(variants),
                    tuple(map(tuple, suppressed)))


# ---------------------------------------------------------------------------
# Glyph painters
# ---------------------------------------------------------------------------

def _fill(page, x0, y0, x1, y1):
    page[y0:y1 + 1, x0:x1 + 1] = INK


def _paint_body(page, x, top, m: Metrics, variant: int, *, left_full=True):
    """One base cell: short hanger stem, staircase connector, full right
    stem, baseline foot.

    The proportions are chosen so that every column of the cell carries
    middle-zone ink, the shape meets both the headline row and the baseline,
    steps are thick enough to survive a 3x3 median, and no single row ever
    collects half the cell width (the headline row must stay the undisputed
    histogram peak).
    """
    w = m.base_w
    sw = m.stem_w
    bt = top + m.body_top
    bl = top + m.baseline
    end_col = x + w - sw
    start_col = x + sw - 1 if left_full else x + 2 * sw
    step_w = max(5, round(0.25 * (w + m.letter_gap)))
    n_steps = 1 + max(0, math.ceil((end_col - start_col + 1 - step_w)
                                   / (step_w - 1)))
    # steps descend two rows at a time; keep the run clear of the foot
    r = bt + 2 + min(variant, max(0, (bl - 3) - (bt + 2) - (2 * n_steps - 1)))
    _fill(page, x + w - sw, bt, x + w - 1, bl - 2)            # right stem
    if left_full:
        _fill(page, x, bt, x + sw - 1, r + 1)                 # hanger stem
    c = start_col
    while True:
        c_end = min(c + step_w - 1, end_col)
        _fill(page, c, r, c_end, r + 1)
        if c_end >= end_col:
            break
        c += step_w - 1
        r += 2
    _fill(page, x + w - m.foot_w, bl - 1, x + w - 1, bl)      # right foot
    return r


def _paint_glyph(page, kind: str, x: int, top: int, m: Metrics, variant: int) -> GlyphTruth:
    w = m.cell_width(kind)
    bt = top + m.body_top
    bl = top + m.baseline
    mt = top + m.matra_top
    if kind in ("plain", "matraless"):
        _paint_body(page, x, top, m, variant)
        rect = Rect(x, bt, w, bl - bt + 1)
        return GlyphTruth(rect, "base", kind)
    if kind == "dotted":
        _paint_body(page, x, top, m, variant)
        dx = x + (w - m.dot_w) // 2
        dy0 = bl + 3
        dy1 = min(dy0 + m.dot_h - 1, top + m.scale - 1)
        _fill(page, dx, dy0, dx + m.dot_w - 1, dy1)
        rect = Rect(x, bt, w, dy1 - bt + 1)
        return GlyphTruth(rect, "base", kind)
    if kind == "descender":
        _paint_body(page, x, top, m, variant)
        hx = x + w - m.foot_w + 2  # drops from the baseline foot
        _fill(page, hx, bl + 1, hx + 2, top + m.scale - 1)
        rect = Rect(x, bt, w, (top + m.scale - 1) - bt + 1)
        return GlyphTruth(rect, "base", kind)
    if kind == "split_prone":
        # left piece hangs from the headline and stops well above the
        # baseline; the right piece carries the baseline contact
        sw = m.stem_w
        _fill(page, x, bt, x + sw - 1, bt + 7)
        _paint_body(page, x, top, m, variant, left_full=False)
        rect = Rect(x, bt, w, bl - bt + 1)
        return GlyphTruth(rect, "base", kind)
    if kind == "middle_modifier":
        cx = x + w // 2 - 1
        _fill(page, cx, bt, cx + m.stem_w - 1, bl)
        rect = Rect(cx, bt, m.stem_w, bl - bt + 1)
        return GlyphTruth(rect, "middle_modifier", kind)
    if kind == "upper_middle_modifier":
        cx = x + w // 2 - 1
        _fill(page, cx, bt, cx + m.stem_w - 1, bl)              # stroke
        _fill(page, x + 2, top + 3, x + w - 3, top + 5)         # curl
        _fill(page, cx, top + 6, cx + m.stem_w - 1, mt - 1)     # connector
        rect = Rect(x + 2, top + 3, w - 4, bl - (top + 3) + 1)
        return GlyphTruth(rect, "upper_middle_modifier", kind)
    if kind == "upper_modifier":
        # reaches down to the headline row so the line's row histogram has
        # no blank band between mark and bar
        _fill(page, x + 2, top + 3, x + w - 3, mt - 1)
        rect = Rect(x + 2, top + 3, w - 4, (mt - 1) - (top + 3) + 1)
        return GlyphTruth(rect, "upper_modifier", kind)
    if kind == "lower_modifier":
        _fill(page, x + 2, bl + 1, x + w - 3, bl + 5)
        rect = Rect(x + 2, bl + 1, w - 4, 5)
        return GlyphTruth(rect, "lower_modifier", kind)
    raise PageGeometryError(f"unknown glyph kind {kind!r}")


def _paint_word(page, kinds: Sequence[str], x: int, top: int, m: Metrics,
                variants: Sequence[int]) -> WordTruth:
    glyphs = []
    bar_runs = []
    cx = x
    run_start = None
    prev_end = None
    for kind, variant in zip(kinds, variants):
        w = m.cell_width(kind)
        glyphs.append(_paint_glyph(page, kind, cx, top, m, variant))
        if kind != "matraless":
            if run_start is None:
                run_start = cx
            prev_end = cx + w - 1
        else:
            if run_start is not None:
                bar_runs.append((run_start, prev_end))
                run_start = None
        cx += w + m.letter_gap
    if run_start is not None:
        bar_runs.append((run_start, prev_end))
    mt, mb = top + m.matra_top, top + m.matra_bottom
    for x0, x1 in bar_runs:
        _fill(page, x0, mt, x1, mb)
    matra_span = (mt, mb) if bar_runs else None
    rects = [g.rect for g in glyphs]
    if bar_runs:
        rects += [Rect(x0, mt, x1 - x0 + 1, mb - mt + 1) for x0, x1 in bar_runs]
    return WordTruth(rect=Rect.bounding(rects), matra_span=matra_span,
                     glyphs=tuple(glyphs))


# ---------------------------------------------------------------------------
# Page rendering
# ---------------------------------------------------------------------------

def render_page(spec: PageSpec) -> tuple[GrayImage, GroundTruth]:
    """Render one page (ink 0 on background 255) plus its ground truth.

    Noise is injected first, then skew is applied, with the truth updated to
    record both.
    """
    m = Metrics(spec.scale)
    plan = plan_page(spec)
    if spec.image_block is not None:
        ib = spec.image_block
        if ib.x < 0 or ib.y < 0 or ib.right > plan.width or ib.bottom > plan.height:
            raise PageGeometryError(f"image block {ib} outside the {plan.width}x{plan.height} page")

    page = np.full((plan.height, plan.width), BACKGROUND, dtype=np.uint8)
    lines: list[LineTruth] = []
    variant_stream = iter(plan.variants)

    for col_idx in range(spec.columns):
        if not plan.columns:
            break
        col_rect = plan.columns[col_idx]
        for li in range(spec.lines):
            words = plan.content[col_idx][li]
            n_variants = sum(len(w) for w in words)
            variants = [next(variant_stream) for _ in range(n_variants)]
            top = m.margin + li * (spec.scale + m.line_gap)
            if spec.image_block is not None:
                ib = spec.image_block
                slot = Rect(col_rect.x, max(0, top - m.image_clearance), col_rect.w,
                            spec.scale + 2 * m.image_clearance)
                if slot.overlaps(ib):
                    continue
            word_truths = []
            cx = col_rect.x
            vi = 0
            for kinds in words:
                wt = _paint_word(page, kinds, cx, top, m, variants[vi:vi + len(kinds)])
                vi += len(kinds)
                word_truths.append(wt)
                cx += _word_width(kinds, m) + m.word_gap
            if not word_truths:
                continue
            line_rect = Rect.bounding([w.rect for w in word_truths])
            spans = [w.matra_span for w in word_truths if w.matra_span]
            lines.append(LineTruth(
                rect=line_rect,
                matra_span=spans[0] if spans else None,
                baseline_row=top + m.baseline,
                has_lower_ink=line_rect.bottom - 1 > top + m.baseline,
                has_upper_ink=line_rect.y < top + m.matra_top,
                column=col_idx,
                words=tuple(word_truths),
            ))

    blocks = _group_text_blocks(lines, spec, m)
    if spec.image_block is not None:
        ib = spec.image_block
        page[ib.y:ib.bottom, ib.x:ib.right] = INK
        blocks.append(BlockTruth(rect=ib, kind="non_text"))

    truth = GroundTruth(
        page_size=(plan.width, plan.height),
        skew_true=0.0,
        noise_density=spec.noise,
        noise_pixels=(),
        rng_algorithm=RNG_ALGORITHM,
        seed=spec.seed,
        zone_fractions=(UPPER_FRACTION, MIDDLE_FRACTION, LOWER_FRACTION),
        blocks=tuple(blocks),
        lines=tuple(lines),
    )
    gray = GrayImage(page)

    if spec.noise > 0:
        gray, flipped = inject_noise(gray, spec.noise, spec.seed + 1)
        truth = replace(truth, noise_pixels=tuple(flipped))
    if spec.skew != 0.0:
        gray, truth = apply_skew(gray, truth, spec.skew)
    return gray, truth


def _group_text_blocks(lines: Sequence[LineTruth], spec: PageSpec, m: Metrics):
    """One text block per maximal run of vertically adjacent lines per column."""
    blocks = []
    for col in range(spec.columns):
        col_lines = [ln for ln in lines if ln.column == col]
        if not col_lines:
            continue
        col_lines.sort(key=lambda ln: ln.rect.y)
        run = [col_lines[0]]
        pitch = spec.scale + m.line_gap
        for ln in col_lines[1:]:
            # tops wobble by up to the upper-zone height when marks are present
            if ln.rect.y - run[-1].rect.y <= pitch + m.upper_h:
                run.append(ln)
            else:
                blocks.append(BlockTruth(Rect.bounding([r.rect for r in run]), "text"))
                run = [ln]
        blocks.append(BlockTruth(Rect.bounding([r.rect for r in run]), "text"))
    return blocks


# ---------------------------------------------------------------------------
# Noise and skew
# ---------------------------------------------------------------------------

def inject_noise(img: GrayImage, density: float, seed: int):
    """Salt-and-pepper: each pixel flips to 0 or 255 with probability density/2
    each.  Returns the noisy image and the list of flipped (x, y, value)."""
    if not 0.0 <= density <= 1.0:
        raise ValueError("density outside [0, 1]")
    rng = np.random.default_rng(seed)
    u = rng.random(img.pixels.shape)
    pepper = u < density / 2.0
    salt = (u >= density / 2.0) & (u < density)
    out = img.pixels.copy()
    out[pepper] = INK
    out[salt] = BACKGROUND
    ys, xs = np.nonzero(pepper | salt)
    flipped = [(int(x), int(y), int(out[y, x])) for y, x in zip(ys, xs)]
    return GrayImage(out), flipped


def _transform_rect(rect: Rect, w: int, h: int, theta: float) -> Rect:
    corners = [(rect.x, rect.y), (rect.right - 1, rect.y),
               (rect.x, rect.bottom - 1), (rect.right - 1, rect.bottom - 1)]
    pts = [rotate_point(px, py, w, h, theta) for px, py in corners]
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x0 = int(math.floor(min(xs)))
    y0 = int(math.floor(min(ys)))
    return Rect(x0, y0, int(math.ceil(max(xs))) - x0 + 1,
                int(math.ceil(max(ys))) - y0 + 1)


def apply_skew(img: GrayImage, truth: GroundTruth, theta: float):
    """Rotate the page and replace every truth rect with the bounding box of
    its rotated corners."""
    if theta == 0.0:
        return img, truth
    w, h = img.width, img.height
    out = rotate_gray(img, theta)

    def tr(rect: Rect) -> Rect:
        return _transform_rect(rect, w, h, theta)

    lines = tuple(
        replace(ln, rect=tr(ln.rect),
                words=tuple(replace(wd, rect=tr(wd.rect),
                                    glyphs=tuple(replace(g, rect=tr(g.rect))
                                                 for g in wd.glyphs))
                            for wd in ln.words))
        for ln in truth.lines
    )
    blocks = tuple(replace(b, rect=tr(b.rect)) for b in truth.blocks)
    truth = replace(truth, lines=lines, blocks=blocks, skew_true=theta,
                    page_size=(out.width, out.height))
    return out, truth


# ---------------------------------------------------------------------------
# Truth serialization (mirrors the pipeline result schema, plus fixtures)
# ---------------------------------------------------------------------------

def _rect_list(rect: Rect):
    return [rect.x, rect.y, rect.w, rect.h]


def truth_to_dict(truth: GroundTruth) -> dict:
    return {
        "page_size": list(truth.page_size),
        "skew_true": round(float(truth.skew_true), 4),
        "noise_density": round(float(truth.noise_density), 6),
        "rng": {"algorithm": truth.rng_algorithm, "seed": truth.seed},
        "zone_fractions": list(truth.zone_fractions),
        "blocks": [{"bbox": _rect_list(b.rect), "kind": b.kind} for b in truth.blocks],
        "lines": [
            {
                "bbox": _rect_list(ln.rect),
                "matra": list(ln.matra_span) if ln.matra_span else None,
                "baseline": ln.baseline_row,
                "has_lower_ink": ln.has_lower_ink,
                "has_upper_ink": ln.has_upper_ink,
                "column": ln.column,
                "words": [
                    {
                        "bbox": _rect_list(wd.rect),
                        "matra": list(wd.matra_span) if wd.matra_span else None,
                        "glyphs": [
                            {"bbox": _rect_list(g.rect), "zone_class": g.zone_class,
                             "kind": g.kind}
                            for g in wd.glyphs
                        ],
                    }
                    for wd in ln.words
                ],
            }
            for ln in truth.lines
        ],
        "noise_pixels": [list(p) for p in truth.noise_pixels],
    }
