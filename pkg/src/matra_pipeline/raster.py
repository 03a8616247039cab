"""Core raster substrate: gray/binary images, PGM I/O, histograms, window
statistics, connected components, and rotation.

Conventions used everywhere in this package:

* origin is the top-left corner, x grows rightward, y grows downward;
* grayscale values are 8-bit, 0 = black, 255 = white;
* in binary images "ink" is the foreground (dark pixels of the scan);
* rectangles are half-open: columns [x, x+w), rows [y, y+h).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import PgmError

BACKGROUND = 255
INK = 0

_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit grayscale raster stored row-major as a (height, width) array."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.array(self.pixels, dtype=np.uint8, copy=True, order="C")
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("GrayImage needs a 2-D array with positive size")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, GrayImage) and np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True, eq=False)
class BinaryImage:
    """Two-valued raster; True marks ink (foreground)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.array(self.pixels, dtype=bool, copy=True, order="C")
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("BinaryImage needs a 2-D array with positive size")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def ink_count(self) -> int:
        return int(self.pixels.sum())

    def to_gray(self) -> GrayImage:
        """Ink renders as 0, background as 255."""
        return GrayImage(np.where(self.pixels, INK, BACKGROUND).astype(np.uint8))

    def __eq__(self, other) -> bool:
        return isinstance(other, BinaryImage) and np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True)
class Rect:
    """Half-open axis-aligned box: columns [x, x+w), rows [y, y+h)."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"degenerate rect {self.w}x{self.h}")

    @property
    def right(self) -> int:
        return self.x + self.w

    @property
    def bottom(self) -> int:
        return self.y + self.h

    @property
    def area(self) -> int:
        return self.w * self.h

    def contains(self, other: "Rect") -> bool:
        return (self.x <= other.x and self.y <= other.y
                and other.right <= self.right and other.bottom <= self.bottom)

    def overlaps(self, other: "Rect") -> bool:
        return (self.x < other.right and other.x < self.right
                and self.y < other.bottom and other.y < self.bottom)

    def union(self, other: "Rect") -> "Rect":
        x0 = min(self.x, other.x)
        y0 = min(self.y, other.y)
        return Rect(x0, y0, max(self.right, other.right) - x0,
                    max(self.bottom, other.bottom) - y0)

    @staticmethod
    def bounding(rects) -> "Rect":
        rects = list(rects)
        if not rects:
            raise ValueError("no rects to bound")
        out = rects[0]
        for r in rects[1:]:
            out = out.union(r)
        return out


@dataclass(frozen=True)
class WindowStats:
    """Mean and population standard deviation of a pixel window."""

    mean: float
    stddev: float


@dataclass(frozen=True)
class Component:
    """One maximal 8-connected set of ink pixels.

    ``pixels`` is an (n, 2) array of (x, y) coordinates in raster order;
    ``bbox`` is the tight bound and ``id`` follows the raster order of each
    component's first pixel.
    """

    id: int
    pixel_count: int
    bbox: Rect
    pixels: np.ndarray


# ---------------------------------------------------------------------------
# PGM (P5) codec
# ---------------------------------------------------------------------------

def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        c = data[pos]
        if c in b" \t\r\n\x0b\x0c":
            pos += 1
        elif c == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
        else:
            break
    if pos >= n:
        raise PgmError("unexpected end of header")
    start = pos
    while pos < n and data[pos] not in b" \t\r\n\x0b\x0c":
        pos += 1
    return data[start:pos], pos


def load_pgm(data: bytes) -> GrayImage:
    """Decode a binary portable graymap (P5, maxval 255).

    Header parsing follows the PNM convention: fields may be separated by any
    whitespace and ``#`` comments; exactly one whitespace byte separates the
    maxval from the raster.
    """
    magic, pos = _next_token(data, 0)
    if magic != b"P5":
        raise PgmError(f"not a P5 graymap (magic {magic!r})")
    fields = []
    for _ in range(3):
        tok, pos = _next_token(data, pos)
        if not tok.isdigit():
            raise PgmError(f"malformed header field {tok!r}")
        fields.append(int(tok))
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise PgmError(f"bad dimensions {width}x{height}")
    if maxval != 255:
        raise PgmError(f"unsupported maxval {maxval} (only 255)")
    if pos >= len(data):
        raise PgmError("missing raster data")
    pos += 1  # the single whitespace byte after maxval
    raster = data[pos:pos + width * height]
    if len(raster) < width * height:
        raise PgmError(f"truncated raster: expected {width * height} bytes, "
                       f"got {len(raster)}")
    arr = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return GrayImage(arr)


def save_pgm(img: GrayImage | BinaryImage) -> bytes:
    """Encode as canonical P5: ``P5\\n<w> <h>\\n255\\n`` + raw rows.

    Binary images serialize with ink = 0 and background = 255.
    """
    if isinstance(img, BinaryImage):
        img = img.to_gray()
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


def gray_from_rgb(r, g, b):
    """BT.601 luma of one RGB triple, rounded half-up and clamped to [0, 255]."""
    y = math.floor(0.299 * r + 0.587 * g + 0.114 * b + 0.5)
    return int(min(255, max(0, y)))


# ---------------------------------------------------------------------------
# Histograms
# ---------------------------------------------------------------------------

def _require_inside(img, region: Rect):
    if region.x < 0 or region.y < 0 or region.right > img.width or region.bottom > img.height:
        raise ValueError(f"region {region} outside {img.width}x{img.height} image")


def row_histogram(img: BinaryImage, region: Rect) -> np.ndarray:
    """Ink pixels per row of ``region`` (length ``region.h``)."""
    _require_inside(img, region)
    window = img.pixels[region.y:region.bottom, region.x:region.right]
    return window.sum(axis=1, dtype=np.int64)


def column_histogram(img: BinaryImage, region: Rect) -> np.ndarray:
    """Ink pixels per column of ``region`` (length ``region.w``)."""
    _require_inside(img, region)
    window = img.pixels[region.y:region.bottom, region.x:region.right]
    return window.sum(axis=0, dtype=np.int64)


# ---------------------------------------------------------------------------
# Window statistics via integral tables
# ---------------------------------------------------------------------------

def _integral_tables(pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Padded cumulative sum and sum-of-squares tables (exact, int64)."""
    p = pixels.astype(np.int64)
    s1 = np.zeros((p.shape[0] + 1, p.shape[1] + 1), dtype=np.int64)
    s2 = np.zeros_like(s1)
    np.cumsum(np.cumsum(p, axis=0), axis=1, out=s1[1:, 1:])
    np.cumsum(np.cumsum(p * p, axis=0), axis=1, out=s2[1:, 1:])
    return s1, s2


def _rect_sum(table: np.ndarray, y0, y1, x0, x1):
    # half-open rows [y0, y1), cols [x0, x1)
    return table[y1, x1] - table[y0, x1] - table[y1, x0] + table[y0, x0]


def window_stats(img: GrayImage, center: tuple[int, int], half: int) -> WindowStats:
    """Mean/stddev of the (2*half+1)^2 window at ``center``, clipped at borders.

    The window shrinks at image borders; no padding value is invented.
    """
    if half < 1:
        raise ValueError("half-size must be >= 1")
    x, y = center
    s1, s2 = _integral_tables(img.pixels)
    y0 = max(0, y - half)
    y1 = min(img.height, y + half + 1)
    x0 = max(0, x - half)
    x1 = min(img.width, x + half + 1)
    n = (y1 - y0) * (x1 - x0)
    total = _rect_sum(s1, y0, y1, x0, x1)
    sq = _rect_sum(s2, y0, y1, x0, x1)
    mean = total / n
    var = sq / n - mean * mean
    return WindowStats(mean=float(mean), stddev=float(math.sqrt(max(var, 0.0))))


def local_mean_std(img: GrayImage, half: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel clipped-window mean and population stddev maps.

    Same semantics as :func:`window_stats` evaluated at every pixel, computed
    from one pair of integral tables.
    """
    if half < 1:
        raise ValueError("half-size must be >= 1")
    h, w = img.pixels.shape
    s1, s2 = _integral_tables(img.pixels)
    ys = np.arange(h)
    xs = np.arange(w)
    y0 = np.clip(ys - half, 0, h)
    y1 = np.clip(ys + half + 1, 0, h)
    x0 = np.clip(xs - half, 0, w)
    x1 = np.clip(xs + half + 1, 0, w)
    yy0, xx0 = np.meshgrid(y0, x0, indexing="ij")
    yy1, xx1 = np.meshgrid(y1, x1, indexing="ij")
    n = (yy1 - yy0) * (xx1 - xx0)
    total = _rect_sum(s1, yy0, yy1, xx0, xx1)
    sq = _rect_sum(s2, yy0, yy1, xx0, xx1)
    mean = total / n
    var = sq / n - mean * mean
    return mean, np.sqrt(np.maximum(var, 0.0))


# ---------------------------------------------------------------------------
# Connected components
# ---------------------------------------------------------------------------

def label_ink(img: BinaryImage) -> tuple[np.ndarray, int]:
    """8-connected label map of the ink pixels (0 = background)."""
    labels, count = ndimage.label(img.pixels, structure=_EIGHT_CONNECTED)
    return labels, int(count)


def connected_components(img: BinaryImage) -> list[Component]:
    """Partition the ink into maximal 8-connected components.

    Ids follow the raster order of each component's first pixel.
    """
    labels, count = label_ink(img)
    if count == 0:
        return []
    ys, xs = np.nonzero(img.pixels)  # raster order
    lab = labels[ys, xs]
    first_seen, rank = {}, np.empty(count + 1, dtype=np.int64)
    order_ids = []
    for v in lab:
        v = int(v)
        if v not in first_seen:
            first_seen[v] = len(order_ids)
            order_ids.append(v)
    for new_id, old in enumerate(order_ids):
        rank[old] = new_id
    ranked = rank[lab]
    order = np.argsort(ranked, kind="stable")
    ys, xs, ranked = ys[order], xs[order], ranked[order]
    counts = np.bincount(ranked, minlength=count)
    out = []
    offset = 0
    for cid in range(count):
        n = int(counts[cid])
        cy = ys[offset:offset + n]
        cx = xs[offset:offset + n]
        offset += n
        bbox = Rect(int(cx.min()), int(cy.min()),
                    int(cx.max()) - int(cx.min()) + 1,
                    int(cy.max()) - int(cy.min()) + 1)
        pixels = np.column_stack([cx, cy]).astype(np.int32)
        out.append(Component(id=cid, pixel_count=n, bbox=bbox, pixels=pixels))
    return out


def component_sizes(labels: np.ndarray, count: int) -> np.ndarray:
    """Pixel count per label, index 0 unused."""
    return np.bincount(labels.ravel(), minlength=count + 1)


# ---------------------------------------------------------------------------
# Rotation
# ---------------------------------------------------------------------------

def _rotation_geometry(w: int, h: int, theta: float):
    rad = math.radians(theta)
    c, s = math.cos(rad), math.sin(rad)
    out_w = int(math.ceil(w * abs(c) + h * abs(s)))
    out_h = int(math.ceil(w * abs(s) + h * abs(c)))
    return c, s, out_w, out_h


def _source_coords(w, h, theta):
    """Inverse map from output pixel centers to source coordinates.

    Positive angles turn a horizontal stroke into one that descends to the
    right (slope tan(theta) in image coordinates).
    """
    c, s, out_w, out_h = _rotation_geometry(w, h, theta)
    ys, xs = np.mgrid[0:out_h, 0:out_w]
    dx = xs - (out_w - 1) / 2.0
    dy = ys - (out_h - 1) / 2.0
    sx = c * dx + s * dy + (w - 1) / 2.0
    sy = -s * dx + c * dy + (h - 1) / 2.0
    return sx, sy


def _cubic_weights(t: np.ndarray):
    # Catmull-Rom kernel (a = -0.5) sampled at offsets -1-t, -t, 1-t, 2-t.
    t2 = t * t
    t3 = t2 * t
    w0 = -0.5 * t3 + t2 - 0.5 * t
    w1 = 1.5 * t3 - 2.5 * t2 + 1.0
    w2 = -1.5 * t3 + 2.0 * t2 + 0.5 * t
    w3 = 0.5 * t3 - 0.5 * t2
    return w0, w1, w2, w3


def rotate_gray(img: GrayImage, theta: float) -> GrayImage:
    """Rotate about the image center with bi-cubic (Catmull-Rom) sampling.

    The canvas grows to contain the rotated input; samples falling outside
    the source take the background value 255.
    """
    if abs(theta) > 45:
        raise ValueError("rotation limit is +/-45 degrees")
    if theta == 0.0:
        return img
    h, w = img.pixels.shape
    sx, sy = _source_coords(w, h, theta)
    fx = np.floor(sx)
    fy = np.floor(sy)
    u = sx - fx
    v = sy - fy
    # Two-pixel border of background keeps every tap in range after clipping;
    # far-outside samples then read pure background.
    pad = np.full((h + 4, w + 4), float(BACKGROUND))
    pad[2:2 + h, 2:2 + w] = img.pixels
    ix = fx.astype(np.int64)
    iy = fy.astype(np.int64)
    wx = _cubic_weights(u)
    wy = _cubic_weights(v)
    acc = np.zeros_like(sx)
    for j in range(4):
        py = np.clip(iy + (j + 1), 0, h + 3)
        row_acc = np.zeros_like(sx)
        for i in range(4):
            px = np.clip(ix + (i + 1), 0, w + 3)
            row_acc += wx[i] * pad[py, px]
        acc += wy[j] * row_acc
    out = np.clip(np.rint(acc), 0, 255).astype(np.uint8)
    return GrayImage(out)


def rotate_binary(img: BinaryImage, theta: float) -> BinaryImage:
    """Rotate with nearest-neighbor sampling; outside becomes background."""
    if abs(theta) > 45:
        raise ValueError("rotation limit is +/-45 degrees")
    if theta == 0.0:
        return img
    h, w = img.pixels.shape
    sx, sy = _source_coords(w, h, theta)
    ix = np.rint(sx).astype(np.int64)
    iy = np.rint(sy).astype(np.int64)
    inside = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
    out = np.zeros(sx.shape, dtype=bool)
    out[inside] = img.pixels[iy[inside], ix[inside]]
    return BinaryImage(out)


def rotate_point(x: float, y: float, w: int, h: int, theta: float) -> tuple[float, float]:
    """Forward map of one source point under :func:`rotate_gray` geometry."""
    c, s, out_w, out_h = _rotation_geometry(w, h, theta)
    dx = x - (w - 1) / 2.0
    dy = y - (h - 1) / 2.0
    return (c * dx - s * dy + (out_w - 1) / 2.0,
            s * dx + c * dy + (out_h - 1) / 2.0)
