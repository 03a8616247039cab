"""Scanner-noise cleanup for binary pages, with a gray median filter.

The binary chain removes isolated pixels, smooths staircase edges, and drops
speck components whose area is far below the page's median component area.
A dot-protection pass estimates the size of legitimate detached dots (the
small marks some characters carry) and never removes anything that large.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import BinaryImage, GrayImage, connected_components


@dataclass(frozen=True)
class DenoiseConfig:
    median_window: int = 3
    speck_alpha: float = 0.05     # remove components below alpha * median area
    dot_protect: bool = True

    def __post_init__(self):
        if self.median_window < 3 or self.median_window % 2 == 0:
            raise ValueError("median window must be odd and >= 3")
        if not 0.0 < self.speck_alpha < 1.0:
            raise ValueError("speck alpha must be in (0, 1)")


def median_filter(img: GrayImage, window: int) -> GrayImage:
    """Median over the clipped window around every pixel.

    Windows shrink at the borders; for even pixel counts the lower median is
    taken, which keeps a thin dark stroke dark on a 5/4 split.
    """
    if window < 3 or window % 2 == 0:
        raise ValueError("window must be odd and >= 3")
    h, w = img.pixels.shape
    half = (window - 1) // 2
    out = np.empty((h, w), dtype=np.uint8)
    if h >= window and w >= window:
        view = np.lib.stride_tricks.sliding_window_view(img.pixels, (window, window))
        flat = view.reshape(h - window + 1, w - window + 1, window * window)
        k = (window * window - 1) // 2
        out[half:h - half, half:w - half] = np.partition(flat, k, axis=2)[:, :, k]
        border = [(y, x) for y in range(h) for x in range(w)
                  if y < half or y >= h - half or x < half or x >= w - half]
    else:
        border = [(y, x) for y in range(h) for x in range(w)]
    for y, x in border:
        vals = np.sort(img.pixels[max(0, y - half):y + half + 1,
                                  max(0, x - half):x + half + 1], axis=None)
        out[y, x] = vals[(len(vals) - 1) // 2]
    return GrayImage(out)


def _neighbor_counts(ink: np.ndarray) -> np.ndarray:
    """Ink pixels among the 8 neighbors; outside the image counts as empty."""
    padded = np.zeros((ink.shape[0] + 2, ink.shape[1] + 2), dtype=np.uint8)
    padded[1:-1, 1:-1] = ink
    counts = np.zeros(ink.shape, dtype=np.uint8)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            counts += padded[1 + dy:ink.shape[0] + 1 + dy,
                             1 + dx:ink.shape[1] + 1 + dx]
    return counts


def remove_single_pixels(img: BinaryImage) -> BinaryImage:
    """Clear every 1-pixel component (ink with no ink neighbor)."""
    counts = _neighbor_counts(img.pixels.astype(np.uint8))
    return BinaryImage(img.pixels & (counts > 0))


def smooth_staircase(img: BinaryImage) -> BinaryImage:
    """One synchronous 3x3 smoothing pass.

    Background pixels surrounded by >= 6 ink neighbors fill in; ink pixels
    with <= 1 ink neighbor drop out.  Both decisions read the input image.
    """
    ink = img.pixels
    counts = _neighbor_counts(ink.astype(np.uint8))
    grown = ~ink & (counts >= 6)
    kept = ink & (counts >= 2)
    return BinaryImage(kept | grown)


def remove_background_components(img: BinaryImage, cfg: DenoiseConfig) -> BinaryImage:
    """Drop components with area below ``speck_alpha`` times the median area.

    With ``dot_protect`` the smallest dot-sized component (bbox height and
    width both within [0.15, 0.5] of the median component height) sets a
    floor: anything at least that large survives regardless.
    """
    comps = connected_components(img)
    if not comps:
        raise ValueError("image has no components")
    areas = np.array([c.pixel_count for c in comps], dtype=float)
    threshold = cfg.speck_alpha * float(np.median(areas))
    protected_floor = None
    if cfg.dot_protect:
        median_h = float(np.median([c.bbox.h for c in comps]))
        lo, hi = 0.15 * median_h, 0.5 * median_h
        dotlike = [c.pixel_count for c in comps
                   if lo <= c.bbox.h <= hi and lo <= c.bbox.w <= hi]
        if dotlike:
            protected_floor = min(dotlike)
    out = img.pixels.copy()
    for comp in comps:
        if comp.pixel_count >= threshold:
            continue
        if protected_floor is not None and comp.pixel_count >= protected_floor:
            continue
        out[comp.pixels[:, 1], comp.pixels[:, 0]] = False
    return BinaryImage(out)


def denoise_binary(img: BinaryImage, cfg: DenoiseConfig,
                   use_median: bool = False) -> BinaryImage:
    """Full binary cleanup chain; optionally starts with a median pass run on
    the two-valued raster."""
    if use_median:
        smoothed = median_filter(img.to_gray(), cfg.median_window)
        img = BinaryImage(smoothed.pixels < 128)
    img = remove_single_pixels(img)
    img = smooth_staircase(img)
    if img.ink_count:
        img = remove_background_components(img, cfg)
    return img
