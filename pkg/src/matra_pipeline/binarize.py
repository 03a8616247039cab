"""Grayscale-to-binary conversion.

Five methods: fixed global threshold, Otsu's global optimum, Niblack and
Sauvola local thresholds, and a self-tuning Niblack variant that picks the
window size from the character scale and the factor from global contrast.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import UniformImageError
from .raster import BinaryImage, GrayImage, connected_components, local_mean_std

log = logging.getLogger(__name__)

NIBLACK_K = -0.2
SAUVOLA_K = 0.34
SAUVOLA_R = 128.0
DEFAULT_WINDOW = 15


@dataclass(frozen=True)
class GlobalThresholdConfig:
    threshold: int

    def __post_init__(self):
        if not 0 <= self.threshold <= 255:
            raise ValueError(f"threshold {self.threshold} outside [0, 255]")


@dataclass(frozen=True)
class LocalThresholdConfig:
    """Window size must be odd and >= 3; ``r`` only matters for Sauvola."""

    window_size: int
    k: float
    r: float = SAUVOLA_R

    def __post_init__(self):
        if self.window_size < 3 or self.window_size % 2 == 0:
            raise ValueError(f"window size {self.window_size} must be odd and >= 3")
        if self.r <= 0:
            raise ValueError("r must be positive")

    @property
    def half(self) -> int:
        return (self.window_size - 1) // 2


def global_fixed(img: GrayImage, cfg: GlobalThresholdConfig) -> BinaryImage:
    """Ink where intensity < threshold; everything else is background."""
    return BinaryImage(img.pixels < cfg.threshold)


def otsu_threshold(img: GrayImage) -> int:
    """Split point T in [0, 254] maximizing between-class variance.

    Class 0 holds pixels <= T.  The score is compared with exact integer
    arithmetic so tie-breaking (smallest maximizing T) is deterministic on
    every platform.
    """
    hist = np.bincount(img.pixels.ravel(), minlength=256).astype(np.int64)
    if int((hist > 0).sum()) < 2:
        raise UniformImageError("need at least two distinct intensities")
    counts = hist.tolist()
    total_n = int(hist.sum())
    total_s = int((hist * np.arange(256, dtype=np.int64)).sum())
    best_t = 0
    best_num = -1  # numerator of the best score
    best_den = 1
    n0 = 0
    s0 = 0
    for t in range(255):
        n0 += counts[t]
        s0 += counts[t] * t
        n1 = total_n - n0
        if n0 == 0 or n1 == 0:
            num, den = 0, 1
        else:
            d = s0 * n1 - (total_s - s0) * n0
            num, den = d * d, n0 * n1
        # score = num/den; strict > keeps the smallest maximizing T
        if num * best_den > best_num * den:
            best_num, best_den, best_t = num, den, t
    return best_t


def otsu(img: GrayImage) -> BinaryImage:
    """Global binarization at Otsu's optimum (the darker class becomes ink)."""
    t = otsu_threshold(img)
    return global_fixed(img, GlobalThresholdConfig(threshold=t + 1))


def niblack(img: GrayImage, cfg: LocalThresholdConfig) -> BinaryImage:
    """Per-pixel threshold T = m + k*s over a sliding clipped window."""
    mean, std = local_mean_std(img, cfg.half)
    threshold = mean + cfg.k * std
    return BinaryImage(img.pixels < threshold)


def sauvola(img: GrayImage, cfg: LocalThresholdConfig) -> BinaryImage:
    """Per-pixel threshold T = m * (1 + k * (s/r - 1))."""
    mean, std = local_mean_std(img, cfg.half)
    threshold = mean * (1.0 + cfg.k * (std / cfg.r - 1.0))
    return BinaryImage(img.pixels < threshold)


def choose_adaptive_config(img: GrayImage) -> LocalThresholdConfig:
    """Pick Niblack parameters from the image itself.

    A provisional Otsu pass estimates the character scale as the median
    height of its components (specks under 4 px ignored); the window grows to
    roughly twice that scale, and k is scaled down on low-contrast images.
    Raises UniformImageError when no provisional pass is possible.
    """
    provisional = otsu(img)
    heights = [c.bbox.h for c in connected_components(provisional) if c.pixel_count >= 4]
    scale = float(np.median(heights)) if heights else 0.0
    window = int(2 * scale) + 1
    if window % 2 == 0:
        window += 1
    window = min(201, max(15, window))
    s_global = float(img.pixels.std())
    k = NIBLACK_K * min(1.0, s_global / 64.0)
    cfg = LocalThresholdConfig(window_size=window, k=k)
    log.debug("adaptive niblack: window=%d k=%.4f (scale=%.1f, contrast=%.1f)",
              window, k, scale, s_global)
    return cfg


def adaptive_niblack(img: GrayImage) -> BinaryImage:
    """Niblack with automatically chosen window size and k."""
    return niblack(img, choose_adaptive_config(img))
