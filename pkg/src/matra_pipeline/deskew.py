"""Page skew estimation from the upper envelope, and its correction.

In headline scripts the topmost ink of each column mostly traces the
headline bars, so the skew angle is the direction along which those envelope
points line up.  Each candidate angle projects the points onto the
perpendicular axis; the angle whose projection histogram is most concentrated
(largest sum of squared bin counts) wins.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyImageError, InsufficientInkError
from .raster import (
    BinaryImage,
    GrayImage,
    component_sizes,
    label_ink,
    rotate_binary,
    rotate_gray,
)

MIN_ENVELOPE_COMPONENT = 4  # specks this small cannot contribute envelope points
DEFAULT_MAX_ANGLE = 15.0
DEFAULT_STEP = 0.1


@dataclass(frozen=True)
class Envelope:
    """Topmost ink pixel per occupied column: (n, 2) array of (x, y)."""

    points: np.ndarray


@dataclass(frozen=True)
class SkewEstimate:
    theta_degrees: float
    score: float
    profile: tuple[tuple[float, float], ...]  # (angle, score) per swept angle


def upper_envelope(img: BinaryImage) -> Envelope:
    """For each column with ink, the smallest row holding ink.

    Columns whose top pixel belongs to a component smaller than
    MIN_ENVELOPE_COMPONENT pixels are dropped so stray specks cannot tilt
    the estimate.
    """
    if img.ink_count == 0:
        raise EmptyImageError("no ink to build an envelope from")
    ink = img.pixels
    occupied = ink.any(axis=0)
    top_rows = ink.argmax(axis=0)
    labels, count = label_ink(img)
    sizes = component_sizes(labels, count)
    xs = np.nonzero(occupied)[0]
    ys = top_rows[xs]
    big_enough = sizes[labels[ys, xs]] >= MIN_ENVELOPE_COMPONENT
    points = np.column_stack([xs[big_enough], ys[big_enough]]).astype(np.int64)
    return Envelope(points=points)


def _sweep_angles(max_angle: float, step: float) -> np.ndarray:
    n = int(round(max_angle / step))
    return np.arange(-n, n + 1, dtype=np.int64) * step


def estimate_skew(img: BinaryImage, max_angle: float = DEFAULT_MAX_ANGLE,
                  step: float = DEFAULT_STEP) -> SkewEstimate:
    """Sweep candidate angles and score each by projection energy.

    Projections are anchored to the lexicographically smallest envelope
    point, which makes the binning, and therefore the estimate, exactly
    invariant under integer translations of the ink.  Ties break toward 0
    degrees.
    """
    if not 0 < max_angle <= 45:
        raise ValueError("max_angle must be in (0, 45]")
    if not 0 < step <= 1:
        raise ValueError("step must be in (0, 1]")
    env = upper_envelope(img)
    if len(env.points) < 2:
        raise InsufficientInkError("need at least 2 envelope points")
    anchor = min(map(tuple, env.points.tolist()))
    xs = env.points[:, 0] - anchor[0]
    ys = env.points[:, 1] - anchor[1]
    angles = _sweep_angles(max_angle, step)
    profile = []
    best = None
    for phi in angles:
        rad = math.radians(float(phi))
        rho = ys * math.cos(rad) - xs * math.sin(rad)
        bins = np.floor(rho).astype(np.int64)
        counts = np.bincount(bins - bins.min())
        score = float(np.dot(counts, counts))
        profile.append((float(phi), score))
        key = (-score, abs(float(phi)), float(phi))
        if best is None or key < best[0]:
            best = (key, float(phi), score)
    return SkewEstimate(theta_degrees=best[1], score=best[2],
                        profile=tuple(profile))


def deskew_page(gray: GrayImage, est: SkewEstimate) -> GrayImage:
    """Undo the estimated skew on the grayscale page (bi-cubic)."""
    return rotate_gray(gray, -est.theta_degrees)


def deskew_page_binary(img: BinaryImage, est: SkewEstimate) -> BinaryImage:
    """Undo the estimated skew on a binary page (nearest-neighbor)."""
    return rotate_binary(img, -est.theta_degrees)
