import math
from fractions import Fraction

import numpy as np
import pytest

from matra_pipeline.binarize import (
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
from matra_pipeline.errors import UniformImageError
from matra_pipeline.raster import GrayImage


def random_gray(rng, w, h):
    return GrayImage(rng.integers(0, 256, size=(h, w), dtype=np.uint8))


# ---------------------------------------------------------------------------
# Fixed global threshold
# ---------------------------------------------------------------------------

def test_global_fixed_extremes():
    rng = np.random.default_rng(3)
    img = random_gray(rng, 8, 8)
    none = global_fixed(img, GlobalThresholdConfig(0))
    assert none.ink_count == 0
    dark = GrayImage(np.zeros((4, 4), dtype=np.uint8))
    all_ink = global_fixed(dark, GlobalThresholdConfig(255))
    assert all_ink.ink_count == 16


def test_global_fixed_matches_per_pixel_comparison():
    rng = np.random.default_rng(5)
    img = random_gray(rng, 12, 10)
    out = global_fixed(img, GlobalThresholdConfig(128))
    for y in range(img.height):
        for x in range(img.width):
            assert out.pixels[y, x] == (img.pixels[y, x] < 128)


def test_global_fixed_monotone_in_threshold():
    rng = np.random.default_rng(7)
    for _ in range(25):
        img = random_gray(rng, 10, 10)
        lo = int(rng.integers(0, 200))
        hi = int(rng.integers(lo, 256))
        ink_lo = global_fixed(img, GlobalThresholdConfig(lo)).pixels
        ink_hi = global_fixed(img, GlobalThresholdConfig(hi)).pixels
        assert np.all(ink_hi[ink_lo])  # raising the threshold never clears ink


def test_threshold_config_range():
    with pytest.raises(ValueError):
        GlobalThresholdConfig(256)


# ---------------------------------------------------------------------------
# Otsu
# ---------------------------------------------------------------------------

def brute_force_otsu(img):
    """Exhaustive scan of all 255 split points with exact rational scores."""
    values = [int(v) for v in img.pixels.ravel()]
    best_t, best_score = 0, Fraction(-1)
    for t in range(255):
        lo = [v for v in values if v <= t]
        hi = [v for v in values if v > t]
        if not lo or not hi:
            score = Fraction(0)
        else:
            n0, n1 = len(lo), len(hi)
            mu0 = Fraction(sum(lo), n0)
            mu1 = Fraction(sum(hi), n1)
            n = n0 + n1
            score = Fraction(n0, n) * Fraction(n1, n) * (mu0 - mu1) ** 2
        if score > best_score:
            best_score, best_t = score, t
    return best_t


def test_otsu_fifty_fifty_extremes():
    values = np.array([0] * 50 + [255] * 50, dtype=np.uint8).reshape(10, 10)
    assert otsu_threshold(GrayImage(values)) == 0  # every T ties; smallest wins


def test_otsu_uniform_image_raises():
    img = GrayImage(np.full((6, 6), 42, dtype=np.uint8))
    with pytest.raises(UniformImageError):
        otsu_threshold(img)
    with pytest.raises(UniformImageError):
        otsu(img)


def test_otsu_matches_brute_force_scan():
    rng = np.random.default_rng(11)
    for _ in range(200):
        img = random_gray(rng, 16, 16)
        assert otsu_threshold(img) == brute_force_otsu(img)


def test_otsu_bimodal_page():
    rng = np.random.default_rng(13)
    values = np.array([30] * 100 + [220] * 100, dtype=np.uint8)
    rng.shuffle(values)
    img = GrayImage(values.reshape(10, 20))
    out = otsu(img)
    assert np.array_equal(out.pixels, img.pixels == 30)


def test_otsu_shift_invariance():
    rng = np.random.default_rng(17)
    for _ in range(40):
        base = rng.integers(10, 246, size=(9, 9), dtype=np.uint8)
        if len(np.unique(base)) < 2:
            continue
        t0 = otsu_threshold(GrayImage(base))
        for c in (-10, -3, 4, 10):
            shifted = (base.astype(int) + c).astype(np.uint8)
            assert otsu_threshold(GrayImage(shifted)) == t0 + c


# ---------------------------------------------------------------------------
# Niblack / Sauvola
# ---------------------------------------------------------------------------

def naive_local_threshold(img, window, k, r=None):
    """Direct sliding-window reference (clipped windows, population stddev)."""
    half = (window - 1) // 2
    out = np.zeros(img.pixels.shape, dtype=bool)
    for y in range(img.height):
        for x in range(img.width):
            vals = []
            for yy in range(max(0, y - half), min(img.height, y + half + 1)):
                for xx in range(max(0, x - half), min(img.width, x + half + 1)):
                    vals.append(float(img.pixels[yy, xx]))
            n = len(vals)
            mean = sum(vals) / n
            var = sum(v * v for v in vals) / n - mean * mean
            std = math.sqrt(max(var, 0.0))
            if r is None:
                t = mean + k * std
            else:
                t = mean * (1.0 + k * (std / r - 1.0))
            out[y, x] = img.pixels[y, x] < t
    return out


def test_niblack_uniform_image_all_background():
    img = GrayImage(np.full((7, 7), 100, dtype=np.uint8))
    out = niblack(img, LocalThresholdConfig(3, k=-0.2))
    assert out.ink_count == 0


def test_sauvola_uniform_image_all_background():
    img = GrayImage(np.full((7, 7), 180, dtype=np.uint8))
    out = sauvola(img, LocalThresholdConfig(5, k=0.34, r=128.0))
    assert out.ink_count == 0


def test_k_zero_degeneracy():
    rng = np.random.default_rng(19)
    img = random_gray(rng, 9, 9)
    nb = niblack(img, LocalThresholdConfig(5, k=0.0))
    sv = sauvola(img, LocalThresholdConfig(5, k=0.0))
    assert nb == sv
    mean_only = naive_local_threshold(img, 5, k=0.0)
    assert np.array_equal(nb.pixels, mean_only)


def test_local_methods_match_naive_reference():
    rng = np.random.default_rng(23)
    for _ in range(50):
        img = random_gray(rng, 9, 9)
        for window in (3, 5, 7):
            nb = niblack(img, LocalThresholdConfig(window, k=-0.2))
            assert np.array_equal(nb.pixels, naive_local_threshold(img, window, -0.2))
            sv = sauvola(img, LocalThresholdConfig(window, k=0.34, r=128.0))
            assert np.array_equal(sv.pixels,
                                  naive_local_threshold(img, window, 0.34, r=128.0))


def test_local_threshold_locality():
    rng = np.random.default_rng(29)
    for _ in range(20):
        img = random_gray(rng, 20, 20)
        window = 5
        cfg = LocalThresholdConfig(window, k=-0.2)
        before = niblack(img, cfg)
        x, y = 10, 10
        edited = img.pixels.copy()
        # rewrite everything farther than one full window size away
        for yy in range(20):
            for xx in range(20):
                if max(abs(xx - x), abs(yy - y)) > window:
                    edited[yy, xx] = rng.integers(0, 256)
        after = niblack(GrayImage(edited), cfg)
        assert before.pixels[y, x] == after.pixels[y, x]


def test_local_config_validation():
    with pytest.raises(ValueError):
        LocalThresholdConfig(4, k=0.1)
    with pytest.raises(ValueError):
        LocalThresholdConfig(5, k=0.1, r=0.0)


# ---------------------------------------------------------------------------
# Adaptive Niblack
# ---------------------------------------------------------------------------

def test_adaptive_uniform_raises():
    img = GrayImage(np.full((10, 10), 200, dtype=np.uint8))
    with pytest.raises(UniformImageError):
        adaptive_niblack(img)


def test_adaptive_equals_niblack_with_chosen_config():
    rng = np.random.default_rng(31)
    img = random_gray(rng, 24, 24)
    cfg = choose_adaptive_config(img)
    assert adaptive_niblack(img) == niblack(img, cfg)


def test_adaptive_window_tracks_glyph_scale():
    from matra_pipeline.synthgen import PageSpec, render_page

    small, _ = render_page(PageSpec(scale=32, lines=4, seed=37))
    large, _ = render_page(PageSpec(scale=64, lines=4, seed=37))
    w_small = choose_adaptive_config(small).window_size
    w_large = choose_adaptive_config(large).window_size
    assert 1.6 <= w_large / w_small <= 2.4
