import numpy as np
import pytest

from matra_pipeline.binarize import otsu
from matra_pipeline.layout import (
    Block,
    PageLayout,
    classify_block,
    rlsa_segment,
    rlsa_smear,
)
from matra_pipeline.raster import BinaryImage, Rect
from matra_pipeline.synthgen import PageSpec, plan_page, render_page


def row_image(*rows):
    return BinaryImage(np.array(rows, dtype=bool))


# ---------------------------------------------------------------------------
# Smearing
# ---------------------------------------------------------------------------

def test_smear_fills_short_gap():
    img = row_image([1, 0, 0, 1])
    out = rlsa_smear(img, 2, "horizontal")
    assert out.pixels.tolist() == [[True, True, True, True]]


def test_smear_keeps_long_gap():
    img = row_image([1, 0, 0, 1])
    out = rlsa_smear(img, 1, "horizontal")
    assert out == img


def test_smear_never_touches_border_runs():
    img = row_image([0, 1, 0, 0])
    out = rlsa_smear(img, 5, "horizontal")
    assert out == img


def test_smear_zero_threshold_is_identity():
    rng = np.random.default_rng(3)
    for _ in range(30):
        img = BinaryImage(rng.random((6, 12)) < 0.4)
        assert rlsa_smear(img, 0, "horizontal") == img
        assert rlsa_smear(img, 0, "vertical") == img


def test_smear_vertical_is_transposed_horizontal():
    rng = np.random.default_rng(5)
    for _ in range(20):
        img = BinaryImage(rng.random((9, 7)) < 0.35)
        v = rlsa_smear(img, 3, "vertical")
        h_on_t = rlsa_smear(BinaryImage(img.pixels.T), 3, "horizontal")
        assert np.array_equal(v.pixels, h_on_t.pixels.T)


def naive_smear_row(row, threshold):
    row = list(row)
    n = len(row)
    out = row[:]
    i = 0
    while i < n:
        if not row[i]:
            j = i
            while j < n and not row[j]:
                j += 1
            gap = j - i
            if 0 < i and j < n and gap <= threshold:
                for k in range(i, j):
                    out[k] = True
            i = j
        else:
            i += 1
    return out


def test_smear_matches_run_scanner():
    rng = np.random.default_rng(7)
    for _ in range(60):
        img = BinaryImage(rng.random((4, 15)) < 0.3)
        c = int(rng.integers(0, 6))
        out = rlsa_smear(img, c, "horizontal")
        for y in range(4):
            assert out.pixels[y].tolist() == naive_smear_row(img.pixels[y], c)


def test_smear_monotone_and_idempotent():
    rng = np.random.default_rng(11)
    for _ in range(40):
        img = BinaryImage(rng.random((8, 20)) < 0.3)
        c = int(rng.integers(0, 8))
        once = rlsa_smear(img, c, "horizontal")
        assert np.all(once.pixels[img.pixels])            # monotone
        assert rlsa_smear(once, c, "horizontal") == once  # idempotent


def test_smear_validation():
    img = row_image([1, 0, 1])
    with pytest.raises(ValueError):
        rlsa_smear(img, -1, "horizontal")
    with pytest.raises(ValueError):
        rlsa_smear(img, 1, "diagonal")


# ---------------------------------------------------------------------------
# Block classification
# ---------------------------------------------------------------------------

def test_solid_block_is_non_text():
    px = np.zeros((40, 40), dtype=bool)
    px[5:35, 5:35] = True
    img = BinaryImage(px)
    assert classify_block(img, Rect(5, 5, 30, 30)) == "non_text"


def test_empty_block_is_non_text():
    img = BinaryImage(np.zeros((20, 20), dtype=bool))
    assert classify_block(img, Rect(2, 2, 10, 10)) == "non_text"


def test_classify_rejects_outside_bbox():
    img = BinaryImage(np.zeros((10, 10), dtype=bool))
    with pytest.raises(ValueError):
        classify_block(img, Rect(5, 5, 10, 10))


def test_synth_text_column_is_text():
    gray, truth = render_page(PageSpec(scale=40, lines=6, seed=3))
    img = otsu(gray)
    block = next(b for b in truth.blocks if b.kind == "text")
    assert classify_block(img, block.rect) == "text"


# ---------------------------------------------------------------------------
# Full segmentation
# ---------------------------------------------------------------------------

def test_empty_page_zero_blocks():
    img = BinaryImage(np.zeros((50, 50), dtype=bool))
    layout = rlsa_segment(img)
    assert layout == PageLayout(blocks=(), page_size=(50, 50))


def test_two_column_page_two_text_blocks():
    spec = PageSpec(scale=40, lines=8, columns=2, words_per_line=(3, 4), seed=13)
    gray, truth = render_page(spec)
    layout = rlsa_segment(otsu(gray))
    text = [b for b in layout.blocks if b.kind == "text"]
    assert len(text) == 2
    truths = sorted((b.rect for b in truth.blocks if b.kind == "text"),
                    key=lambda r: r.x)
    got = sorted((b.bbox for b in text), key=lambda r: r.x)
    for t, g in zip(truths, got):
        assert abs(g.x - t.x) <= 5 and abs(g.y - t.y) <= 5
        assert abs(g.right - t.right) <= 5 and abs(g.bottom - t.bottom) <= 5


def test_image_region_classified_non_text():
    base = PageSpec(scale=40, lines=10, columns=2, words_per_line=(3, 4), seed=17)
    plan = plan_page(base)
    col = plan.columns[1]
    block = Rect(col.x, col.bottom - 200, 200, 200)
    spec = PageSpec(scale=40, lines=10, columns=2, words_per_line=(3, 4), seed=17,
                    image_block=block)
    gray, truth = render_page(spec)
    layout = rlsa_segment(otsu(gray))
    text = [b for b in layout.blocks if b.kind == "text"]
    non_text = [b for b in layout.blocks if b.kind == "non_text"]
    assert len(text) == 2 and len(non_text) == 1
    nt = non_text[0].bbox
    assert abs(nt.x - block.x) <= 5 and abs(nt.y - block.y) <= 5


def test_blocks_disjoint_and_cover_ink():
    for seed in (19, 23, 29):
        gray, _ = render_page(PageSpec(scale=40, lines=7, seed=seed))
        img = otsu(gray)
        layout = rlsa_segment(img)
        blocks = layout.blocks
        for i in range(len(blocks)):
            for j in range(i + 1, len(blocks)):
                assert not blocks[i].bbox.overlaps(blocks[j].bbox)
        covered = np.zeros(img.pixels.shape, dtype=bool)
        for b in blocks:
            covered[b.bbox.y:b.bbox.bottom, b.bbox.x:b.bbox.right] = True
        assert np.all(covered[img.pixels])
