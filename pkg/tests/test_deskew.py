import numpy as np
import pytest

from gridlock.deskew import PageOrientation, coarse_orientation, estimate_skew, rotate_raster
from gridlock.geometry import Orientation, Rect, Segment
from gridlock.page_model import PageGraphics, RasterPage, TextSpan
from gridlock.raster_lines import binarize
from gridlock.synth import SynthParams, gen_table


def skew_of(raster):
    return estimate_skew(binarize(raster))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_estimate_recovers_rendered_angle(seed):
    _, _, raster = gen_table(SynthParams(seed=seed, skew_deg=3.0))
    assert abs(skew_of(raster).angle_deg - 3.0) <= 0.5


@pytest.mark.parametrize("theta", [-10.0, -5.0, -1.0, 1.0, 10.0])
def test_estimate_after_rotate_raster(theta):
    _, _, raster = gen_table(SynthParams(seed=11))
    est = skew_of(rotate_raster(raster, theta))
    assert abs(est.angle_deg - theta) <= 0.5
    assert 0 < est.confidence <= 1


def test_unrotated_and_blank():
    _, _, raster = gen_table(SynthParams(seed=4))
    assert abs(skew_of(raster).angle_deg) <= 0.2
    blank = RasterPage(np.full((200, 300), 255, np.uint8), 150)
    est = skew_of(blank)
    assert (est.angle_deg, est.confidence) == (0.0, 0.0)


def test_rotate_zero_is_identity_and_range_is_checked():
    _, _, raster = gen_table(SynthParams(seed=2))
    assert np.array_equal(rotate_raster(raster, 0).pixels, raster.pixels)
    with pytest.raises(ValueError):
        rotate_raster(raster, 90)


@pytest.mark.parametrize("theta", [2.0, -7.5, 30.0])
def test_rotate_round_trip(theta):
    _, _, raster = gen_table(SynthParams(seed=3, noise_sigma=0))
    back = rotate_raster(rotate_raster(raster, theta), -theta).pixels
    h, w = raster.pixels.shape
    bh, bw = back.shape
    oy, ox = (bh - h) // 2, (bw - w) // 2
    # centred crop; compare an interior window to keep clear of the canvas corners
    crop = back[oy:oy + h, ox:ox + w].astype(int)
    orig = raster.pixels.astype(int)
    m = 20
    diff = np.abs(crop[m:-m, m:-m] - orig[m:-m, m:-m])
    assert (diff <= 8).mean() >= 0.99


def test_rotate_enlarges_canvas_with_white_fill():
    img = RasterPage(np.zeros((40, 80), np.uint8), 150)
    out = rotate_raster(img, 10).pixels
    assert out.shape[0] > 40 and out.shape[1] > 80
    assert out[0, 0] == 255 and out[-1, -1] == 255
    assert out[out.shape[0] // 2, out.shape[1] // 2] == 0


def test_coarse_orientation_examples():
    spans = [TextSpan(Rect(72, 100 + 14 * i, 400, 110 + 14 * i), "line") for i in range(10)]
    page = PageGraphics(0, 612, 792, spans)
    assert coarse_orientation(page).orientation is PageOrientation.DEG0
    tspans = [TextSpan(Rect(s.bbox.y0, s.bbox.x0, s.bbox.y1, s.bbox.x1), s.text) for s in spans]
    g = coarse_orientation(PageGraphics(0, 792, 612, tspans))
    assert g.orientation is PageOrientation.DEG90 and g.warning
    grid = [Segment(Orientation.H, y, 100, 300) for y in (100, 200, 300)] + \
           [Segment(Orientation.V, x, 100, 300) for x in (100, 200, 300)]
    assert coarse_orientation(PageGraphics(0, 612, 792, [], grid)).orientation is PageOrientation.UNKNOWN
