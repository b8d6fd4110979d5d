"""Small-angle skew estimation and correction, plus a coarse orientation guess."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from . import kernels
from .page_model import PageGraphics, RasterPage
from .raster_lines import BinaryImage, StructuringElement, opening

MAX_ANGLE = 45.0
# ink points beyond this are strided down before profiling
_MAX_POINTS = 400_000


@dataclass(frozen=True)
class SkewEstimate:
    angle_deg: float
    confidence: float


def _profile(ys, xs, angles, n_bins, base):
    tans = np.tan(np.radians(np.asarray(angles, dtype=np.float64)))
    return kernels.shear_variances(ys, xs, tans, n_bins, base)


def estimate_skew(img: BinaryImage, coarse_step: float = 1.0, fine_step: float = 0.1) -> SkewEstimate:
    """Angle (degrees, counter-clockwise positive) that straightens the rows.

    Coarse search over [-45, 45], then a fine search within one coarse step
    of the best coarse angle. Scores are row-profile variances of the ink
    after a horizontal shear.
    """
    ys, xs = np.nonzero(img.bits)
    if len(ys) == 0:
        return SkewEstimate(0.0, 0.0)
    if len(ys) > _MAX_POINTS:
        stride = int(math.ceil(len(ys) / _MAX_POINTS))
        ys, xs = ys[::stride], xs[::stride]
    h, w = img.bits.shape
    ys = ys.astype(np.float64)
    xs = xs.astype(np.float64) - (w - 1) / 2.0
    n_bins = h + w + 2
    base = w / 2.0 + 1.0

    n_coarse = int(round(MAX_ANGLE / coarse_step))
    coarse = np.arange(-n_coarse, n_coarse + 1) * coarse_step
    cv = _profile(ys, xs, coarse, n_bins, base)
    # ties resolve toward the smallest |angle|
    best_c = coarse[min(range(len(coarse)), key=lambda i: (-cv[i], abs(coarse[i])))]
    n_fine = int(round(coarse_step / fine_step))
    fine = best_c + np.arange(-n_fine, n_fine + 1) * fine_step
    fine = fine[np.abs(fine) <= MAX_ANGLE + 1e-9]
    fv = _profile(ys, xs, fine, n_bins, base)
    i = min(range(len(fine)), key=lambda k: (-fv[k], abs(fine[k])))
    best = float(fv[i])
    if best <= 0:
        return SkewEstimate(0.0, 0.0)
    med = float(np.median(np.concatenate([cv, fv])))
    conf = min(1.0, max(0.0, (best - med) / best))
    return SkewEstimate(round(float(fine[i]), 6) + 0.0, conf)


def rotate_raster(img: RasterPage, angle_deg: float) -> RasterPage:
    """Rotate counter-clockwise about the centre, bilinear, on an enlarged white canvas."""
    if abs(angle_deg) > MAX_ANGLE:
        raise ValueError(f"rotation of {angle_deg} degrees is outside the small-angle range")
    if angle_deg == 0:
        return RasterPage(img.pixels.copy(), img.dpi)
    src = img.pixels
    h, w = src.shape
    t = math.radians(angle_deg)
    c, s = math.cos(t), math.sin(t)
    nw = int(math.ceil(w * abs(c) + h * abs(s) - 1e-9))
    nh = int(math.ceil(w * abs(s) + h * abs(c) - 1e-9))
    return RasterPage(kernels.rotate_bilinear(src, nh, nw, c, s), img.dpi)


def deskew_raster(img: RasterPage, binary: BinaryImage, min_angle: float = 0.05):
    """Estimate skew on ``binary`` and rotate ``img`` back. Returns (raster, estimate)."""
    est = estimate_skew(binary)
    if abs(est.angle_deg) < min_angle:
        return img, est
    return rotate_raster(img, -est.angle_deg), est


class PageOrientation(str, Enum):
    DEG0 = "0"
    DEG90 = "90"
    DEG180 = "180"
    DEG270 = "270"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class OrientationGuess:
    orientation: PageOrientation
    horizontal_mass: float
    vertical_mass: float
    warning: Optional[str] = None


def coarse_orientation(page: Union[PageGraphics, BinaryImage], dominance: float = 3.0,
                       min_run_px: int = 15) -> OrientationGuess:
    """Compare horizontal and vertical rule/text mass.

    Never answers 180 degrees: without a text model it cannot be told apart
    from upright. A vertical-dominant page is reported as 90 with a warning
    because the rotation direction is not observable either.
    """
    if isinstance(page, PageGraphics):
        hm = sum(s.length for s in page.h_segments)
        vm = sum(s.length for s in page.v_segments)
        for sp in page.text_spans:
            if sp.bbox.width >= sp.bbox.height:
                hm += sp.bbox.width
            else:
                vm += sp.bbox.height
    else:
        k = min_run_px if min_run_px % 2 else min_run_px + 1
        hm = float(opening(page, StructuringElement(k, 1)).bits.sum())
        vm = float(opening(page, StructuringElement(1, k)).bits.sum())
    if vm > 0 and vm >= dominance * hm:
        return OrientationGuess(PageOrientation.DEG90, hm, vm,
                                "vertical layout dominates; rotation sign assumed 90")
    if hm > 0 and hm >= dominance * vm:
        return OrientationGuess(PageOrientation.DEG0, hm, vm)
    return OrientationGuess(PageOrientation.UNKNOWN, hm, vm)
