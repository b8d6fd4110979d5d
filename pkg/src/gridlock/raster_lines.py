"""Rule extraction from page rasters by thresholding and morphological opening."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import DEFAULT_TOL, Orientation, Point, Segment, Tolerances, merge_collinear
from .page_model import RasterPage


class ConfigError(ValueError):
    pass


@dataclass
class BinaryImage:
    """Bitmap with 1 = ink, shape (height, width)."""

    bits: np.ndarray

    def __post_init__(self):
        self.bits = np.ascontiguousarray(self.bits, dtype=np.uint8)

    @property
    def width_px(self) -> int:
        return self.bits.shape[1]

    @property
    def height_px(self) -> int:
        return self.bits.shape[0]


@dataclass(frozen=True)
class StructuringElement:
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ConfigError("structuring element must be at least 1x1")
        if self.width % 2 == 0 or self.height % 2 == 0:
            raise ConfigError("structuring element sides must be odd")


def binarize(img: RasterPage, window: int = 31, offset: int = 10) -> BinaryImage:
    if window < 1 or window % 2 == 0:
        raise ConfigError(f"binarize window must be odd and positive, got {window}")
    return BinaryImage(kernels.mean_threshold(img.pixels, int(window), int(offset)))


def erode(img: BinaryImage, se: StructuringElement) -> BinaryImage:
    return BinaryImage(kernels.erode(img.bits, se.height, se.width))


def dilate(img: BinaryImage, se: StructuringElement) -> BinaryImage:
    return BinaryImage(kernels.dilate(img.bits, se.height, se.width))


def opening(img: BinaryImage, se: StructuringElement) -> BinaryImage:
    return dilate(erode(img, se), se)


def kernel_length(width_px: int, min_len_frac: float) -> int:
    k = max(5, int(round(min_len_frac * width_px)))
    return k if k % 2 else k + 1


def rule_masks(img: BinaryImage, min_len_frac: float = 0.04):
    """Horizontal and vertical opened masks plus the kernel length used."""
    k = kernel_length(img.width_px, min_len_frac)
    h = opening(img, StructuringElement(k, 1))
    v = opening(img, StructuringElement(1, k))
    return h, v, k


def _mask_segments(mask: BinaryImage, orient: Orientation, k: int, px_to_pt: float) -> list[Segment]:
    out = []
    for min_x, max_x, min_y, max_y, sum_x, sum_y, count in kernels.component_stats(mask.bits):
        if orient is Orientation.H:
            if max_x - min_x + 1 < k:
                continue
            pos = (sum_y / count + 0.5) * px_to_pt
            out.append(Segment(orient, pos, min_x * px_to_pt, (max_x + 1) * px_to_pt))
        else:
            if max_y - min_y + 1 < k:
                continue
            pos = (sum_x / count + 0.5) * px_to_pt
            out.append(Segment(orient, pos, min_y * px_to_pt, (max_y + 1) * px_to_pt))
    return out


def extract_rule_segments(img: BinaryImage, dpi: float, min_len_frac: float = 0.04,
                          tol: Tolerances = DEFAULT_TOL) -> list[Segment]:
    """Long horizontal/vertical ink runs as page-unit segments (H first, then V)."""
    hmask, vmask, k = rule_masks(img, min_len_frac)
    px_to_pt = 72.0 / dpi
    hs = merge_collinear(_mask_segments(hmask, Orientation.H, k, px_to_pt), tol)
    vs = merge_collinear(_mask_segments(vmask, Orientation.V, k, px_to_pt), tol)
    return hs + vs


def bridge_short_rules(img: BinaryImage, segments: list[Segment], dpi: float,
                       min_len_frac: float = 0.04, short_frac: float = 0.25,
                       tol: Tolerances = DEFAULT_TOL) -> list[Segment]:
    """Add rules shorter than the opening kernel that run between two long rules.

    The long-rule kernel erases edges of small cells along with glyph
    strokes. A short run is kept only when both of its ends land on a
    perpendicular long rule, which glyph strokes almost never do.
    """
    k = kernel_length(img.width_px, min_len_frac)
    ks = max(3, int(round(k * short_frac)))
    ks = ks if ks % 2 else ks + 1
    if ks >= k:
        return list(segments)
    px_to_pt = 72.0 / dpi
    hs = [s for s in segments if s.is_horizontal]
    vs = [s for s in segments if not s.is_horizontal]
    j = tol.join_tol

    def lands(end: float, pos: float, perp: list[Segment]) -> bool:
        return any(abs(p.position - end) <= j and p.lo - j <= pos <= p.hi + j for p in perp)

    extra_h = [s for s in _mask_segments(opening(img, StructuringElement(ks, 1)), Orientation.H, ks, px_to_pt)
               if lands(s.lo, s.position, vs) and lands(s.hi, s.position, vs)]
    extra_v = [s for s in _mask_segments(opening(img, StructuringElement(1, ks)), Orientation.V, ks, px_to_pt)
               if lands(s.lo, s.position, hs) and lands(s.hi, s.position, hs)]
    return merge_collinear(hs + extra_h, tol) + merge_collinear(vs + extra_v, tol)


def _touches(h: Segment, v: Segment, join_tol: float) -> bool:
    return (v.lo - join_tol <= h.position <= v.hi + join_tol
            and h.lo - join_tol <= v.position <= h.hi + join_tol)


def intersection_pairs(h: list[Segment], v: list[Segment], tol: Tolerances = DEFAULT_TOL):
    """Index pairs (i, j) of touching H/V segments."""
    return [(i, j) for i, hs in enumerate(h) for j, vs in enumerate(v)
            if _touches(hs, vs, tol.join_tol)]


def find_intersections(h: list[Segment], v: list[Segment], tol: Tolerances = DEFAULT_TOL) -> list[Point]:
    pts: list[Point] = []
    for i, j in intersection_pairs(h, v, tol):
        p = Point(v[j].position, h[i].position)
        if not any(abs(p.x - o.x) <= tol.line_snap_tol and abs(p.y - o.y) <= tol.line_snap_tol
                   for o in pts):
            pts.append(p)
    return sorted(pts, key=lambda p: (p.y, p.x))
