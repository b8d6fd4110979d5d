"""Page-level pipeline: primitives -> regions -> tables -> text -> unified output."""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import Config
from .deskew import SkewEstimate, estimate_skew, rotate_raster
from .emit import PageOutput, page_to_cells
from .geometry import Rect, Segment
from .linecell import DegenerateRegionError, extract_table
from .page_model import PageGraphics, RasterPage, SourceKind, q
from .raster_lines import binarize, bridge_short_rules, extract_rule_segments
from .table_region import RegionKind, detect_regions
from .text_match import assign_spans, merge_paragraphs


@dataclass
class RasterResult:
    page: PageGraphics
    skew: SkewEstimate | None = None
    warnings: list[str] = field(default_factory=list)


def raster_to_page(raster: RasterPage, cfg: Config = Config(), page_index: int = 0,
                   deskew: bool = True) -> RasterResult:
    """Binarize, optionally deskew, and pull rule segments out of a page image."""
    binary = binarize(raster, cfg.binarize_window, cfg.binarize_offset)
    est = None
    warnings = []
    if deskew:
        est = estimate_skew(binary, cfg.deskew_coarse_step, cfg.deskew_fine_step)
        if abs(est.angle_deg) >= cfg.deskew_min_angle:
            raster = rotate_raster(raster, -est.angle_deg)
            binary = binarize(raster, cfg.binarize_window, cfg.binarize_offset)
            warnings.append(f"deskewed by {-est.angle_deg:.2f} degrees")
    px_to_pt = 72.0 / raster.dpi
    width, height = q(raster.width_px * px_to_pt), q(raster.height_px * px_to_pt)
    segs = []
    found = extract_rule_segments(binary, raster.dpi, cfg.min_len_frac, cfg.tol)
    if cfg.short_rule_frac > 0:
        found = bridge_short_rules(binary, found, raster.dpi, cfg.min_len_frac, cfg.short_rule_frac, cfg.tol)
    for s in found:
        lim = height if s.is_horizontal else width
        span_lim = width if s.is_horizontal else height
        seg = Segment(s.orientation, min(q(s.position), lim), q(s.lo), min(q(s.hi), span_lim))
        if seg.lo < seg.hi:
            segs.append(seg)
    page = PageGraphics(page_index, width, height, [], segs, [], SourceKind.IMAGE)
    return RasterResult(page, est, warnings)


def _inside(box: Rect, region: Rect, pad: float) -> bool:
    c = box.center
    return region.contains_point(c.x, c.y, pad)


def analyze_page(page: PageGraphics, cfg: Config = Config(), images: list[tuple[Rect, str]] = (),
                 warnings: list[str] = ()) -> PageOutput:
    """Run region detection, LineCell and text matching on one page."""
    tol = cfg.tol
    warnings = list(warnings)
    tables, wireless = [], []
    for region in detect_regions(page, tol):
        if region.kind is RegionKind.WIRELESS:
            wireless.append(region.bbox)
            warnings.append("wireless table detected; structure not parsed")
            continue
        try:
            tables.append(extract_table(region, page, tol))
        except DegenerateRegionError as exc:
            warnings.append(f"region skipped: {exc}")

    digital = page.source_kind is SourceKind.DIGITAL_PDF and bool(page.text_spans)
    loose = list(page.text_spans) if digital else []
    if digital:
        for i, t in enumerate(tables):
            mine = [s for s in loose if _inside(s.bbox, t.region_bbox, tol.line_snap_tol)]
            if mine:
                ids = {id(s) for s in mine}
                loose = [s for s in loose if id(s) not in ids]
                tables[i] = assign_spans(t, mine, tol, cfg.newline_ratio)
    paragraphs = merge_paragraphs(loose, cfg.para_line_gap_ratio, cfg.para_gap_ratio,
                                  cfg.para_min_x_overlap)
    for t in tables:
        warnings.extend(t.warnings)
    cells, w = page_to_cells(tables, paragraphs, list(images), wireless)
    warnings.extend(w)
    return PageOutput(page.page_index, cells, warnings)
