"""Candidate table regions from the rule lattice, classified wired/wireless."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from statistics import median

from .geometry import DEFAULT_TOL, Rect, Tolerances, hull, snap_1d
from .page_model import PageGraphics, TextSpan
from .raster_lines import intersection_pairs


class RegionKind(str, Enum):
    WIRED = "wired"
    WIRELESS = "wireless"


@dataclass
class TableRegion:
    bbox: Rect
    h_segments: list[int] = field(default_factory=list)  # indices into page.h_segments
    v_segments: list[int] = field(default_factory=list)  # indices into page.v_segments
    kind: RegionKind = RegionKind.WIRED


def _wired_regions(page: PageGraphics, tol: Tolerances) -> list[TableRegion]:
    hs, vs = page.h_segments, page.v_segments
    nh = len(hs)
    parent = list(range(nh + len(vs)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    pairs = intersection_pairs(hs, vs, tol)
    for i, j in pairs:
        union(i, nh + j)
    n_cross: dict[int, int] = {}
    for i, _ in pairs:
        r = find(i)
        n_cross[r] = n_cross.get(r, 0) + 1

    comps: dict[int, tuple[list[int], list[int]]] = {}
    for i in range(nh):
        comps.setdefault(find(i), ([], []))[0].append(i)
    for j in range(len(vs)):
        comps.setdefault(find(nh + j), ([], []))[1].append(j)

    regions = []
    for root, (hi, vi) in comps.items():
        if len(hi) >= 2 and len(vi) >= 2 and n_cross.get(root, 0) >= 4:
            box = hull([hs[i].bbox() for i in hi] + [vs[j].bbox() for j in vi])
            regions.append(TableRegion(box, sorted(hi), sorted(vi)))

    # overlapping hulls (nested tables, stray crossings) collapse into one region
    merged = True
    while merged:
        merged = False
        for a in range(len(regions)):
            for b in range(a + 1, len(regions)):
                ra, rb = regions[a], regions[b]
                if _boxes_overlap(ra.bbox, rb.bbox):
                    regions[a] = TableRegion(ra.bbox.union(rb.bbox),
                                             sorted(ra.h_segments + rb.h_segments),
                                             sorted(ra.v_segments + rb.v_segments))
                    del regions[b]
                    merged = True
                    break
            if merged:
                break
    return regions


def _boxes_overlap(a: Rect, b: Rect) -> bool:
    return min(a.x1, b.x1) > max(a.x0, b.x0) and min(a.y1, b.y1) > max(a.y0, b.y0)


def _lines(spans: list[TextSpan]) -> list[list[TextSpan]]:
    if not spans:
        return []
    med_h = median(s.bbox.height for s in spans)
    clusters = snap_1d([s.bbox.center.y for s in spans], 0.5 * med_h)
    return [sorted((spans[i] for i in c.members), key=lambda s: s.bbox.x0) for c in clusters]


def _wireless_regions(page: PageGraphics, wired: list[TableRegion], tol: Tolerances) -> list[TableRegion]:
    free = [s for s in page.text_spans
            if not any(r.bbox.contains_point(s.bbox.center.x, s.bbox.center.y, tol.join_tol)
                       for r in wired)]
    lines = [ln for ln in _lines(free) if len(ln) >= 2]
    if len(lines) < 2:
        return []
    med_h = median(s.bbox.height for ln in lines for s in ln)
    align = max(tol.line_snap_tol, 0.5 * med_h)

    def anchors(ln):
        return [s.bbox.x0 for s in ln]

    def shared(a, b):
        return sum(1 for x in anchors(a) if any(abs(x - y) <= align for y in anchors(b)))

    out = []
    run = [lines[0]]
    for prev, cur in zip(lines, lines[1:]):
        gap = min(s.bbox.y0 for s in cur) - max(s.bbox.y1 for s in prev)
        if gap <= 2.0 * med_h and shared(prev, cur) >= 2:
            run.append(cur)
            continue
        if len(run) >= 2:
            out.append(run)
        run = [cur]
    if len(run) >= 2:
        out.append(run)

    regions = []
    for run in out:
        box = hull(s.bbox for ln in run for s in ln)
        rules = sum(1 for s in page.segments if box.intersects(s.bbox()))
        if rules < 2:
            regions.append(TableRegion(box, kind=RegionKind.WIRELESS))
    return regions


def detect_regions(page: PageGraphics, tol: Tolerances = DEFAULT_TOL) -> list[TableRegion]:
    """Wired regions from connected rule lattices, then wireless text grids.

    Expects the page's segments to be merged already (see ``merge_collinear``).
    """
    wired = _wired_regions(page, tol)
    regions = wired + _wireless_regions(page, wired, tol)
    return sorted(regions, key=lambda r: (round(r.bbox.y0, 3), round(r.bbox.x0, 3)))

