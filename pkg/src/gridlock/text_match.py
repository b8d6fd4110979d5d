"""Placing text spans into table cells, and paragraphs for the rest."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from statistics import median

from .geometry import DEFAULT_TOL, Rect, Tolerances, snap_1d
from .linecell import TableStructure
from .page_model import TextSpan


@dataclass(frozen=True)
class Paragraph:
    bbox: Rect
    text: str
    line_count: int = 1


def _advances(span: TextSpan) -> list[float]:
    n = len(span.text)
    width = span.bbox.width
    if span.char_advances is not None and len(span.char_advances) == n:
        total = math.fsum(span.char_advances)
        if total > 0:
            return [a * width / total for a in span.char_advances]
    return [width / n] * n


def split_span(span: TextSpan, cut_xs: list[float]) -> list[TextSpan]:
    """Split ``span`` at the character boundaries nearest to each cut.

    Ties between two equally near boundaries go to the later one. Cuts
    outside the span, or mapping to the span's own ends, are ignored.
    """
    b = span.bbox
    n = len(span.text)
    adv = _advances(span)
    edges = [b.x0]
    for a in adv:
        edges.append(edges[-1] + a)
    edges[-1] = b.x1
    chosen: set[int] = set()
    for cut in cut_xs:
        if not b.x0 < cut < b.x1:
            continue
        best, best_d = None, math.inf
        for k in range(1, n):
            d = abs(edges[k] - cut)
            if d <= best_d:
                best, best_d = k, d
        if best is not None:
            chosen.add(best)
    if not chosen:
        return [span]
    idx = [0] + sorted(chosen) + [n]
    out = []
    for a, z in zip(idx, idx[1:]):
        part_adv = None
        if span.char_advances is not None:
            part_adv = tuple(span.char_advances[a:z])
        out.append(TextSpan(Rect(edges[a], b.y0, edges[z], b.y1), span.text[a:z], part_adv))
    return out


def _cell_at(table: TableStructure, x: float, y: float):
    for cell in table.cells:
        bb = cell.bbox
        if bb.x0 <= x <= bb.x1 and bb.y0 <= y <= bb.y1:
            return cell
    return None


def _split_for_table(span: TextSpan, table: TableStructure, tol: Tolerances) -> list[TextSpan]:
    b = span.bbox
    cy = b.center.y
    row_cells = sorted((c for c in table.cells if c.bbox.y0 <= cy <= c.bbox.y1),
                       key=lambda c: c.bbox.x0)
    if len(row_cells) < 2:
        return [span]
    char_w = b.width / max(len(span.text), 1)
    need = tol.overlap_frac * char_w
    hit = [c for c in row_cells if min(b.x1, c.bbox.x1) - max(b.x0, c.bbox.x0) > need]
    if len(hit) < 2:
        return [span]
    cuts = [c.bbox.x0 for c in hit[1:] if b.x0 < c.bbox.x0 < b.x1]
    return split_span(span, cuts)


def _join_cell(spans: list[TextSpan], newline_gap: float) -> str:
    spans = sorted(spans, key=lambda s: (s.bbox.y0, s.bbox.x0, s.text))
    parts = [spans[0].text]
    for prev, cur in zip(spans, spans[1:]):
        sep = "\n" if cur.bbox.y0 - prev.bbox.y1 > newline_gap else " "
        parts.append(sep)
        parts.append(cur.text)
    return "".join(parts)


def assign_spans(table: TableStructure, spans: list[TextSpan], tol: Tolerances = DEFAULT_TOL,
                 newline_ratio: float = 0.6) -> TableStructure:
    """Fill ``cell.text`` from spans; returns a new structure."""
    pieces = []
    for sp in spans:
        pieces.extend(_split_for_table(sp, table, tol))
    cells = [replace(c, text="") for c in table.cells]
    out = replace(table, cells=cells, warnings=list(table.warnings))
    if not pieces:
        return out
    newline_gap = newline_ratio * median(p.bbox.height for p in pieces)
    buckets: dict[int, list[TextSpan]] = {}
    index = {id(c): i for i, c in enumerate(cells)}
    for p in pieces:
        cx, cy = p.bbox.center.x, p.bbox.center.y
        cell = _cell_at(out, cx, cy)
        if cell is None:
            cell = min(cells, key=lambda c: (math.hypot(c.bbox.center.x - cx, c.bbox.center.y - cy),
                                             c.row, c.col))
            out.warnings.append(f"span {p.text!r} outside all cells; attached to ({cell.row},{cell.col})")
        buckets.setdefault(index[id(cell)], []).append(p)
    for i, group in buckets.items():
        cells[i].text = _join_cell(group, newline_gap)
    return out


def _x_overlap(a: Rect, b: Rect) -> float:
    inter = min(a.x1, b.x1) - max(a.x0, b.x0)
    base = min(a.width, b.width)
    if base <= 0:
        return 0.0
    return max(inter, 0.0) / base


def merge_paragraphs(spans: list[TextSpan], line_gap_ratio: float = 0.5,
                     para_gap_ratio: float = 1.5, min_x_overlap: float = 0.5) -> list[Paragraph]:
    if not spans:
        return []
    med_h = median(s.bbox.height for s in spans)
    clusters = snap_1d([s.bbox.center.y for s in spans], line_gap_ratio * med_h)
    lines = []
    for c in clusters:
        members = sorted((spans[i] for i in c.members), key=lambda s: (s.bbox.x0, s.bbox.y0))
        box = Rect(min(s.bbox.x0 for s in members), min(s.bbox.y0 for s in members),
                   max(s.bbox.x1 for s in members), max(s.bbox.y1 for s in members))
        lines.append((box, " ".join(s.text for s in members)))
    lines.sort(key=lambda ln: (ln[0].y0, ln[0].x0))
    line_h = median(box.height for box, _ in lines)

    paras = []
    box, texts = lines[0][0], [lines[0][1]]
    prev = box
    for nbox, ntext in lines[1:]:
        gap = nbox.y0 - prev.y1
        joined = gap <= para_gap_ratio * line_h and _x_overlap(prev, nbox) >= min_x_overlap
        prev = nbox
        if joined:
            box = box.union(nbox)
            texts.append(ntext)
        else:
            paras.append(Paragraph(box, " ".join(texts), len(texts)))
            box, texts = nbox, [ntext]
    paras.append(Paragraph(box, " ".join(texts), len(texts)))
    return paras
