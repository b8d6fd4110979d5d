"""Unified page output (PdfCell) and its HTML / CSV / JSON serializers."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

from .geometry import Rect
from .linecell import LogicalCell, TableStructure
from .page_model import q
from .text_match import Paragraph

OUTPUT_VERSION = 1


class CellKind(str, Enum):
    TEXT = "text"
    TABLE = "table"
    IMAGE = "image"
    WIRELESS = "wireless-unparsed"


@dataclass
class ImageRef:
    ref: str


@dataclass
class PdfCell:
    kind: CellKind
    bbox: Rect
    content: Union[Paragraph, TableStructure, ImageRef, None]

    def __post_init__(self):
        expected = {CellKind.TEXT: Paragraph, CellKind.TABLE: TableStructure,
                    CellKind.IMAGE: ImageRef, CellKind.WIRELESS: type(None)}[self.kind]
        if not isinstance(self.content, expected):
            raise TypeError(f"{self.kind.value} cell needs {expected.__name__} content")


@dataclass
class PageOutput:
    page_index: int
    cells: list[PdfCell] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def tables(self) -> list[TableStructure]:
        return [c.content for c in self.cells if c.kind is CellKind.TABLE]


@dataclass
class DocumentOutput:
    pages: list[PageOutput] = field(default_factory=list)


# -- HTML -------------------------------------------------------------------


def escape_text(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;").replace("\n", "<br/>"))


def table_to_html(t: TableStructure) -> str:
    rows: list[list[LogicalCell]] = [[] for _ in range(t.n_rows)]
    for c in sorted(t.cells, key=lambda c: (c.row, c.col)):
        rows[c.row].append(c)
    parts = ["<table>"]
    for row in rows:
        parts.append("<tr>")
        for c in row:
            attrs = ""
            if c.rowspan > 1:
                attrs += f' rowspan="{c.rowspan}"'
            if c.colspan > 1:
                attrs += f' colspan="{c.colspan}"'
            parts.append(f"<td{attrs}>{escape_text(c.text)}</td>")
        parts.append("</tr>")
    parts.append("</table>")
    return "".join(parts)


def page_to_html(page: PageOutput) -> str:
    body = []
    for cell in page.cells:
        if cell.kind is CellKind.TABLE:
            body.append(table_to_html(cell.content))
        elif cell.kind is CellKind.TEXT:
            body.append(f"<p>{escape_text(cell.content.text)}</p>")
        elif cell.kind is CellKind.IMAGE:
            body.append(f'<img src="{escape_text(cell.content.ref)}"/>')
        else:
            b = " ".join(f"{q(v):g}" for v in cell.bbox.as_list())
            body.append(f'<div class="wireless-unparsed" data-bbox="{b}"></div>')
    return "\n".join(body) + "\n"


# -- CSV --------------------------------------------------------------------


def table_to_csv(t: TableStructure) -> str:
    grid = [["" for _ in range(t.n_cols)] for _ in range(t.n_rows)]
    for c in t.cells:
        grid[c.row][c.col] = c.text
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    w.writerows(grid)
    return buf.getvalue()


# -- page assembly ----------------------------------------------------------


def _overlaps(a: Rect, b: Rect) -> bool:
    return min(a.x1, b.x1) > max(a.x0, b.x0) and min(a.y1, b.y1) > max(a.y0, b.y0)


def page_to_cells(tables: list[TableStructure], paragraphs: list[Paragraph],
                  images: list[tuple[Rect, str]] = (), wireless: list[Rect] = ()):
    """Wrap one page's items as PdfCells in reading order.

    Returns ``(cells, warnings)``. Paragraphs that overlap a table are
    dropped; their text already lives in the table's cells.
    """
    cells = [PdfCell(CellKind.TABLE, t.region_bbox, t) for t in tables]
    warnings = []
    for p in paragraphs:
        if any(_overlaps(p.bbox, t.region_bbox) for t in tables):
            warnings.append(f"paragraph at y={q(p.bbox.y0):g} overlaps a table; dropped")
            continue
        cells.append(PdfCell(CellKind.TEXT, p.bbox, p))
    cells.extend(PdfCell(CellKind.IMAGE, box, ImageRef(ref)) for box, ref in images)
    cells.extend(PdfCell(CellKind.WIRELESS, box, None) for box in wireless)
    cells.sort(key=lambda c: (q(c.bbox.y0), q(c.bbox.x0)))
    return cells, warnings


# -- JSON -------------------------------------------------------------------


def _box(r: Rect | None):
    return None if r is None else [q(v) for v in r.as_list()]


def table_to_dict(t: TableStructure) -> dict:
    return {
        "n_rows": t.n_rows,
        "n_cols": t.n_cols,
        "region_bbox": _box(t.region_bbox),
        "cells": [{"row": c.row, "col": c.col, "rowspan": c.rowspan, "colspan": c.colspan,
                   "bbox": _box(c.bbox), "text": c.text} for c in t.cells],
        "warnings": list(t.warnings),
    }


def _unbox(v):
    return None if v is None else Rect(*v)


def table_from_dict(d: dict) -> TableStructure:
    return TableStructure(
        d["n_rows"], d["n_cols"],
        [LogicalCell(c["row"], c["col"], c["rowspan"], c["colspan"], _unbox(c["bbox"]), c["text"])
         for c in d["cells"]],
        _unbox(d["region_bbox"]), list(d.get("warnings", [])))


def _cell_to_dict(c: PdfCell) -> dict:
    d = {"kind": c.kind.value, "bbox": _box(c.bbox)}
    if c.kind is CellKind.TABLE:
        d["table"] = table_to_dict(c.content)
    elif c.kind is CellKind.TEXT:
        d["text"] = c.content.text
        d["line_count"] = c.content.line_count
    elif c.kind is CellKind.IMAGE:
        d["ref"] = c.content.ref
    return d


def _cell_from_dict(d: dict) -> PdfCell:
    kind = CellKind(d["kind"])
    box = _unbox(d["bbox"])
    if kind is CellKind.TABLE:
        return PdfCell(kind, box, table_from_dict(d["table"]))
    if kind is CellKind.TEXT:
        return PdfCell(kind, box, Paragraph(box, d["text"], d["line_count"]))
    if kind is CellKind.IMAGE:
        return PdfCell(kind, box, ImageRef(d["ref"]))
    return PdfCell(kind, box, None)


def document_to_dict(doc: DocumentOutput) -> dict:
    return {"version": OUTPUT_VERSION,
            "pages": [{"page_index": p.page_index,
                       "cells": [_cell_to_dict(c) for c in p.cells],
                       "warnings": list(p.warnings)} for p in doc.pages]}


def document_to_json(doc: DocumentOutput) -> bytes:
    return json.dumps(document_to_dict(doc), ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def document_from_json(data: bytes | str) -> DocumentOutput:
    d = json.loads(data)
    if d.get("version") != OUTPUT_VERSION:
        raise ValueError(f"unsupported output version {d.get('version')!r}")
    return DocumentOutput([PageOutput(p["page_index"], [_cell_from_dict(c) for c in p["cells"]],
                                      list(p.get("warnings", []))) for p in d["pages"]])
