"""Table trees and a strict parser for the table/tr/td HTML subset."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from html.parser import HTMLParser

from ..linecell import LogicalCell, TableStructure


class TableParseError(ValueError):
    def __init__(self, message: str, pos: tuple[int, int] | None = None):
        where = f" at line {pos[0]}, column {pos[1]}" if pos else ""
        super().__init__(message + where)
        self.pos = pos


@dataclass
class TableTree:
    label: str  # "table" | "tr" | "td"
    children: list["TableTree"] = field(default_factory=list)
    rowspan: int = 1
    colspan: int = 1
    content: str = ""

    def node_count(self) -> int:
        return 1 + sum(c.node_count() for c in self.children)

    def postorder(self) -> list["TableTree"]:
        out = []
        for c in self.children:
            out.extend(c.postorder())
        out.append(self)
        return out

    def without_content(self) -> "TableTree":
        return TableTree(self.label, [c.without_content() for c in self.children],
                         self.rowspan, self.colspan, "")

    def __eq__(self, other):
        if not isinstance(other, TableTree):
            return NotImplemented
        return (self.label == other.label and self.rowspan == other.rowspan
                and self.colspan == other.colspan and self.content == other.content
                and self.children == other.children)


_WS = re.compile(r"[ \t\r\n\f\v]+")
_IGNORED = {"thead", "tbody", "tfoot"}


class _Builder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.tables: list[TableTree] = []
        self.stack: list[str] = []
        self.table: TableTree | None = None
        self.row: TableTree | None = None
        self.cell: TableTree | None = None
        self.buf: list[str] = []

    def _err(self, msg):
        raise TableParseError(msg, self.getpos())

    def handle_starttag(self, tag, attrs):
        if tag == "th":
            tag = "td"
        if tag == "table":
            if self.table is not None:
                self._err("nested <table>")
            self.table = TableTree("table")
            self.tables.append(self.table)
        elif tag in _IGNORED:
            if self.table is None or self.row is not None:
                self._err(f"<{tag}> outside table level")
        elif tag == "tr":
            if self.table is None or self.row is not None:
                self._err("<tr> must be a child of <table>")
            self.row = TableTree("tr")
            self.table.children.append(self.row)
        elif tag == "td":
            if self.row is None or self.cell is not None:
                self._err("<td> must be a child of <tr>")
            spans = {"rowspan": 1, "colspan": 1}
            for k, v in attrs:
                if k in spans:
                    try:
                        spans[k] = int(v)
                    except (TypeError, ValueError):
                        self._err(f"bad {k} value {v!r}")
                    if spans[k] < 1:
                        self._err(f"{k} must be positive")
            self.cell = TableTree("td", rowspan=spans["rowspan"], colspan=spans["colspan"])
            self.row.children.append(self.cell)
            self.buf = []
            return
        elif tag == "br":
            if self.cell is not None:
                self.buf.append("\n")
            return
        else:
            if self.table is not None and self.cell is None:
                self._err(f"unexpected <{tag}> inside table structure")
            if self.table is None:
                self._err(f"unexpected top-level <{tag}>")
            return  # inline markup inside a cell: keep its text only
        self.stack.append(tag)

    def handle_startendtag(self, tag, attrs):
        if tag == "br":
            if self.cell is not None:
                self.buf.append("\n")
            return
        self.handle_starttag(tag, attrs)
        self.handle_endtag(tag)

    def handle_endtag(self, tag):
        if tag == "th":
            tag = "td"
        if tag == "td":
            if self.cell is None:
                self._err("stray </td>")
            self.cell.content = _normalize("".join(self.buf))
            self.cell = None
            return
        if tag not in ("table", "tr") and tag not in _IGNORED:
            return
        if self.cell is not None:
            self._err(f"</{tag}> while <td> is open")
        if not self.stack or self.stack[-1] != tag:
            self._err(f"mismatched </{tag}>")
        self.stack.pop()
        if tag == "tr":
            self.row = None
        elif tag == "table":
            self.table = None

    def handle_data(self, data):
        if self.cell is not None:
            self.buf.append(_WS.sub(" ", data))
        elif data.strip() and self.table is not None:
            self._err("text outside a cell")


def _normalize(text: str) -> str:
    """Collapse whitespace runs, keeping explicit line breaks."""
    lines = [re.sub(r"[ \t\r\f\v]+", " ", ln).strip() for ln in text.split("\n")]
    return "\n".join(lines).strip("\n")


def parse_tables(html: str) -> list[TableTree]:
    b = _Builder()
    b.feed(html)
    b.close()
    if b.cell is not None or b.row is not None or b.table is not None or b.stack:
        raise TableParseError("unclosed structural tag", b.getpos())
    return b.tables


def parse_table_html(html: str) -> TableTree:
    tables = parse_tables(html)
    if len(tables) != 1:
        raise TableParseError(f"expected exactly one <table>, found {len(tables)}")
    return tables[0]


def structure_to_tree(t: TableStructure, with_content: bool = True) -> TableTree:
    rows = [TableTree("tr") for _ in range(t.n_rows)]
    for c in sorted(t.cells, key=lambda c: (c.row, c.col)):
        rows[c.row].children.append(
            TableTree("td", rowspan=c.rowspan, colspan=c.colspan,
                      content=_normalize(c.text) if with_content else ""))
    return TableTree("table", rows)


def tree_to_structure(tree: TableTree) -> TableStructure:
    """Lay out rows/spans into lattice coordinates (HTML table placement)."""
    taken: set[tuple[int, int]] = set()
    cells = []
    n_cols = 0
    for r, tr in enumerate(tree.children):
        c = 0
        for td in tr.children:
            while (r, c) in taken:
                c += 1
            for dr in range(td.rowspan):
                for dc in range(td.colspan):
                    taken.add((r + dr, c + dc))
            cells.append(LogicalCell(r, c, td.rowspan, td.colspan, None, td.content))
            c += td.colspan
            n_cols = max(n_cols, c)
    n_rows = max([len(tree.children)] + [c.row + c.rowspan for c in cells])
    n_cols = max([n_cols] + [c.col + c.colspan for c in cells])
    return TableStructure(n_rows, n_cols, cells)
