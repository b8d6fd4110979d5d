import csv
import json
import io

from hypothesis import given, settings
from hypothesis import strategies as st

from gridlock.emit import (CellKind, DocumentOutput, ImageRef, PageOutput, PdfCell, document_from_json,
                           document_to_json, page_to_cells, table_to_csv, table_to_html)
from gridlock.geometry import Rect
from gridlock.linecell import LogicalCell, TableStructure
from gridlock.metrics.tree import parse_table_html, tree_to_structure
from gridlock.synth import SynthParams, gen_table
from gridlock.text_match import Paragraph


def t2x2(texts=("a", "b", "c", "d")):
    cells = [LogicalCell(r, c, text=texts[2 * r + c]) for r in range(2) for c in range(2)]
    return TableStructure(2, 2, cells, Rect(0, 0, 10, 10))


def spanned(text="x"):
    return TableStructure(2, 2, [LogicalCell(0, 0, 1, 2, text=text), LogicalCell(1, 0, text="c"),
                                 LogicalCell(1, 1, text="d")], Rect(0, 0, 10, 10))


def test_html_examples():
    one = TableStructure(1, 1, [LogicalCell(0, 0, text="a")])
    assert table_to_html(one) == "<table><tr><td>a</td></tr></table>"
    assert table_to_html(spanned()) == ('<table><tr><td colspan="2">x</td></tr>'
                                        "<tr><td>c</td><td>d</td></tr></table>")
    esc = TableStructure(1, 1, [LogicalCell(0, 0, text='a<b & "q">\nz')])
    assert table_to_html(esc) == "<table><tr><td>a&lt;b &amp; &quot;q&quot;&gt;<br/>z</td></tr></table>"


def test_html_rowspan_rows_stay_present():
    t = TableStructure(2, 2, [LogicalCell(0, 0, 2, 1, text="tall"), LogicalCell(0, 1, text="b"),
                              LogicalCell(1, 1, text="d")])
    assert table_to_html(t) == ('<table><tr><td rowspan="2">tall</td><td>b</td></tr>'
                                "<tr><td>d</td></tr></table>")


def test_csv_examples():
    assert table_to_csv(t2x2()) == "a,b\r\nc,d\r\n"
    assert table_to_csv(spanned()).startswith("x,\r\n")
    q = t2x2(('he said "hi"', "a,b", "line\nbreak", "plain"))
    assert table_to_csv(q) == '"he said ""hi""","a,b"\r\n"line\nbreak",plain\r\n'


@settings(max_examples=200)
@given(st.integers(0, 100_000))
def test_csv_shape_and_html_round_trip(seed):
    truth, _, _ = gen_table(SynthParams(seed=seed, max_rows=8, max_cols=6))
    rows = list(csv.reader(io.StringIO(table_to_csv(truth), newline="")))
    assert len(rows) == truth.n_rows and all(len(r) == truth.n_cols for r in rows)
    back = tree_to_structure(parse_table_html(table_to_html(truth)))
    assert back.cell_keys() == truth.cell_keys()
    assert [c.text for c in back.cells] == [c.text for c in truth.cells]


def test_page_to_cells_examples():
    t = t2x2()
    t.region_bbox = Rect(50, 100, 300, 200)
    above = Paragraph(Rect(50, 40, 300, 60), "intro")
    inside = Paragraph(Rect(60, 120, 200, 130), "dup")
    cells, warnings = page_to_cells([t], [above])
    assert [c.kind for c in cells] == [CellKind.TEXT, CellKind.TABLE] and not warnings
    assert page_to_cells([], []) == ([], [])
    cells, warnings = page_to_cells([t], [inside])
    assert [c.kind for c in cells] == [CellKind.TABLE] and len(warnings) == 1


def test_json_examples():
    assert document_to_json(DocumentOutput()) == b'{"version":1,"pages":[]}'
    t = t2x2()
    cells = [PdfCell(CellKind.TEXT, Rect(0, 0, 5, 5), Paragraph(Rect(0, 0, 5, 5), "p", 2)),
             PdfCell(CellKind.TABLE, t.region_bbox, t),
             PdfCell(CellKind.IMAGE, Rect(1, 20, 3, 30), ImageRef("page0/img1")),
             PdfCell(CellKind.WIRELESS, Rect(0, 40, 9, 50), None)]
    doc = DocumentOutput([PageOutput(0, cells, ["w"])])
    data = document_to_json(doc)
    assert document_from_json(data) == doc
    assert document_to_json(document_from_json(data)) == data
    cell = json.loads(data)["pages"][0]["cells"][1]["table"]["cells"][0]
    assert set(cell) == {"row", "col", "rowspan", "colspan", "bbox", "text"}
