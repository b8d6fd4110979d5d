import sys
import zlib
from pathlib import Path

import numpy as np
import pytest
from pdf_fixtures import (EMPTY_STREAM, ENCRYPTED, POSITIONED_TEXT, RECT_RULES, TRUNCATED, build_pdf,
                          one_page, page_to_pdf, stream)

from gridlock.geometry import Orientation
from gridlock.page_model import RasterPage, validate
from gridlock.pdf import (EncryptedPdfError, ExternalToolError, MalformedXrefError, PdfSyntaxError, RasterizerConfig,
                          UnsupportedFilterError, extract_page, extract_page_detail, load_raster,
                          open_pdf, rasterize_page, save_raster)
from gridlock.raster_lines import ConfigError
from gridlock.synth import SynthParams, gen_table

TOOLS = Path(__file__).parent / "tools"
PDFIUM = f"{sys.executable} {TOOLS / 'pdfium_rasterizer.py'} {{input}} {{page}} {{dpi}} {{output}}"


def fake(mode):
    # {input}, {page}, {dpi} are accepted but unused by the fake
    return f"{sys.executable} {TOOLS / 'fake_rasterizer.py'} {mode} {{output}} {{input}} {{page}} {{dpi}}"


def test_open_pdf_examples():
    assert open_pdf(RECT_RULES).page_count == 1
    assert open_pdf(RECT_RULES).media_box(0).as_list() == [0, 0, 200, 200]
    with pytest.raises(MalformedXrefError):
        open_pdf(TRUNCATED)
    with pytest.raises(EncryptedPdfError):
        open_pdf(ENCRYPTED)
    with pytest.raises(PdfSyntaxError):
        open_pdf(b"hello world")


def test_rect_stroke_becomes_four_rules():
    page = extract_page(open_pdf(RECT_RULES), 0)
    hs = sorted((s.position, s.lo, s.hi) for s in page.segments if s.orientation is Orientation.H)
    vs = sorted((s.position, s.lo, s.hi) for s in page.segments if s.orientation is Orientation.V)
    # PDF y 0..50 on a 200 high page -> top-left y 150..200
    assert hs == [(150, 0, 100), (200, 0, 100)]
    assert vs == [(0, 150, 200), (100, 150, 200)]
    assert page.rects == [] and page.text_spans == []
    assert validate(page) == []


def test_positioned_text():
    page = extract_page(open_pdf(POSITIONED_TEXT), 0)
    (span,) = page.text_spans
    assert span.text == "Hi"
    assert span.bbox.x0 == pytest.approx(10)
    assert span.bbox.height == pytest.approx(12, rel=0.2)
    # Helvetica H=722, i=222 units at 12 pt
    assert span.char_advances == pytest.approx((8.664, 2.664))
    assert span.bbox.y1 == pytest.approx(200 - 20 + 0.2 * 12)


def test_empty_stream():
    page = extract_page(open_pdf(EMPTY_STREAM), 0)
    assert (page.segments, page.rects, page.text_spans) == ([], [], [])
    assert (page.width, page.height) == (200, 200)


def test_filters():
    flate = one_page(b"0 0 100 50 re S", flate=True)
    assert len(extract_page(open_pdf(flate), 0).segments) == 4
    hexed = b"0 0 100 50 re S".hex().encode() + b">"
    doc = open_pdf(build_pdf([
        b"<< /Type /Catalog /Pages 2 0 R >>",
        b"<< /Type /Pages /Kids [3 0 R] /Count 1 /MediaBox [0 0 200 200] >>",
        b"<< /Type /Page /Parent 2 0 R /Contents 4 0 R >>",
        stream(hexed, extra=b" /Filter /ASCIIHexDecode"),
    ]))
    assert len(extract_page(doc, 0).segments) == 4
    lzw = build_pdf([
        b"<< /Type /Catalog /Pages 2 0 R >>",
        b"<< /Type /Pages /Kids [3 0 R] /Count 1 /MediaBox [0 0 200 200] >>",
        b"<< /Type /Page /Parent 2 0 R /Contents 4 0 R >>",
        stream(b"\x80\x0b", extra=b" /Filter /LZWDecode"),
    ])
    with pytest.raises(UnsupportedFilterError):
        extract_page(open_pdf(lzw), 0)


def test_thin_filled_bar_is_a_rule_and_thick_box_is_a_rect():
    page = extract_page(open_pdf(one_page(b"10 100 150 1 re f 10 10 50 40 re f")), 0)
    assert [(s.orientation, s.position, s.lo, s.hi) for s in page.segments] == [
        (Orientation.H, 99.5, 10, 160)]
    assert [r.as_list() for r in page.rects] == [[10, 150, 60, 190]]


def test_ctm_and_clipping_and_curves():
    # scale by 2 then draw a rect partly outside the page; a curve adds nothing
    page = extract_page(open_pdf(one_page(b"2 0 0 2 0 0 cm 50 50 100 20 re S 0 0 m 10 10 20 20 30 0 c S")), 0)
    hs = sorted((s.position, s.lo, s.hi) for s in page.segments if s.is_horizontal)
    assert hs == [(60, 100, 200), (100, 100, 200)]
    assert [(s.position, s.lo, s.hi) for s in page.segments if not s.is_horizontal] == [(100, 60, 100)]
    assert validate(page) == []


def test_missing_font_degrades_and_inline_image_skipped():
    content = b"BT /F9 10 Tf 5 5 Td (ab) Tj ET BI /W 1 /H 1 /BPC 8 /CS /G ID \x00 EI"
    det = extract_page_detail(open_pdf(one_page(content)), 0)
    assert det.inline_images_skipped == 1
    assert len(det.page.text_spans) == 1 and len(det.page.text_spans[0].text) == 2


def test_tounicode_cmap():
    cmap = (b"begincmap 1 begincodespacerange <00> <FF> endcodespacerange "
            b"1 beginbfchar <41> <0416> endbfchar 1 beginbfrange <61> <62> <0430> endbfrange endcmap")
    pdf = build_pdf([
        b"<< /Type /Catalog /Pages 2 0 R >>",
        b"<< /Type /Pages /Kids [3 0 R] /Count 1 /MediaBox [0 0 200 200] >>",
        b"<< /Type /Page /Parent 2 0 R /Contents 4 0 R /Resources << /Font << /F1 5 0 R >> >> >>",
        stream(b"BT /F1 10 Tf 5 5 Td (Aab) Tj ET"),
        b"<< /Type /Font /Subtype /Type1 /BaseFont /Custom /ToUnicode 6 0 R >>",
        stream(cmap),
    ])
    assert extract_page(open_pdf(pdf), 0).text_spans[0].text == "Жаб"


def test_extraction_is_deterministic_and_valid_on_synth_pdfs():
    for seed in range(10):
        _, page, _ = gen_table(SynthParams(seed=seed))
        doc = open_pdf(page_to_pdf(page))
        a, b = extract_page(doc, 0), extract_page(doc, 0)
        assert a == b and validate(a) == []


def test_rasterizer_config_errors():
    with pytest.raises(ConfigError):
        RasterizerConfig("gs {input} {page} {dpi}")
    with pytest.raises(ConfigError):
        RasterizerConfig("gs {input} {page} {dpi} {output} {bogus}")
    with pytest.raises(ConfigError):
        RasterizerConfig(PDFIUM, dpi=0)


def test_rasterizer_failures_carry_diagnostics(tmp_path):
    pdf = tmp_path / "a.pdf"
    pdf.write_bytes(RECT_RULES)
    with pytest.raises(ExternalToolError) as err:
        rasterize_page(pdf, 0, RasterizerConfig(fake("fail")))
    assert "cannot open page" in err.value.stderr and err.value.returncode == 1
    with pytest.raises(ExternalToolError, match="no output"):
        rasterize_page(pdf, 0, RasterizerConfig(fake("silent")))
    with pytest.raises(ExternalToolError, match="cannot read image"):
        rasterize_page(pdf, 0, RasterizerConfig(fake("garbage")))
    with pytest.raises(ExternalToolError, match="not found"):
        rasterize_page(pdf, 0, RasterizerConfig("no-such-tool-xyz {input} {page} {dpi} {output}"))


def test_rasterize_scale_identity_at_72_dpi(tmp_path):
    pytest.importorskip("pypdfium2")
    pdf = tmp_path / "a.pdf"
    pdf.write_bytes(one_page(b"", size=(300, 200)))
    r = rasterize_page(pdf, 0, RasterizerConfig(PDFIUM, dpi=72))
    assert (r.width_px, r.height_px, r.dpi) == (300, 200, 72)


def test_vector_segments_are_dark_in_the_raster(tmp_path):
    pytest.importorskip("pypdfium2")
    for seed in range(3):
        _, page, _ = gen_table(SynthParams(seed=seed, max_rows=6, max_cols=5))
        pdf = tmp_path / f"s{seed}.pdf"
        pdf.write_bytes(page_to_pdf(page))
        vec = extract_page(open_pdf(pdf.read_bytes()), 0)
        ras = rasterize_page(pdf, 0, RasterizerConfig(PDFIUM, dpi=300))
        px = ras.pixels
        k = 300 / 72
        for s in vec.segments:
            p = int(round(s.position * k))
            lo, hi = int(np.ceil(s.lo * k)), int(np.floor(s.hi * k))
            band = px[p - 1:p + 2, lo:hi] if s.is_horizontal else px[lo:hi, p - 1:p + 2].T
            dark = (band < 128).any(axis=0)
            assert dark.mean() >= 0.9, (seed, s)


def test_raster_save_load_round_trip(tmp_path):
    img = RasterPage(np.arange(200, dtype=np.uint8).reshape(10, 20), 96)
    for name in ("x.png", "x.pgm"):
        save_raster(img, tmp_path / name)
        back = load_raster(tmp_path / name, 96 if name.endswith("pgm") else None)
        assert np.array_equal(back.pixels, img.pixels) and back.dpi == 96
    assert load_raster(tmp_path / "x.pgm").dpi == 150


def test_xref_stream_and_object_stream():
    # objects 3 and 4 live in an object stream; xref is a stream
    objs_in_stm = [b"<< /Type /Page /Parent 2 0 R /Contents 5 0 R >>", b"<< /Unused true >>"]
    header, body = b"", b""
    for num, o in zip((3, 4), objs_in_stm):
        header += b"%d %d " % (num, len(body))
        body += o + b" "
    stm_data = header + body
    out = bytearray(b"%PDF-1.5\n")
    offsets = {}

    def add(num, data):
        offsets[num] = len(out)
        out.extend(b"%d 0 obj\n" % num + data + b"\nendobj\n")

    add(1, b"<< /Type /Catalog /Pages 2 0 R >>")
    add(2, b"<< /Type /Pages /Kids [3 0 R] /Count 1 /MediaBox [0 0 200 200] >>")
    add(5, stream(b"0 0 100 50 re S"))
    comp = zlib.compress(stm_data)
    add(6, b"<< /Type /ObjStm /N 2 /First %d /Length %d /Filter /FlateDecode >>\nstream\n"
        % (len(header), len(comp)) + comp + b"\nendstream")
    xref_off = len(out)
    rows = bytearray()
    entries = {0: (0, 0, 255), 1: (1, offsets[1], 0), 2: (1, offsets[2], 0), 3: (2, 6, 0),
               4: (2, 6, 1), 5: (1, offsets[5], 0), 6: (1, offsets[6], 0), 7: (1, xref_off, 0)}
    for i in range(8):
        t, f2, f3 = entries[i]
        rows += bytes([t]) + f2.to_bytes(4, "big") + bytes([f3])
    out.extend(b"7 0 obj\n<< /Type /XRef /Size 8 /W [1 4 1] /Root 1 0 R /Length %d >>\nstream\n"
               % len(rows) + bytes(rows) + b"\nendstream\nendobj\n")
    out.extend(b"startxref\n%d\n%%%%EOF\n" % xref_off)
    doc = open_pdf(bytes(out))
    assert doc.page_count == 1
    assert len(extract_page(doc, 0).segments) == 4
