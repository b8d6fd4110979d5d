"""Hand-written PDF fixtures with exact xref offsets."""

import zlib


def build_pdf(objects: list[bytes], root: int = 1, trailer_extra: bytes = b"") -> bytes:
    """Assemble numbered objects (1-based, in order) into a PDF with an xref table."""
    out = bytearray(b"%PDF-1.4\n%\xe2\xe3\xcf\xd3\n")
    offsets = []
    for i, body in enumerate(objects, start=1):
        offsets.append(len(out))
        out += b"%d 0 obj\n" % i + body + b"\nendobj\n"
    xref = len(out)
    out += b"xref\n0 %d\n" % (len(objects) + 1)
    out += b"0000000000 65535 f \n"
    for off in offsets:
        out += b"%010d 00000 n \n" % off
    out += b"trailer\n<< /Size %d /Root %d 0 R " % (len(objects) + 1, root) + trailer_extra + b">>\n"
    out += b"startxref\n%d\n%%%%EOF\n" % xref
    return bytes(out)


def stream(content: bytes, flate: bool = False, extra: bytes = b"") -> bytes:
    if flate:
        content = zlib.compress(content)
        extra += b" /Filter /FlateDecode"
    return b"<< /Length %d%s >>\nstream\n" % (len(content), extra) + content + b"\nendstream"


def one_page(content: bytes, size=(200, 200), flate=False, trailer_extra=b"") -> bytes:
    return build_pdf([
        b"<< /Type /Catalog /Pages 2 0 R >>",
        b"<< /Type /Pages /Kids [3 0 R] /Count 1 /MediaBox [0 0 %d %d] >>" % size,
        b"<< /Type /Page /Parent 2 0 R /Contents 4 0 R "
        b"/Resources << /Font << /F1 5 0 R >> >> >>",
        stream(content, flate),
        b"<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica >>",
    ], trailer_extra=trailer_extra)


RECT_RULES = one_page(b"0 0 100 50 re S")
POSITIONED_TEXT = one_page(b"BT /F1 12 Tf 10 20 Td (Hi) Tj ET")
EMPTY_STREAM = one_page(b"")
ENCRYPTED = one_page(b"", trailer_extra=b"/Encrypt << /Filter /Standard /V 1 /R 2 >> ")
TRUNCATED = RECT_RULES[: len(RECT_RULES) // 2]


def _pdf_str(text: str) -> bytes:
    return b"(" + text.encode("latin-1").replace(b"\\", b"\\\\").replace(b"(", b"\\(").replace(b")", b"\\)") + b")"


def page_to_pdf(page, bar_vertical: bool = True) -> bytes:
    """Draw a PageGraphics as a one-page PDF.

    H rules are stroked 1 pt lines; V rules are thin filled bars when
    ``bar_vertical`` (the common way real PDFs draw rules). Text uses
    8 pt Courier, whose 4.8 pt advance matches the synthetic spans.
    """
    h = page.height
    ops = [b"1 w"]
    for s in page.segments:
        if s.is_horizontal:
            y = h - s.position
            ops.append(b"%.3f %.3f m %.3f %.3f l S" % (s.lo, y, s.hi, y))
        elif bar_vertical:
            ops.append(b"%.3f %.3f 1 %.3f re f" % (s.position - 0.5, h - s.hi, s.hi - s.lo))
        else:
            ops.append(b"%.3f %.3f m %.3f %.3f l S" % (s.position, h - s.lo, s.position, h - s.hi))
    for sp in page.text_spans:
        size = sp.bbox.height
        base = h - (sp.bbox.y0 + 0.8 * size)
        ops.append(b"BT /F1 %.3f Tf %.3f %.3f Td %s Tj ET" % (size, sp.bbox.x0, base, _pdf_str(sp.text)))
    content = b"\n".join(ops)
    return build_pdf([
        b"<< /Type /Catalog /Pages 2 0 R >>",
        b"<< /Type /Pages /Kids [3 0 R] /Count 1 >>",
        b"<< /Type /Page /Parent 2 0 R /MediaBox [0 0 %.3f %.3f] /Contents 4 0 R "
        b"/Resources << /Font << /F1 5 0 R >> >> >>" % (page.width, page.height),
        stream(content, flate=True),
        b"<< /Type /Font /Subtype /Type1 /BaseFont /Courier /Encoding /WinAnsiEncoding >>",
    ])


def multi_page(contents: list[bytes], size=(612, 792)) -> bytes:
    n = len(contents)
    kids = b" ".join(b"%d 0 R" % (3 + 2 * i) for i in range(n))
    objs = [b"<< /Type /Catalog /Pages 2 0 R >>",
            b"<< /Type /Pages /Kids [%s] /Count %d /MediaBox [0 0 %d %d] "
            b"/Resources << /Font << /F1 %d 0 R >> >> >>" % (kids, n, size[0], size[1], 3 + 2 * n)]
    for i, c in enumerate(contents):
        objs.append(b"<< /Type /Page /Parent 2 0 R /Contents %d 0 R >>" % (4 + 2 * i))
        objs.append(stream(c))
    objs.append(b"<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica >>")
    return build_pdf(objs)


def image_page_pdf(pixels, size=(612, 792)) -> bytes:
    """One page whose only content is a full-page grayscale image (a 'scan')."""
    h, w = pixels.shape
    data = zlib.compress(pixels.tobytes())
    return build_pdf([
        b"<< /Type /Catalog /Pages 2 0 R >>",
        b"<< /Type /Pages /Kids [3 0 R] /Count 1 /MediaBox [0 0 %d %d] >>" % size,
        b"<< /Type /Page /Parent 2 0 R /Contents 4 0 R /Resources << /XObject << /Im1 5 0 R >> >> >>",
        stream(b"q %d 0 0 %d 0 0 cm /Im1 Do Q" % size),
        b"<< /Type /XObject /Subtype /Image /Width %d /Height %d /ColorSpace /DeviceGray "
        b"/BitsPerComponent 8 /Length %d /Filter /FlateDecode >>\nstream\n" % (w, h, len(data))
        + data + b"\nendstream",
    ])
