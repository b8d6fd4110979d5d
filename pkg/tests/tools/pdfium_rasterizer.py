"""Test rasterizer backed by pdfium: ARGS input page(1-based) dpi output."""

import sys

import pypdfium2


def main(argv):
    src, page, dpi, out = argv[1], int(argv[2]), float(argv[3]), argv[4]
    doc = pypdfium2.PdfDocument(src)
    img = doc[page - 1].render(scale=dpi / 72.0, grayscale=True).to_pil()
    img.save(out, format="PNG", dpi=(dpi, dpi))


if __name__ == "__main__":
    main(sys.argv)
