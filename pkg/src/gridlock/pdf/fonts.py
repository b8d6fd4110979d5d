"""Font metrics and code-to-Unicode mapping for text extraction."""

from __future__ import annotations

from dataclasses import dataclass, field

from .objects import ARRAY_CLOSE, ARRAY_OPEN, EOF, Keyword, Lexer, PdfError, Stream

REPLACEMENT = "�"

# Helvetica advance widths for codes 32..126 (1/1000 em)
_HELVETICA = [
    278, 278, 355, 556, 556, 889, 667, 222, 333, 333, 389, 584, 278, 333, 278, 278,
    556, 556, 556, 556, 556, 556, 556, 556, 556, 556, 278, 278, 584, 584, 584, 556,
    1015, 667, 667, 722, 722, 667, 611, 778, 722, 278, 500, 667, 556, 833, 722, 778,
    667, 778, 722, 667, 611, 722, 667, 944, 667, 667, 611, 278, 278, 278, 469, 556,
    222, 556, 556, 500, 556, 556, 278, 556, 556, 222, 222, 500, 222, 833, 556, 556,
    556, 556, 333, 500, 278, 556, 500, 722, 500, 500, 500, 334, 260, 334, 584,
]

_GLYPHS = {
    "space": " ", "exclam": "!", "quotedbl": '"', "numbersign": "#", "dollar": "$",
    "percent": "%", "ampersand": "&", "quotesingle": "'", "quoteright": "’",
    "quoteleft": "‘", "parenleft": "(", "parenright": ")", "asterisk": "*",
    "plus": "+", "comma": ",", "hyphen": "-", "minus": "−", "period": ".",
    "slash": "/", "colon": ":", "semicolon": ";", "less": "<", "equal": "=",
    "greater": ">", "question": "?", "at": "@", "bracketleft": "[", "backslash": "\\",
    "bracketright": "]", "asciicircum": "^", "underscore": "_", "grave": "`",
    "braceleft": "{", "bar": "|", "braceright": "}", "asciitilde": "~",
    "endash": "–", "emdash": "—", "bullet": "•", "fi": "fi", "fl": "fl",
    "quotedblleft": "“", "quotedblright": "”", "ellipsis": "…",
    "zero": "0", "one": "1", "two": "2", "three": "3", "four": "4",
    "five": "5", "six": "6", "seven": "7", "eight": "8", "nine": "9",
}


def glyph_to_unicode(name: str) -> str:
    if len(name) == 1 and name.isascii() and name.isalpha():
        return name
    if name in _GLYPHS:
        return _GLYPHS[name]
    if name.startswith("uni") and len(name) == 7:
        try:
            return chr(int(name[3:], 16))
        except ValueError:
            pass
    if name.startswith("u") and 5 <= len(name) <= 7:
        try:
            return chr(int(name[1:], 16))
        except ValueError:
            pass
    return REPLACEMENT


def _standard(code: int) -> str:
    if code == 39:
        return "’"
    if code == 96:
        return "‘"
    if 32 <= code <= 126:
        return chr(code)
    return REPLACEMENT


def _codec(codec: str):
    def f(code: int) -> str:
        if code < 32:
            return REPLACEMENT
        try:
            return bytes([code]).decode(codec)
        except UnicodeDecodeError:
            return REPLACEMENT
    return f


_BASE_ENCODINGS = {
    "WinAnsiEncoding": _codec("cp1252"),
    "MacRomanEncoding": _codec("mac_roman"),
    "StandardEncoding": _standard,
}


# -- ToUnicode -----------------------------------------------------------------


def _utf16(b: bytes) -> str:
    try:
        return b.decode("utf-16-be")
    except UnicodeDecodeError:
        return REPLACEMENT


def parse_cmap(data: bytes) -> tuple[dict[int, str], int]:
    """Parse a ToUnicode CMap. Returns (code -> text, code byte width)."""
    lex = Lexer(data)
    out: dict[int, str] = {}
    width = 1
    while True:
        try:
            tok = lex.token()
        except PdfError:
            continue
        if tok is EOF:
            break
        if tok == "begincodespacerange" and isinstance(tok, Keyword):
            t = lex.token()
            if isinstance(t, bytes):
                width = max(1, len(t))
        elif tok == "beginbfchar" and isinstance(tok, Keyword):
            while True:
                src = lex.token()
                if not isinstance(src, bytes):
                    break
                dst = lex.token()
                if isinstance(dst, bytes):
                    out[int.from_bytes(src, "big")] = _utf16(dst)
                elif isinstance(dst, str):
                    out[int.from_bytes(src, "big")] = glyph_to_unicode(dst)
        elif tok == "beginbfrange" and isinstance(tok, Keyword):
            while True:
                lo = lex.token()
                if not isinstance(lo, bytes):
                    break
                hi = lex.token()
                dst = lex.token()
                a, z = int.from_bytes(lo, "big"), int.from_bytes(hi, "big")
                if z - a > 0xFFFF:
                    continue
                if dst is ARRAY_OPEN:
                    k = a
                    while True:
                        item = lex.token()
                        if item is ARRAY_CLOSE or item is EOF:
                            break
                        if isinstance(item, bytes) and k <= z:
                            out[k] = _utf16(item)
                        k += 1
                elif isinstance(dst, bytes) and dst:
                    base = int.from_bytes(dst, "big")
                    n = len(dst)
                    for k in range(a, z + 1):
                        out[k] = _utf16((base + k - a).to_bytes(n, "big", signed=False)
                                        if base + k - a < 256 ** n else dst)
    return out, width


# -- fonts ---------------------------------------------------------------------


@dataclass
class Font:
    """Decodes shown strings into (text, advance in text-space units) pairs."""

    code_bytes: int = 1
    widths: dict[int, float] = field(default_factory=dict)
    default_width: float = 0.5
    to_unicode: dict[int, str] = field(default_factory=dict)
    encoding: dict[int, str] | None = None
    base: object = None
    fixed_width: float | None = None

    def glyphs(self, data: bytes):
        n = self.code_bytes
        for i in range(0, len(data) - n + 1, n):
            code = int.from_bytes(data[i:i + n], "big")
            yield code, self.text_for(code), self.width_for(code)

    def text_for(self, code: int) -> str:
        if code in self.to_unicode:
            return self.to_unicode[code]
        if self.encoding is not None and code in self.encoding:
            return self.encoding[code]
        if self.code_bytes == 1 and self.base is not None:
            return self.base(code)
        return REPLACEMENT

    def width_for(self, code: int) -> float:
        if code in self.widths:
            return self.widths[code]
        if self.fixed_width is not None:
            return self.fixed_width
        if self.code_bytes == 1 and 32 <= code <= 126 and self.base is not None:
            return _HELVETICA[code - 32] / 1000.0
        return self.default_width


def fallback_font() -> Font:
    """Used when a font resource is missing: replacement characters, Helvetica widths."""
    return Font(base=lambda code: REPLACEMENT)


def load_font(doc, fdict) -> Font:
    fdict = doc.resolve(fdict)
    if not isinstance(fdict, dict):
        return fallback_font()
    subtype = doc.get(fdict, "Subtype")
    tu = doc.get(fdict, "ToUnicode")
    cmap: dict[int, str] = {}
    if isinstance(tu, Stream):
        try:
            cmap, _ = parse_cmap(doc.decode_stream(tu))
        except PdfError:
            cmap = {}
    if subtype == "Type0":
        return _load_type0(doc, fdict, cmap)

    font = Font(to_unicode=cmap)
    scale = 1 / 1000.0
    if subtype == "Type3":
        fm = doc.get(fdict, "FontMatrix", [0.001])
        scale = float(fm[0]) if fm else 0.001
        font.base = None
    basefont = str(doc.get(fdict, "BaseFont", "") or "")
    if "Courier" in basefont:
        font.fixed_width = 0.6
    widths = doc.get(fdict, "Widths")
    if isinstance(widths, list):
        first = int(doc.get(fdict, "FirstChar", 0) or 0)
        for k, w in enumerate(widths):
            w = doc.resolve(w)
            if isinstance(w, (int, float)):
                font.widths[first + k] = float(w) * scale

    enc = doc.get(fdict, "Encoding")
    base_name = "StandardEncoding"
    diffs = None
    if isinstance(enc, str):
        base_name = enc
    elif isinstance(enc, dict):
        base_name = doc.get(enc, "BaseEncoding", "StandardEncoding")
        diffs = doc.get(enc, "Differences")
    if subtype != "Type3":
        font.base = _BASE_ENCODINGS.get(str(base_name), _standard)
    if isinstance(diffs, list):
        font.encoding = {}
        code = 0
        for item in diffs:
            item = doc.resolve(item)
            if isinstance(item, int):
                code = item
            elif isinstance(item, str):
                font.encoding[code] = glyph_to_unicode(item)
                code += 1
    return font


def _load_type0(doc, fdict, cmap) -> Font:
    font = Font(code_bytes=2, to_unicode=cmap, default_width=1.0)
    desc = doc.get(fdict, "DescendantFonts")
    cid = doc.resolve(desc[0]) if isinstance(desc, list) and desc else None
    if isinstance(cid, dict):
        font.default_width = float(doc.get(cid, "DW", 1000)) / 1000.0
        w = doc.get(cid, "W")
        if isinstance(w, list):
            items = [doc.resolve(v) for v in w]
            i = 0
            while i < len(items):
                first = items[i]
                if i + 1 < len(items) and isinstance(items[i + 1], list):
                    for k, v in enumerate(items[i + 1]):
                        v = doc.resolve(v)
                        if isinstance(v, (int, float)):
                            font.widths[int(first) + k] = float(v) / 1000.0
                    i += 2
                elif i + 2 < len(items):
                    a, z, v = items[i], items[i + 1], items[i + 2]
                    if isinstance(z, int) and z - a <= 0xFFFF:
                        for k in range(int(a), int(z) + 1):
                            font.widths[k] = float(v) / 1000.0
                    i += 3
                else:
                    break
    return font
