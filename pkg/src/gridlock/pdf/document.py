"""Cross-reference parsing, object resolution, stream decoding and the page tree."""

from __future__ import annotations

import re
import zlib
from dataclasses import dataclass

from ..geometry import Rect
from .objects import (EncryptedPdfError, Keyword, Lexer, MalformedXrefError, Name, Parser,
                      PdfError, PdfSyntaxError, Ref, Stream, UnsupportedFilterError)

_STARTXREF = re.compile(rb"startxref\s+(\d+)")
_MAX_DEPTH = 64


# -- filters ------------------------------------------------------------------


def _png_unpredict(data: bytes, columns: int, colors: int, bpc: int) -> bytes:
    bpp = max(1, colors * bpc // 8)
    row_len = (columns * colors * bpc + 7) // 8
    out = bytearray()
    prev = bytearray(row_len)
    i = 0
    while i + 1 + row_len <= len(data) + 0 and i < len(data):
        ft = data[i]
        row = bytearray(data[i + 1:i + 1 + row_len])
        if len(row) < row_len:
            row.extend(b"\x00" * (row_len - len(row)))
        for x in range(row_len):
            left = row[x - bpp] if x >= bpp else 0
            up = prev[x]
            ul = prev[x - bpp] if x >= bpp else 0
            if ft == 1:
                row[x] = (row[x] + left) & 0xFF
            elif ft == 2:
                row[x] = (row[x] + up) & 0xFF
            elif ft == 3:
                row[x] = (row[x] + ((left + up) >> 1)) & 0xFF
            elif ft == 4:
                p = left + up - ul
                pa, pb, pc = abs(p - left), abs(p - up), abs(p - ul)
                pred = left if pa <= pb and pa <= pc else (up if pb <= pc else ul)
                row[x] = (row[x] + pred) & 0xFF
        out += row
        prev = row
        i += 1 + row_len
    return bytes(out)


def _flate(data: bytes) -> bytes:
    try:
        return zlib.decompress(data)
    except zlib.error:
        # truncated or trailing-garbage streams: keep what decodes
        d = zlib.decompressobj()
        try:
            return d.decompress(data)
        except zlib.error as exc:
            raise PdfSyntaxError(f"corrupt Flate stream: {exc}") from None


def _ascii_hex(data: bytes) -> bytes:
    end = data.find(b">")
    if end >= 0:
        data = data[:end]
    digits = bytes(c for c in data if c not in b"\x00\t\n\x0c\r ")
    if len(digits) % 2:
        digits += b"0"
    try:
        return bytes.fromhex(digits.decode("ascii"))
    except ValueError:
        raise PdfSyntaxError("bad ASCIIHex data") from None


def _as_list(v):
    if v is None:
        return []
    return v if isinstance(v, list) else [v]


# -- document -----------------------------------------------------------------


@dataclass
class PageInfo:
    obj: dict
    media_box: Rect
    resources: dict


class PdfDocument:
    """A parsed PDF: resolved trailer, object access and the flattened page list."""

    def __init__(self, data: bytes):
        self.data = data
        self.xref: dict[int, tuple] = {}
        self.trailer: dict = {}
        self._cache: dict[int, object] = {}
        self._objstm_cache: dict[int, list] = {}
        self._read_xref()
        if self.trailer.get("Encrypt") is not None:
            raise EncryptedPdfError("encrypted PDFs are not supported")
        self.pages = self._collect_pages()
        if not self.pages:
            raise MalformedXrefError("document has no pages")

    @property
    def page_count(self) -> int:
        return len(self.pages)

    def media_box(self, i: int) -> Rect:
        return self.pages[i].media_box

    # xref --------------------------------------------------------------------

    def _read_xref(self):
        tail = self.data[-2048:]
        m = None
        for m in _STARTXREF.finditer(tail):
            pass
        if m is None:
            raise MalformedXrefError("no startxref marker (truncated file?)")
        offset = int(m.group(1))
        seen = set()
        first = True
        while offset is not None:
            if offset in seen:
                break
            seen.add(offset)
            if not 0 <= offset < len(self.data):
                raise MalformedXrefError(f"xref offset {offset} outside file")
            try:
                trailer = self._read_xref_section(offset)
            except PdfSyntaxError as exc:
                raise MalformedXrefError(f"unreadable xref at {offset}: {exc}") from None
            if first:
                self.trailer = trailer
                first = False
            stm = trailer.get("XRefStm")
            if isinstance(stm, int):
                try:
                    self._read_xref_section(stm)
                except PdfSyntaxError as exc:
                    raise MalformedXrefError(f"unreadable xref stream at {stm}: {exc}") from None
            prev = trailer.get("Prev")
            offset = prev if isinstance(prev, int) else None
        if "Root" not in self.trailer:
            raise MalformedXrefError("trailer has no /Root")

    def _read_xref_section(self, offset: int) -> dict:
        lex = Lexer(self.data, offset)
        lex.skip_ws()
        if self.data.startswith(b"xref", lex.pos):
            lex.pos += 4
            return self._read_xref_table(lex)
        return self._read_xref_stream(offset)

    def _read_xref_table(self, lex: Lexer) -> dict:
        while True:
            tok = lex.token()
            if tok == "trailer" and isinstance(tok, Keyword):
                trailer = Parser(lex).parse()
                if not isinstance(trailer, dict):
                    raise MalformedXrefError("trailer is not a dictionary")
                return trailer
            if not isinstance(tok, int):
                raise MalformedXrefError(f"unexpected token {tok!r} in xref table")
            start, count = tok, lex.token()
            if not isinstance(count, int):
                raise MalformedXrefError("bad xref subsection header")
            for k in range(count):
                off, gen, kind = lex.token(), lex.token(), lex.token()
                if not isinstance(off, int) or not isinstance(gen, int) or kind not in ("n", "f"):
                    raise MalformedXrefError(f"bad xref entry for object {start + k}")
                num = start + k
                if num not in self.xref and kind == "n":
                    self.xref[num] = ("off", off, gen)
                elif num not in self.xref:
                    self.xref[num] = ("free",)

    def _read_xref_stream(self, offset: int) -> dict:
        num, obj = self._parse_indirect_at(offset)
        if not isinstance(obj, Stream) or obj.dict.get("Type") != "XRef":
            raise MalformedXrefError(f"no xref table or stream at offset {offset}")
        d = obj.dict
        widths = d.get("W")
        if not isinstance(widths, list) or len(widths) != 3:
            raise MalformedXrefError("xref stream has no valid /W")
        size = d.get("Size", 0)
        index = d.get("Index") or [0, size]
        data = self.decode_stream(obj)
        w0, w1, w2 = (int(w) for w in widths)
        rec = w0 + w1 + w2
        pos = 0

        def field(raw, default):
            return int.from_bytes(raw, "big") if raw else default

        for i in range(0, len(index) - 1, 2):
            start, count = int(index[i]), int(index[i + 1])
            for k in range(count):
                if pos + rec > len(data):
                    raise MalformedXrefError("xref stream shorter than its index")
                t = field(data[pos:pos + w0], 1)
                f1 = field(data[pos + w0:pos + w0 + w1], 0)
                f2 = field(data[pos + w0 + w1:pos + rec], 0)
                pos += rec
                n = start + k
                if n in self.xref:
                    continue
                if t == 1:
                    self.xref[n] = ("off", f1, f2)
                elif t == 2:
                    self.xref[n] = ("stm", f1, f2)
                else:
                    self.xref[n] = ("free",)
        return d

    # objects -----------------------------------------------------------------

    def _parse_indirect_at(self, offset: int):
        lex = Lexer(self.data, offset)
        p = Parser(lex)
        num, gen, kw = p._next(), p._next(), p._next()
        if not isinstance(num, int) or not isinstance(gen, int) or kw != "obj":
            raise PdfSyntaxError(f"no object header at offset {offset}")
        obj = p.parse_value()
        if isinstance(obj, dict):
            nxt = p._next()
            if nxt == "stream" and isinstance(nxt, Keyword):
                obj = Stream(obj, self._stream_body(lex, obj))
        return num, obj

    def _stream_body(self, lex: Lexer, d: dict) -> bytes:
        data = self.data
        pos = lex.pos
        if data[pos:pos + 2] == b"\r\n":
            pos += 2
        elif data[pos:pos + 1] in (b"\n", b"\r"):
            pos += 1
        length = d.get("Length")
        if isinstance(length, Ref):
            try:
                length = self.resolve(length)
            except PdfError:
                length = None
        if isinstance(length, int) and length >= 0:
            end = pos + length
            tail = data[end:end + 32].lstrip(b"\r\n \t\x00")
            if tail.startswith(b"endstream"):
                return data[pos:end]
        end = data.find(b"endstream", pos)
        if end < 0:
            raise PdfSyntaxError("unterminated stream")
        body = data[pos:end]
        if body.endswith(b"\r\n"):
            body = body[:-2]
        elif body.endswith((b"\n", b"\r")):
            body = body[:-1]
        return body

    def _object_from_stream(self, stm_num: int, idx: int):
        entries = self._objstm_cache.get(stm_num)
        if entries is None:
            stm = self.resolve(Ref(stm_num, 0))
            if not isinstance(stm, Stream):
                raise PdfSyntaxError(f"object stream {stm_num} is not a stream")
            n = int(stm.dict.get("N", 0))
            first = int(stm.dict.get("First", 0))
            body = self.decode_stream(stm)
            head = Lexer(body, 0)
            pairs = [(head.token(), head.token()) for _ in range(n)]
            entries = []
            for objnum, off in pairs:
                p = Parser(Lexer(body, first + int(off)))
                entries.append((objnum, p.parse_value()))
            self._objstm_cache[stm_num] = entries
        if idx >= len(entries):
            raise PdfSyntaxError(f"index {idx} outside object stream {stm_num}")
        return entries[idx][1]

    def resolve(self, v, depth: int = 0):
        """Follow indirect references until a direct object is reached."""
        while isinstance(v, Ref):
            if depth > _MAX_DEPTH:
                raise PdfSyntaxError("reference chain too deep")
            depth += 1
            if v.num in self._cache:
                v = self._cache[v.num]
                continue
            entry = self.xref.get(v.num)
            if entry is None or entry[0] == "free":
                obj = None
            elif entry[0] == "off":
                _, obj = self._parse_indirect_at(entry[1])
            else:
                obj = self._object_from_stream(entry[1], entry[2])
            self._cache[v.num] = obj
            v = obj
        return v

    def get(self, d: dict, key: str, default=None):
        if not isinstance(d, dict):
            return default
        v = self.resolve(d.get(key))
        return default if v is None else v

    def decode_stream(self, stm: Stream) -> bytes:
        filters = [self.resolve(f) for f in _as_list(self.resolve(stm.dict.get("Filter")))]
        parms = [self.resolve(p) for p in _as_list(self.resolve(stm.dict.get("DecodeParms")))]
        data = stm.raw
        for i, f in enumerate(filters):
            parm = parms[i] if i < len(parms) and isinstance(parms[i], dict) else {}
            if f in ("FlateDecode", "Fl"):
                data = _flate(data)
                pred = int(parm.get("Predictor", 1) or 1)
                if pred >= 10:
                    data = _png_unpredict(data, int(parm.get("Columns", 1)),
                                          int(parm.get("Colors", 1)),
                                          int(parm.get("BitsPerComponent", 8)))
                elif pred == 2:
                    raise UnsupportedFilterError("TIFF predictor is not supported")
            elif f in ("ASCIIHexDecode", "AHx"):
                data = _ascii_hex(data)
            else:
                raise UnsupportedFilterError(f"unsupported stream filter /{f}")
        return data

    # pages -------------------------------------------------------------------

    def _collect_pages(self) -> list[PageInfo]:
        root = self.resolve(self.trailer.get("Root"))
        if not isinstance(root, dict):
            raise MalformedXrefError("document catalog is missing")
        tree = self.resolve(root.get("Pages"))
        out: list[PageInfo] = []
        seen: set[int] = set()

        def walk(node, inherited, depth):
            if depth > _MAX_DEPTH or not isinstance(node, dict) or id(node) in seen:
                return
            seen.add(id(node))
            inh = dict(inherited)
            for key in ("Resources", "MediaBox", "CropBox", "Rotate"):
                if node.get(key) is not None:
                    inh[key] = node[key]
            kids = self.resolve(node.get("Kids"))
            if node.get("Type") == "Page" or (kids is None and node.get("Type") != "Pages"):
                mb = self.resolve(inh.get("MediaBox"))
                if not isinstance(mb, list) or len(mb) != 4:
                    mb = [0, 0, 612, 792]
                vals = [float(self.resolve(v)) for v in mb]
                box = Rect(min(vals[0], vals[2]), min(vals[1], vals[3]),
                           max(vals[0], vals[2]), max(vals[1], vals[3]))
                res = self.resolve(inh.get("Resources"))
                out.append(PageInfo(node, box, res if isinstance(res, dict) else {}))
                return
            for kid in kids or []:
                walk(self.resolve(kid), inh, depth + 1)

        walk(tree, {}, 0)
        return out

    def page_contents(self, i: int) -> bytes:
        page = self.pages[i].obj
        parts = []
        for c in _as_list(self.resolve(page.get("Contents"))):
            c = self.resolve(c)
            if isinstance(c, Stream):
                parts.append(self.decode_stream(c))
        return b"\n".join(parts)


def open_pdf(data: bytes) -> PdfDocument:
    """Parse ``data`` as a PDF; raises a :class:`PdfError` subclass on failure."""
    if not data.lstrip(b"\x00\t\n\r ")[:5] == b"%PDF-":
        raise PdfSyntaxError("missing %PDF- header")
    try:
        return PdfDocument(data)
    except PdfError:
        raise
    except (ValueError, TypeError, IndexError, KeyError, RecursionError) as exc:
        raise MalformedXrefError(f"malformed document structure: {exc}") from None


__all__ = ["PdfDocument", "open_pdf", "Name", "Stream"]
