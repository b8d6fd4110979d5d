"""PDF object model and tokenizer."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any


class PdfError(Exception):
    """Base class for PDF reading failures."""


class PdfSyntaxError(PdfError):
    pass


class MalformedXrefError(PdfError):
    pass


class UnsupportedFilterError(PdfError):
    pass


class EncryptedPdfError(PdfError):
    pass


class Name(str):
    def __repr__(self):
        return "/" + str.__str__(self)


class Keyword(str):
    def __repr__(self):
        return "Keyword(" + str.__str__(self) + ")"


@dataclass(frozen=True)
class Ref:
    num: int
    gen: int = 0


@dataclass
class Stream:
    dict: dict
    raw: bytes


WHITESPACE = b"\x00\t\n\x0c\r "
DELIMS = b"()<>[]{}/%"
_WS_SET = frozenset(WHITESPACE)
_END_SET = frozenset(WHITESPACE + DELIMS)

_ESCAPES = {ord("n"): b"\n", ord("r"): b"\r", ord("t"): b"\t", ord("b"): b"\b",
            ord("f"): b"\f", ord("("): b"(", ord(")"): b")", ord("\\"): b"\\"}

# structural markers returned by the tokenizer
ARRAY_OPEN, ARRAY_CLOSE = Keyword("["), Keyword("]")
DICT_OPEN, DICT_CLOSE = Keyword("<<"), Keyword(">>")
EOF = Keyword("")


class Lexer:
    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def skip_ws(self):
        d, n = self.data, len(self.data)
        while self.pos < n:
            c = d[self.pos]
            if c in _WS_SET:
                self.pos += 1
            elif c == 0x25:  # %
                while self.pos < n and d[self.pos] not in (10, 13):
                    self.pos += 1
            else:
                break

    def token(self):
        self.skip_ws()
        d, n = self.data, len(self.data)
        if self.pos >= n:
            return EOF
        c = d[self.pos]
        if c == 0x2F:  # /
            start = self.pos + 1
            self.pos = start
            while self.pos < n and d[self.pos] not in _END_SET:
                self.pos += 1
            return Name(_decode_name(d[start:self.pos]))
        if c == 0x28:  # (
            return self._literal_string()
        if c == 0x3C:  # <
            if self.pos + 1 < n and d[self.pos + 1] == 0x3C:
                self.pos += 2
                return DICT_OPEN
            return self._hex_string()
        if c == 0x3E:
            if self.pos + 1 < n and d[self.pos + 1] == 0x3E:
                self.pos += 2
                return DICT_CLOSE
            self.pos += 1
            raise PdfSyntaxError(f"stray '>' at byte {self.pos - 1}")
        if c == 0x5B:
            self.pos += 1
            return ARRAY_OPEN
        if c == 0x5D:
            self.pos += 1
            return ARRAY_CLOSE
        if c in (0x7B, 0x7D):  # PostScript braces in CMaps
            self.pos += 1
            return Keyword(chr(c))
        start = self.pos
        while self.pos < n and d[self.pos] not in _END_SET:
            self.pos += 1
        if self.pos == start:
            self.pos += 1
            raise PdfSyntaxError(f"unexpected byte {c!r} at {start}")
        raw = d[start:self.pos]
        return _number_or_keyword(raw)

    def _literal_string(self) -> bytes:
        d, n = self.data, len(self.data)
        self.pos += 1
        depth = 1
        out = bytearray()
        while self.pos < n:
            c = d[self.pos]
            self.pos += 1
            if c == 0x5C:  # backslash
                if self.pos >= n:
                    break
                e = d[self.pos]
                self.pos += 1
                if e in _ESCAPES:
                    out += _ESCAPES[e]
                elif 0x30 <= e <= 0x37:
                    val = e - 0x30
                    for _ in range(2):
                        if self.pos < n and 0x30 <= d[self.pos] <= 0x37:
                            val = val * 8 + d[self.pos] - 0x30
                            self.pos += 1
                    out.append(val & 0xFF)
                elif e == 13:
                    if self.pos < n and d[self.pos] == 10:
                        self.pos += 1
                elif e == 10:
                    pass
                else:
                    out.append(e)
            elif c == 0x28:
                depth += 1
                out.append(c)
            elif c == 0x29:
                depth -= 1
                if depth == 0:
                    return bytes(out)
                out.append(c)
            else:
                out.append(c)
        raise PdfSyntaxError("unterminated string")

    def _hex_string(self) -> bytes:
        d = self.data
        end = d.find(b">", self.pos)
        if end < 0:
            self.pos = len(d)
            raise PdfSyntaxError("unterminated hex string")
        digits = bytes(ch for ch in d[self.pos + 1:end] if ch not in _WS_SET)
        self.pos = end + 1
        if len(digits) % 2:
            digits += b"0"
        try:
            return bytes.fromhex(digits.decode("ascii"))
        except ValueError:
            raise PdfSyntaxError("bad hex string") from None


def _decode_name(raw: bytes) -> str:
    if b"#" not in raw:
        return raw.decode("latin-1")
    out = bytearray()
    i = 0
    while i < len(raw):
        if raw[i] == 0x23 and i + 2 < len(raw):
            try:
                out.append(int(raw[i + 1:i + 3], 16))
                i += 3
                continue
            except ValueError:
                pass
        out.append(raw[i])
        i += 1
    return out.decode("latin-1")


def _number_or_keyword(raw: bytes):
    try:
        if b"." in raw:
            return float(raw)
        return int(raw)
    except ValueError:
        pass
    if raw[:1] in (b"+", b"-", b".") or raw[:1].isdigit():
        # tolerate malformed numbers such as "--5" or "1.2.3"
        try:
            return float(raw.lstrip(b"+-").split(b".")[0] or b"0")
        except ValueError:
            pass
    s = raw.decode("latin-1")
    if s == "true":
        return True
    if s == "false":
        return False
    if s == "null":
        return None
    return Keyword(s)


class Parser:
    """Builds objects from a token stream; resolves ``n g R`` into :class:`Ref`."""

    def __init__(self, lexer: Lexer):
        self.lex = lexer
        self._buf: list = []

    def _next(self):
        if self._buf:
            return self._buf.pop()
        return self.lex.token()

    def _push(self, tok):
        self._buf.append(tok)

    def parse(self) -> Any:
        tok = self._next()
        return self._build(tok)

    def _build(self, tok):
        if tok is ARRAY_OPEN:
            items = []
            while True:
                t = self._next()
                if t is ARRAY_CLOSE:
                    return items
                if t is EOF:
                    raise PdfSyntaxError("unterminated array")
                items.append(self._build_ref(t))
        if tok is DICT_OPEN:
            out = {}
            while True:
                t = self._next()
                if t is DICT_CLOSE:
                    return out
                if t is EOF:
                    raise PdfSyntaxError("unterminated dictionary")
                if not isinstance(t, Name):
                    raise PdfSyntaxError(f"dictionary key must be a name, got {t!r}")
                v = self._next()
                if v is DICT_CLOSE:
                    out[t] = None
                    return out
                out[t] = self._build_ref(v)
        return tok

    def _build_ref(self, tok):
        if isinstance(tok, int) and not isinstance(tok, bool):
            t2 = self._next()
            if isinstance(t2, int) and not isinstance(t2, bool):
                t3 = self._next()
                if t3 == "R" and isinstance(t3, Keyword):
                    return Ref(tok, t2)
                self._push(t3)
            self._push(t2)
            return tok
        return self._build(tok)

    def parse_value(self):
        """Like :meth:`parse` but recognizes indirect references at top level."""
        return self._build_ref(self._next())
