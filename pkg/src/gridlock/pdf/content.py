"""Content-stream interpreter: turns page drawing operators into PIF primitives."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..geometry import Orientation, Rect, Segment
from ..page_model import PageGraphics, SourceKind, TextSpan, q
from .document import PdfDocument
from .fonts import Font, fallback_font, load_font
from .objects import EOF, Keyword, Lexer, Name, Parser, PdfError, Stream

THIN_PT = 3.0
ASCENT, DESCENT = 0.8, -0.2
TJ_SPLIT_EM = 0.5
_MAX_FORM_DEPTH = 8
_EPS = 1e-6

Matrix = tuple  # (a, b, c, d, e, f)
IDENTITY: Matrix = (1.0, 0.0, 0.0, 1.0, 0.0, 0.0)


def mat_mul(m: Matrix, n: Matrix) -> Matrix:
    """m then n (row-vector convention used by PDF)."""
    a, b, c, d, e, f = m
    A, B, C, D, E, F = n
    return (a * A + b * C, a * B + b * D, c * A + d * C, c * B + d * D,
            e * A + f * C + E, e * B + f * D + F)


def apply(m: Matrix, x: float, y: float) -> tuple[float, float]:
    return m[0] * x + m[2] * y + m[4], m[1] * x + m[3] * y + m[5]


@dataclass
class PageExtraction:
    page: PageGraphics
    images: list[Rect] = field(default_factory=list)
    inline_images_skipped: int = 0
    warnings: list[str] = field(default_factory=list)


@dataclass
class _GState:
    ctm: Matrix = IDENTITY
    font: Font | None = None
    font_size: float = 0.0
    char_spacing: float = 0.0
    word_spacing: float = 0.0
    hscale: float = 1.0
    leading: float = 0.0
    rise: float = 0.0

    def copy(self) -> "_GState":
        return _GState(**self.__dict__)


class _Interpreter:
    def __init__(self, doc: PdfDocument, media: Rect, thin_pt: float = THIN_PT,
                 tj_split_em: float = TJ_SPLIT_EM):
        self.doc = doc
        self.thin_pt = thin_pt
        self.tj_split_em = tj_split_em
        self.media = media
        self.width = media.width
        self.height = media.height
        self.segments: list[Segment] = []
        self.rects: list[Rect] = []
        self.spans: list[TextSpan] = []
        self.images: list[Rect] = []
        self.inline_skipped = 0
        self.warnings: list[str] = []
        self._font_cache: dict[int, Font] = {}

    # coordinates ---------------------------------------------------------------

    def to_page(self, x: float, y: float) -> tuple[float, float]:
        return x - self.media.x0, self.media.y1 - y

    def _clip_rect(self, x0, y0, x1, y1):
        x0, x1 = max(0.0, x0), min(self.width, x1)
        y0, y1 = max(0.0, y0), min(self.height, y1)
        r = (q(x0), q(y0), q(x1), q(y1))
        if r[0] < r[2] and r[1] < r[3]:
            return Rect(*r)
        return None

    def add_segment(self, orient: Orientation, pos: float, lo: float, hi: float):
        if lo > hi:
            lo, hi = hi, lo
        limit, span_limit = (self.height, self.width) if orient is Orientation.H else (self.width, self.height)
        if not -_EPS <= pos <= limit + _EPS:
            return
        pos = min(max(pos, 0.0), limit)
        lo, hi = max(lo, 0.0), min(hi, span_limit)
        pos, lo, hi = q(pos), q(lo), q(hi)
        if lo < hi:
            self.segments.append(Segment(orient, pos, lo, hi))

    # paths ---------------------------------------------------------------------

    def paint_path(self, subpaths, stroke: bool, fill: bool):
        for kind, pts, closed in subpaths:
            if kind == "re":
                self._paint_rect(pts, stroke, fill)
            elif kind == "poly":
                self._paint_poly(pts, closed, stroke, fill)

    def _page_pts(self, pts):
        return [self.to_page(x, y) for x, y in pts]

    def _paint_rect(self, pts, stroke, fill):
        pp = self._page_pts(pts)
        xs = [p[0] for p in pp]
        ys = [p[1] for p in pp]
        axis_aligned = all(abs(pp[i][0] - pp[(i + 1) % 4][0]) < _EPS or abs(pp[i][1] - pp[(i + 1) % 4][1]) < _EPS
                           for i in range(4))
        if not axis_aligned:
            return
        x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
        w, h = x1 - x0, y1 - y0
        if min(w, h) < self.thin_pt:
            if max(w, h) < self.thin_pt:
                return
            if w >= h:
                self.add_segment(Orientation.H, (y0 + y1) / 2, x0, x1)
            else:
                self.add_segment(Orientation.V, (x0 + x1) / 2, y0, y1)
            return
        if stroke:
            self.add_segment(Orientation.H, y0, x0, x1)
            self.add_segment(Orientation.H, y1, x0, x1)
            self.add_segment(Orientation.V, x0, y0, y1)
            self.add_segment(Orientation.V, x1, y0, y1)
        if fill:
            r = self._clip_rect(x0, y0, x1, y1)
            if r is not None:
                self.rects.append(r)

    def _paint_poly(self, pts, closed, stroke, fill):
        pp = self._page_pts(pts)
        if len(pp) < 2:
            return
        edges = list(zip(pp, pp[1:]))
        if closed and pp[0] != pp[-1]:
            edges.append((pp[-1], pp[0]))
        if fill and len(pp) >= 3:
            xs = [p[0] for p in pp]
            ys = [p[1] for p in pp]
            orth = all(abs(a[0] - b[0]) < _EPS or abs(a[1] - b[1]) < _EPS for a, b in edges)
            x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
            if orth and min(x1 - x0, y1 - y0) < self.thin_pt and max(x1 - x0, y1 - y0) >= self.thin_pt:
                # a filled thin bar drawn as a polygon
                if x1 - x0 >= y1 - y0:
                    self.add_segment(Orientation.H, (y0 + y1) / 2, x0, x1)
                else:
                    self.add_segment(Orientation.V, (x0 + x1) / 2, y0, y1)
                return
        if not stroke:
            return
        for (ax, ay), (bx, by) in edges:
            if abs(ay - by) < _EPS and abs(ax - bx) > _EPS:
                self.add_segment(Orientation.H, ay, ax, bx)
            elif abs(ax - bx) < _EPS and abs(ay - by) > _EPS:
                self.add_segment(Orientation.V, ax, ay, by)

    # text ----------------------------------------------------------------------

    def font(self, resources, name) -> Font:
        fonts = self.doc.get(resources, "Font", {})
        ref = fonts.get(name) if isinstance(fonts, dict) else None
        if ref is None:
            self.warnings.append(f"missing font resource /{name}")
            return fallback_font()
        key = id(self.doc.resolve(ref))
        if key not in self._font_cache:
            try:
                self._font_cache[key] = load_font(self.doc, ref)
            except PdfError as exc:
                self.warnings.append(f"unreadable font /{name}: {exc}")
                self._font_cache[key] = fallback_font()
        return self._font_cache[key]

    def show(self, gs: _GState, tm: Matrix, items) -> Matrix:
        """Render a TJ-style item list; returns the advanced text matrix."""
        font = gs.font or fallback_font()
        fs, th = gs.font_size, gs.hscale
        glyphs: list = []

        def flush():
            if glyphs:
                self._emit_span(glyphs)
                glyphs.clear()

        for item in items:
            if isinstance(item, (int, float)):
                shift = -float(item) / 1000.0 * fs * th
                if fs and -float(item) / 1000.0 > self.tj_split_em:
                    flush()
                tm = mat_mul((1, 0, 0, 1, shift, 0), tm)
                continue
            if not isinstance(item, bytes):
                continue
            for code, text, w0 in font.glyphs(item):
                trm = mat_mul(mat_mul((fs * th, 0, 0, fs, 0, gs.rise), tm), gs.ctm)
                corners = [apply(trm, gx, gy) for gx in (0.0, w0) for gy in (DESCENT, ASCENT)]
                pc = [self.to_page(x, y) for x, y in corners]
                origin = self.to_page(*apply(trm, 0.0, 0.0))
                glyphs.append((text, pc, origin))
                tx = (w0 * fs + gs.char_spacing + (gs.word_spacing if font.code_bytes == 1 and code == 32 else 0.0)) * th
                tm = mat_mul((1, 0, 0, 1, tx, 0), tm)
        flush()
        return tm

    def _emit_span(self, glyphs):
        lo, hi = 0, len(glyphs)
        while lo < hi and glyphs[lo][0].isspace():
            lo += 1
        while hi > lo and glyphs[hi - 1][0].isspace():
            hi -= 1
        glyphs = [g for g in glyphs[lo:hi] if g[0]]
        if not glyphs:
            return
        xs = [p[0] for g in glyphs for p in g[1]]
        ys = [p[1] for g in glyphs for p in g[1]]
        bbox = self._clip_rect(min(xs), min(ys), max(xs), max(ys))
        if bbox is None:
            return
        text = "".join(g[0] for g in glyphs)
        lefts = [min(p[0] for p in g[1]) for g in glyphs]
        rights = [max(p[0] for p in g[1]) for g in glyphs]
        per_glyph = [b - a for a, b in zip(lefts, lefts[1:])] + [rights[-1] - lefts[-1]]
        adv: list[float] = []
        for (t, _, _), a in zip(glyphs, per_glyph):
            adv.extend([a / len(t)] * len(t))
        ok = all(a >= 0 for a in adv) and abs(math.fsum(adv) - bbox.width) <= 0.05 * bbox.width
        self.spans.append(TextSpan(bbox, text, tuple(q(a) for a in adv) if ok else None))

    # images --------------------------------------------------------------------

    def add_image(self, ctm: Matrix):
        pts = [self.to_page(*apply(ctm, x, y)) for x in (0.0, 1.0) for y in (0.0, 1.0)]
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        r = self._clip_rect(min(xs), min(ys), max(xs), max(ys))
        if r is not None:
            self.images.append(r)

    # main loop -------------------------------------------------------------------

    def run(self, data: bytes, resources: dict, gs: _GState, depth: int = 0):
        lex = Lexer(data)
        parser = Parser(lex)
        stack: list[_GState] = []
        operands: list = []
        path: list = []  # list of (kind, pts, closed)
        cur: list = []
        cur_closed = False
        tm = tlm = IDENTITY

        def end_sub():
            nonlocal cur, cur_closed
            if len(cur) >= 2:
                path.append(("poly", cur, cur_closed))
            cur, cur_closed = [], False

        while True:
            try:
                tok = parser.parse()
            except PdfError:
                operands.clear()
                continue
            if tok is EOF:
                break
            if not isinstance(tok, Keyword):
                operands.append(tok)
                continue
            op = str(tok)
            ops = operands
            operands = []
            try:
                nums = [float(v) for v in ops if isinstance(v, (int, float)) and not isinstance(v, bool)]
                if op == "q":
                    stack.append(gs.copy())
                elif op == "Q":
                    if stack:
                        gs = stack.pop()
                elif op == "cm" and len(nums) == 6:
                    gs.ctm = mat_mul(tuple(nums), gs.ctm)
                elif op == "m" and len(nums) == 2:
                    end_sub()
                    cur = [apply(gs.ctm, *nums)]
                elif op == "l" and len(nums) == 2:
                    cur.append(apply(gs.ctm, *nums))
                elif op in ("c", "v", "y"):
                    # curves break straight-run detection; keep the end point only
                    if len(nums) >= 2:
                        end_sub()
                        cur = [apply(gs.ctm, *nums[-2:])]
                elif op == "h":
                    cur_closed = True
                    first = cur[0] if cur else None
                    end_sub()
                    if first is not None:
                        cur = [first]
                elif op == "re" and len(nums) == 4:
                    end_sub()
                    x, y, w, h = nums
                    pts = [apply(gs.ctm, px, py) for px, py in ((x, y), (x + w, y), (x + w, y + h), (x, y + h))]
                    path.append(("re", pts, True))
                elif op in ("S", "s", "f", "F", "f*", "B", "B*", "b", "b*", "n"):
                    if op in ("s", "b", "b*"):
                        cur_closed = True
                    end_sub()
                    stroke = op in ("S", "s", "B", "B*", "b", "b*")
                    fill = op in ("f", "F", "f*", "B", "B*", "b", "b*")
                    if op != "n":
                        self.paint_path(path, stroke, fill)
                    path = []
                elif op == "BT":
                    tm = tlm = IDENTITY
                elif op == "Tf" and len(ops) >= 2 and isinstance(ops[0], Name):
                    gs.font = self.font(resources, ops[0])
                    gs.font_size = float(ops[1])
                elif op == "Tc" and nums:
                    gs.char_spacing = nums[0]
                elif op == "Tw" and nums:
                    gs.word_spacing = nums[0]
                elif op == "Tz" and nums:
                    gs.hscale = nums[0] / 100.0
                elif op == "TL" and nums:
                    gs.leading = nums[0]
                elif op == "Ts" and nums:
                    gs.rise = nums[0]
                elif op in ("Td", "TD") and len(nums) == 2:
                    if op == "TD":
                        gs.leading = -nums[1]
                    tm = tlm = mat_mul((1, 0, 0, 1, nums[0], nums[1]), tlm)
                elif op == "Tm" and len(nums) == 6:
                    tm = tlm = tuple(nums)
                elif op == "T*":
                    tm = tlm = mat_mul((1, 0, 0, 1, 0, -gs.leading), tlm)
                elif op == "Tj" and ops and isinstance(ops[-1], bytes):
                    tm = self.show(gs, tm, [ops[-1]])
                elif op == "TJ" and ops and isinstance(ops[-1], list):
                    tm = self.show(gs, tm, ops[-1])
                elif op in ("'", '"') and ops and isinstance(ops[-1], bytes):
                    if op == '"' and len(nums) >= 2:
                        gs.word_spacing, gs.char_spacing = nums[0], nums[1]
                    tm = tlm = mat_mul((1, 0, 0, 1, 0, -gs.leading), tlm)
                    tm = self.show(gs, tm, [ops[-1]])
                elif op == "Do" and ops and isinstance(ops[-1], Name):
                    self._do(ops[-1], resources, gs, depth)
                elif op == "BI":
                    self._skip_inline_image(lex)
                    parser._buf.clear()
            except (ValueError, TypeError, ZeroDivisionError, OverflowError):
                # malformed operands: the operator is skipped
                continue

    def _skip_inline_image(self, lex: Lexer):
        d = lex.data
        i = d.find(b"ID", lex.pos)
        if i < 0:
            lex.pos = len(d)
            return
        j = i + 3
        while True:
            k = d.find(b"EI", j)
            if k < 0:
                lex.pos = len(d)
                break
            before = d[k - 1:k]
            after = d[k + 2:k + 3]
            if before in (b" ", b"\n", b"\r", b"\t") and (after == b"" or after in b" \n\r\t/%"):
                lex.pos = k + 2
                break
            j = k + 2
        self.inline_skipped += 1

    def _do(self, name, resources, gs: _GState, depth: int):
        xobjs = self.doc.get(resources, "XObject", {})
        xo = self.doc.resolve(xobjs.get(name)) if isinstance(xobjs, dict) else None
        if not isinstance(xo, Stream):
            return
        sub = xo.dict.get("Subtype")
        if sub == "Image":
            self.add_image(gs.ctm)
        elif sub == "Form" and depth < _MAX_FORM_DEPTH:
            inner = gs.copy()
            m = self.doc.get(xo.dict, "Matrix")
            if isinstance(m, list) and len(m) == 6:
                inner.ctm = mat_mul(tuple(float(self.doc.resolve(v)) for v in m), inner.ctm)
            res = self.doc.get(xo.dict, "Resources")
            try:
                data = self.doc.decode_stream(xo)
            except PdfError as exc:
                self.warnings.append(f"form XObject /{name} skipped: {exc}")
                return
            self.run(data, res if isinstance(res, dict) else resources, inner, depth + 1)


def extract_page_detail(doc: PdfDocument, index: int, thin_pt: float = THIN_PT,
                        tj_split_em: float = TJ_SPLIT_EM) -> PageExtraction:
    if not 0 <= index < doc.page_count:
        raise IndexError(f"page {index} out of range (document has {doc.page_count})")
    info = doc.pages[index]
    interp = _Interpreter(doc, info.media_box, thin_pt, tj_split_em)
    interp.run(doc.page_contents(index), info.resources, _GState())
    if interp.inline_skipped:
        interp.warnings.append(f"skipped {interp.inline_skipped} inline image(s)")
    page = PageGraphics(index, q(info.media_box.width), q(info.media_box.height),
                        interp.spans, interp.segments, interp.rects,
                        SourceKind.DIGITAL_PDF)
    return PageExtraction(page, interp.images, interp.inline_skipped, interp.warnings)


def extract_page(doc: PdfDocument, index: int) -> PageGraphics:
    """Interpret one page's content stream into text spans, rules and rectangles."""
    return extract_page_detail(doc, index).page
