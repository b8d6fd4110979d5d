"""Page Interchange Format (PIF): serializable page primitives.

Every frontend (digital PDF, raster, synthetic generator) produces a
:class:`PageGraphics`; the table core never looks at anything else.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .geometry import Orientation, Rect, Segment

PIF_VERSION = 1


class SourceKind(str, Enum):
    DIGITAL_PDF = "digital_pdf"
    IMAGE = "image"


class PifError(ValueError):
    """Malformed or invalid PIF document."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class PifSchemaError(PifError):
    pass


class PifVersionError(PifError):
    pass


class PifInvariantError(PifError):
    pass


@dataclass(frozen=True)
class TextSpan:
    bbox: Rect
    text: str
    char_advances: Optional[tuple[float, ...]] = None


@dataclass
class PageGraphics:
    page_index: int
    width: float
    height: float
    text_spans: list[TextSpan] = field(default_factory=list)
    segments: list[Segment] = field(default_factory=list)
    rects: list[Rect] = field(default_factory=list)
    source_kind: SourceKind = SourceKind.DIGITAL_PDF

    @property
    def h_segments(self) -> list[Segment]:
        return [s for s in self.segments if s.orientation is Orientation.H]

    @property
    def v_segments(self) -> list[Segment]:
        return [s for s in self.segments if s.orientation is Orientation.V]


@dataclass
class RasterPage:
    """Grayscale page image, 0 = black. ``pixels`` has shape (height, width)."""

    pixels: np.ndarray
    dpi: float

    def __post_init__(self):
        self.pixels = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if self.pixels.ndim != 2:
            raise ValueError("raster pixels must be 2-D")
        if not self.dpi > 0:
            raise ValueError("dpi must be positive")

    @property
    def width_px(self) -> int:
        return self.pixels.shape[1]

    @property
    def height_px(self) -> int:
        return self.pixels.shape[0]

    @property
    def scale(self) -> float:
        """Pixels per page unit."""
        return self.dpi / 72.0


def q(v: float) -> float:
    """Quantize to the 3-decimal PIF grid."""
    r = round(float(v), 3)
    return 0.0 if r == 0 else r


# -- validation -------------------------------------------------------------


def _in_bounds(r: Rect, w: float, h: float, eps: float = 1e-6) -> bool:
    return -eps <= r.x0 and r.x1 <= w + eps and -eps <= r.y0 and r.y1 <= h + eps


def validate(page: PageGraphics) -> list[str]:
    """Return human-readable invariant violations; empty means valid."""
    out = []
    if not isinstance(page.page_index, int) or page.page_index < 0:
        out.append("page_index: must be an integer >= 0")
    if not (page.width > 0 and page.height > 0):
        out.append("width/height: must be positive")
    for i, sp in enumerate(page.text_spans):
        b = sp.bbox
        if not sp.text:
            out.append(f"text_spans[{i}].text: must be non-empty")
        if not (b.x0 < b.x1 and b.y0 < b.y1):
            out.append(f"text_spans[{i}].bbox: must have x0<x1 and y0<y1")
        if not _in_bounds(b, page.width, page.height):
            out.append(f"text_spans[{i}].bbox: outside page bounds")
        if sp.char_advances is not None:
            if len(sp.char_advances) != len(sp.text):
                out.append(f"text_spans[{i}].char_advances: length must equal character count")
            elif b.width > 0 and abs(sum(sp.char_advances) - b.width) > 0.1 * b.width:
                out.append(f"text_spans[{i}].char_advances: sum must be within 10% of bbox width")
    for i, s in enumerate(page.segments):
        if not s.lo < s.hi:
            out.append(f"segments[{i}]: segment interval must satisfy lo < hi")
        if not all(math.isfinite(v) for v in (s.position, s.lo, s.hi)):
            out.append(f"segments[{i}]: coordinates must be finite")
        elif not _in_bounds(s.bbox(), page.width, page.height):
            out.append(f"segments[{i}]: outside page bounds")
    for i, r in enumerate(page.rects):
        if not (r.x0 < r.x1 and r.y0 < r.y1):
            out.append(f"rects[{i}]: must have x0<x1 and y0<y1")
        if not _in_bounds(r, page.width, page.height):
            out.append(f"rects[{i}]: outside page bounds")
    return out


# -- serialization ----------------------------------------------------------


def page_to_dict(page: PageGraphics) -> dict:
    spans = []
    for sp in page.text_spans:
        d = {"bbox": [q(v) for v in sp.bbox.as_list()], "text": sp.text}
        if sp.char_advances is not None:
            d["char_advances"] = [q(v) for v in sp.char_advances]
        spans.append(d)
    return {
        "pif_version": PIF_VERSION,
        "page_index": page.page_index,
        "width": q(page.width),
        "height": q(page.height),
        "source_kind": page.source_kind.value,
        "text_spans": spans,
        "segments": [
            {"o": s.orientation.value, "pos": q(s.position), "lo": q(s.lo), "hi": q(s.hi)}
            for s in page.segments
        ],
        "rects": [[q(v) for v in r.as_list()] for r in page.rects],
    }


def pif_save(page: PageGraphics) -> bytes:
    return json.dumps(page_to_dict(page), ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def _num(v, name):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise PifSchemaError(name, "expected a number")
    if not math.isfinite(v):
        raise PifSchemaError(name, "expected a finite number")
    return float(v)


def _rect(v, name) -> Rect:
    if not isinstance(v, list) or len(v) != 4:
        raise PifSchemaError(name, "expected [x0, y0, x1, y1]")
    return Rect(*(_num(x, f"{name}[{i}]") for i, x in enumerate(v)))


def page_from_dict(doc) -> PageGraphics:
    if not isinstance(doc, dict):
        raise PifSchemaError("<root>", "expected a JSON object")
    if "pif_version" not in doc:
        raise PifSchemaError("pif_version", "missing")
    if doc["pif_version"] != PIF_VERSION:
        raise PifVersionError("pif_version", f"unsupported version {doc['pif_version']!r}")
    for key in ("page_index", "width", "height", "source_kind", "text_spans", "segments", "rects"):
        if key not in doc:
            raise PifSchemaError(key, "missing")
    pi = doc["page_index"]
    if isinstance(pi, bool) or not isinstance(pi, int):
        raise PifSchemaError("page_index", "expected an integer")
    try:
        kind = SourceKind(doc["source_kind"])
    except ValueError:
        raise PifSchemaError("source_kind", f"unknown value {doc['source_kind']!r}") from None

    spans = []
    if not isinstance(doc["text_spans"], list):
        raise PifSchemaError("text_spans", "expected a list")
    for i, d in enumerate(doc["text_spans"]):
        name = f"text_spans[{i}]"
        if not isinstance(d, dict) or "bbox" not in d or "text" not in d:
            raise PifSchemaError(name, "expected {bbox, text}")
        if not isinstance(d["text"], str):
            raise PifSchemaError(name + ".text", "expected a string")
        adv = d.get("char_advances")
        if adv is not None:
            if not isinstance(adv, list):
                raise PifSchemaError(name + ".char_advances", "expected a list")
            adv = tuple(_num(a, f"{name}.char_advances") for a in adv)
        spans.append(TextSpan(_rect(d["bbox"], name + ".bbox"), d["text"], adv))

    segs = []
    if not isinstance(doc["segments"], list):
        raise PifSchemaError("segments", "expected a list")
    for i, d in enumerate(doc["segments"]):
        name = f"segments[{i}]"
        if not isinstance(d, dict) or not {"o", "pos", "lo", "hi"} <= d.keys():
            raise PifSchemaError(name, "expected {o, pos, lo, hi}")
        try:
            o = Orientation(d["o"])
        except ValueError:
            raise PifSchemaError(name + ".o", "expected 'h' or 'v'") from None
        segs.append(Segment(o, _num(d["pos"], name + ".pos"), _num(d["lo"], name + ".lo"),
                            _num(d["hi"], name + ".hi")))

    if not isinstance(doc["rects"], list):
        raise PifSchemaError("rects", "expected a list")
    rects = [_rect(r, f"rects[{i}]") for i, r in enumerate(doc["rects"])]

    page = PageGraphics(pi, _num(doc["width"], "width"), _num(doc["height"], "height"),
                        spans, segs, rects, kind)
    problems = validate(page)
    if problems:
        field_name, _, msg = problems[0].partition(": ")
        raise PifInvariantError(field_name, msg)
    return page


def pif_load(data: bytes | str) -> PageGraphics:
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise PifSchemaError("<root>", f"not valid JSON ({exc})") from None
    return page_from_dict(doc)
