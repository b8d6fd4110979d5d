"""Deterministic synthetic wired tables: ground truth, vector page and raster page.

Randomness comes from SplitMix64 (Steele, Lea and Flood's 64-bit mixer):

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

all arithmetic modulo 2**64. A float in [0, 1) is ``(z >> 11) / 2**53``.
Draw order is part of the corpus definition; see :func:`gen_table`.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass

import numpy as np

from .deskew import MAX_ANGLE, rotate_raster
from .geometry import Orientation, Rect, Segment
from .linecell import LogicalCell, TableStructure
from .page_model import PageGraphics, RasterPage, SourceKind, TextSpan, q
from .raster_lines import ConfigError

MASK64 = (1 << 64) - 1

PAGE_W, PAGE_H = 612.0, 792.0
MARGIN = 36.0
MIN_CELL = 18.0
MAX_ROW_H = 48.0
MIN_COL_W = 30.0
FONT_SIZE = 8.0
CHAR_ADV = 4.8
TEXT_PAD = 3.0
ALPHABET = string.ascii_letters + string.digits


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, a: float, b: float) -> float:
        return a + (b - a) * self.random()

    def randint(self, a: int, b: int) -> int:
        """Inclusive on both ends."""
        return a + min(b - a, int(self.random() * (b - a + 1)))

    def choice(self, seq):
        return seq[self.randint(0, len(seq) - 1)]

    def split(self) -> "SplitMix64":
        return SplitMix64(self.next_u64())


@dataclass(frozen=True)
class SynthParams:
    seed: int = 0
    max_rows: int = 12
    max_cols: int = 8
    merge_prob: float = 0.3
    skew_deg: float = 0.0
    dpi: float = 150.0
    text_fill: bool = True
    noise_sigma: float = 0.0

    def check(self):
        if self.max_rows < 1 or self.max_cols < 1:
            raise ConfigError("max_rows and max_cols must be positive")
        if not 0.0 <= self.merge_prob < 1.0:
            raise ConfigError("merge_prob must lie in [0, 1)")
        if not self.dpi > 0:
            raise ConfigError("dpi must be positive")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be non-negative")
        if abs(self.skew_deg) > MAX_ANGLE:
            raise ConfigError(f"skew_deg must be within +-{MAX_ANGLE}")
        usable_w, usable_h = PAGE_W - 2 * MARGIN, PAGE_H - 2 * MARGIN
        if self.max_rows * MIN_CELL > usable_h:
            raise ConfigError(f"{self.max_rows} rows of at least {MIN_CELL} pt do not fit the page")
        if self.max_cols * MIN_COL_W > usable_w:
            raise ConfigError(f"{self.max_cols} columns of at least {MIN_COL_W} pt do not fit the page")


@dataclass
class SynthItem:
    truth: TableStructure
    page: PageGraphics
    raster: RasterPage

    def __iter__(self):
        return iter((self.truth, self.page, self.raster))


def _merge(rng: SplitMix64, nr: int, nc: int, prob: float) -> np.ndarray:
    """Random full-side merges; returns an (nr, nc) owner map of rectangles."""
    owner = np.arange(nr * nc, dtype=np.int64).reshape(nr, nc)
    rects = {k: (k // nc, k % nc, 1, 1) for k in range(nr * nc)}

    def boundary_alive(o):
        # every interior row and column boundary must keep one present edge
        for r in range(1, nr):
            if (o[r - 1] == o[r]).all():
                return False
        for c in range(1, nc):
            if (o[:, c - 1] == o[:, c]).all():
                return False
        return True

    for _ in range(nr * nc):
        if rng.random() >= prob:
            continue
        keys = sorted(rects)
        k = rng.choice(keys)
        r, c, rs, cs = rects[k]
        d = rng.randint(0, 3)
        if d == 0:    # right
            cand = (r, c + cs)
        elif d == 1:  # down
            cand = (r + rs, c)
        elif d == 2:  # left
            cand = (r, c - 1)
        else:         # up
            cand = (r - 1, c)
        if not (0 <= cand[0] < nr and 0 <= cand[1] < nc):
            continue
        j = int(owner[cand])
        r2, c2, rs2, cs2 = rects[j]
        if d in (0, 2) and not (r2 == r and rs2 == rs):
            continue
        if d in (1, 3) and not (c2 == c and cs2 == cs):
            continue
        nr0, nc0 = min(r, r2), min(c, c2)
        new = (nr0, nc0, rs + rs2 if d in (1, 3) else rs, cs + cs2 if d in (0, 2) else cs)
        trial = owner.copy()
        trial[trial == j] = k
        if not boundary_alive(trial):
            continue
        owner = trial
        del rects[j]
        rects[k] = new
    return owner


def _edge_runs(owner: np.ndarray, rows: list[float], cols: list[float]) -> list[Segment]:
    nr, nc = owner.shape
    segs = []
    for i in range(nr + 1):
        present = [i in (0, nr) or owner[i - 1, j] != owner[i, j] for j in range(nc)]
        j = 0
        while j < nc:
            if present[j]:
                k = j
                while k < nc and present[k]:
                    k += 1
                segs.append(Segment(Orientation.H, q(rows[i]), q(cols[j]), q(cols[k])))
                j = k
            else:
                j += 1
    for j in range(nc + 1):
        present = [j in (0, nc) or owner[i, j - 1] != owner[i, j] for i in range(nr)]
        i = 0
        while i < nr:
            if present[i]:
                k = i
                while k < nr and present[k]:
                    k += 1
                segs.append(Segment(Orientation.V, q(cols[j]), q(rows[i]), q(rows[k])))
                i = k
            else:
                i += 1
    return segs


def render_segments(segments, width: float, height: float, dpi: float) -> np.ndarray:
    """Draw each segment as a 1-px black rule on a white page."""
    s = dpi / 72.0
    w_px, h_px = int(round(width * s)), int(round(height * s))
    img = np.full((h_px, w_px), 255, dtype=np.uint8)
    for seg in segments:
        p = min(int(math.floor(seg.position * s)), (h_px if seg.is_horizontal else w_px) - 1)
        lim = (w_px if seg.is_horizontal else h_px) - 1
        a = min(int(math.floor(seg.lo * s)), lim)
        b = min(int(math.floor(seg.hi * s)), lim)
        if seg.is_horizontal:
            img[p, a:b + 1] = 0
        else:
            img[a:b + 1, p] = 0
    return img


def gen_table(params: SynthParams) -> SynthItem:
    """Generate one table.

    Draw order: rows, cols, row heights, column widths, x offset, y offset,
    merges, then per-cell text in row-major cell order, then noise.
    """
    params.check()
    rng = SplitMix64(params.seed)
    nr = rng.randint(min(2, params.max_rows), params.max_rows)
    nc = rng.randint(min(2, params.max_cols), params.max_cols)
    usable_w, usable_h = PAGE_W - 2 * MARGIN, PAGE_H - 2 * MARGIN
    heights = [rng.uniform(MIN_CELL, min(MAX_ROW_H, usable_h / nr)) for _ in range(nr)]
    widths = [rng.uniform(MIN_COL_W, usable_w / nc) for _ in range(nc)]
    x0 = MARGIN + rng.uniform(0.0, usable_w - sum(widths))
    y0 = MARGIN + rng.uniform(0.0, usable_h - sum(heights))
    rows = [q(y0 + math.fsum(heights[:i])) for i in range(nr + 1)]
    cols = [q(x0 + math.fsum(widths[:j])) for j in range(nc + 1)]

    owner = _merge(rng, nr, nc, params.merge_prob)
    cells: list[LogicalCell] = []
    seen = set()
    for r in range(nr):
        for c in range(nc):
            k = int(owner[r, c])
            if k in seen:
                continue
            seen.add(k)
            ys, xs = np.nonzero(owner == k)
            rs, cs = int(ys.max()) - r + 1, int(xs.max()) - c + 1
            cells.append(LogicalCell(r, c, rs, cs, Rect(cols[c], rows[r], cols[c + cs], rows[r + rs])))

    spans = []
    if params.text_fill:
        for cell in cells:
            bb = cell.bbox
            fit = int((bb.width - 2 * TEXT_PAD) // CHAR_ADV)
            n = rng.randint(1, max(1, min(10, fit)))
            text = "".join(rng.choice(ALPHABET) for _ in range(n))
            cy = (bb.y0 + bb.y1) / 2
            tx0 = bb.x0 + TEXT_PAD
            box = Rect(q(tx0), q(cy - FONT_SIZE / 2), q(tx0 + n * CHAR_ADV), q(cy + FONT_SIZE / 2))
            spans.append(TextSpan(box, text, (CHAR_ADV,) * n))
            cell.text = text

    segments = _edge_runs(owner, rows, cols)
    page = PageGraphics(0, PAGE_W, PAGE_H, spans, segments, [], SourceKind.DIGITAL_PDF)
    truth = TableStructure(nr, nc, cells, Rect(cols[0], rows[0], cols[-1], rows[-1]))

    pixels = render_segments(segments, PAGE_W, PAGE_H, params.dpi)
    raster = RasterPage(pixels, params.dpi)
    if params.skew_deg:
        raster = rotate_raster(raster, params.skew_deg)
    if params.noise_sigma > 0:
        gen = np.random.default_rng(rng.next_u64())
        noisy = raster.pixels.astype(np.float64) + gen.normal(0.0, params.noise_sigma, raster.pixels.shape)
        raster = RasterPage(np.clip(np.rint(noisy), 0, 255).astype(np.uint8), raster.dpi)
    return SynthItem(truth, page, raster)
