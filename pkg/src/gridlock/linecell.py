"""LineCell: rule lattice -> grid -> edge presence -> merged logical cells."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import DEFAULT_TOL, Rect, Segment, Tolerances, snap_1d
from .page_model import PageGraphics
from .raster_lines import intersection_pairs
from .table_region import RegionKind, TableRegion


class DegenerateRegionError(ValueError):
    """A region does not yield at least a 1x1 lattice."""


@dataclass
class Grid:
    row_bounds: list[float]
    col_bounds: list[float]

    @property
    def n_rows(self) -> int:
        return len(self.row_bounds) - 1

    @property
    def n_cols(self) -> int:
        return len(self.col_bounds) - 1


@dataclass
class EdgePresence:
    h_edges: np.ndarray  # (n_rows + 1, n_cols) bool
    v_edges: np.ndarray  # (n_rows, n_cols + 1) bool
    warnings: list[str] = field(default_factory=list)


@dataclass
class LogicalCell:
    row: int
    col: int
    rowspan: int = 1
    colspan: int = 1
    bbox: Rect | None = None
    text: str = ""

    @property
    def key(self) -> tuple[int, int, int, int]:
        return (self.row, self.col, self.rowspan, self.colspan)


@dataclass
class TableStructure:
    n_rows: int
    n_cols: int
    cells: list[LogicalCell]
    region_bbox: Rect | None = None
    warnings: list[str] = field(default_factory=list)

    def cell_keys(self) -> list[tuple[int, int, int, int]]:
        return [c.key for c in self.cells]

    def same_structure(self, other: "TableStructure") -> bool:
        return (self.n_rows == other.n_rows and self.n_cols == other.n_cols
                and sorted(self.cell_keys()) == sorted(other.cell_keys()))

    def occupancy(self) -> np.ndarray:
        """Lattice coverage count per unit; a valid structure is all ones."""
        occ = np.zeros((self.n_rows, self.n_cols), dtype=np.int64)
        for c in self.cells:
            occ[c.row:c.row + c.rowspan, c.col:c.col + c.colspan] += 1
        return occ

    def is_partition(self) -> bool:
        if any(c.row < 0 or c.col < 0 or c.rowspan < 1 or c.colspan < 1
               or c.row + c.rowspan > self.n_rows or c.col + c.colspan > self.n_cols
               for c in self.cells):
            return False
        return bool((self.occupancy() == 1).all())


def _region_segments(region: TableRegion, page: PageGraphics):
    hs, vs = page.h_segments, page.v_segments
    return [hs[i] for i in region.h_segments], [vs[j] for j in region.v_segments]


def build_grid(region: TableRegion, page: PageGraphics, tol: Tolerances = DEFAULT_TOL) -> Grid:
    if region.kind is not RegionKind.WIRED:
        raise DegenerateRegionError("only wired regions have a rule lattice")
    hs, vs = _region_segments(region, page)
    return grid_from_segments(hs, vs, tol)


def grid_from_segments(hs: list[Segment], vs: list[Segment], tol: Tolerances = DEFAULT_TOL) -> Grid:
    if len(hs) < 2 or len(vs) < 2:
        raise DegenerateRegionError("need at least two rules in each direction")
    pairs = intersection_pairs(hs, vs, tol)

    def bounds(segs, cross_idx):
        clusters = snap_1d([s.position for s in segs], tol.line_snap_tol)
        out = []
        for c in clusters:
            members = set(c.members)
            # distinct crossing points along this boundary
            pts = sorted(cross_idx(p) for p in pairs if p[0 if segs is hs else 1] in members)
            distinct = []
            for x in pts:
                if not distinct or x - distinct[-1] > tol.line_snap_tol:
                    distinct.append(x)
            if len(distinct) >= 2:
                out.append(c.canonical)
        return out

    rows = bounds(hs, lambda p: vs[p[1]].position)
    cols = bounds(vs, lambda p: hs[p[0]].position)
    if len(rows) < 2 or len(cols) < 2:
        raise DegenerateRegionError(
            f"region collapses to {len(rows)} row and {len(cols)} column boundaries")
    return Grid(rows, cols)


def _covered(segs: list[Segment], bound: float, lo: float, hi: float, tol: Tolerances) -> bool:
    need = tol.edge_cover_ratio * (hi - lo)
    for s in segs:
        if abs(s.position - bound) <= tol.line_snap_tol:
            if min(s.hi, hi) - max(s.lo, lo) >= need:
                return True
    return False


def compute_edges(grid: Grid, h_segments: list[Segment], v_segments: list[Segment],
                  tol: Tolerances = DEFAULT_TOL) -> EdgePresence:
    rb, cb = grid.row_bounds, grid.col_bounds
    nr, nc = grid.n_rows, grid.n_cols
    h = np.zeros((nr + 1, nc), dtype=bool)
    v = np.zeros((nr, nc + 1), dtype=bool)
    for i, y in enumerate(rb):
        near = [s for s in h_segments if abs(s.position - y) <= tol.line_snap_tol]
        for j in range(nc):
            h[i, j] = _covered(near, y, cb[j], cb[j + 1], tol)
    for j, x in enumerate(cb):
        near = [s for s in v_segments if abs(s.position - x) <= tol.line_snap_tol]
        for i in range(nr):
            v[i, j] = _covered(near, x, rb[i], rb[i + 1], tol)
    warnings = []
    missing = int((~h[0]).sum() + (~h[-1]).sum() + (~v[:, 0]).sum() + (~v[:, -1]).sum())
    if missing:
        warnings.append(f"synthesized {missing} missing outer border edge(s)")
        h[0, :] = h[-1, :] = True
        v[:, 0] = v[:, -1] = True
    return EdgePresence(h, v, warnings)


def merge_spans(grid: Grid, edges: EdgePresence) -> TableStructure:
    """Greedy row-major merge of lattice units across absent edges.

    Every cell comes out rectangular with all interior edges absent. Where
    the edge evidence describes a non-rectangular region, a warning names
    the cell at which it was repaired.
    """
    nr, nc = grid.n_rows, grid.n_cols
    h, v = edges.h_edges, edges.v_edges
    if h.shape != (nr + 1, nc) or v.shape != (nr, nc + 1):
        raise ValueError("edge matrices do not match grid dimensions")
    owner = np.full((nr, nc), -1, dtype=np.int64)
    cells: list[LogicalCell] = []
    warnings = list(edges.warnings)
    flagged: set[int] = set()

    def interior_clear(r, c, rs, cs):
        if cs > 1 and v[r:r + rs, c + 1:c + cs].any():
            return False
        if rs > 1 and h[r + 1:r + rs, c:c + cs].any():
            return False
        return True

    for r in range(nr):
        for c in range(nc):
            if owner[r, c] >= 0:
                continue
            cs = 1
            while c + cs < nc and not v[r, c + cs] and owner[r, c + cs] < 0:
                cs += 1
            rs = 1
            while (r + rs < nr and not h[r + rs, c:c + cs].any()
                   and (owner[r + rs, c:c + cs] < 0).all()):
                rs += 1
            idx = len(cells)
            if not interior_clear(r, c, rs, cs):
                while rs > 1 and not interior_clear(r, c, rs, cs):
                    rs -= 1
                flagged.add(idx)
            owner[r:r + rs, c:c + cs] = idx
            cells.append(LogicalCell(r, c, rs, cs, Rect(grid.col_bounds[c], grid.row_bounds[r],
                                                         grid.col_bounds[c + cs],
                                                         grid.row_bounds[r + rs])))

    # absent edges between two different cells mean the evidence was not rectangular
    for r in range(nr):
        for c in range(1, nc):
            if not v[r, c] and owner[r, c - 1] != owner[r, c]:
                flagged.add(int(min(owner[r, c - 1], owner[r, c])))
    for r in range(1, nr):
        for c in range(nc):
            if not h[r, c] and owner[r - 1, c] != owner[r, c]:
                flagged.add(int(min(owner[r - 1, c], owner[r, c])))
    for idx in sorted(flagged):
        warnings.append(f"non-rectangular merge repaired at ({cells[idx].row},{cells[idx].col})")

    return TableStructure(nr, nc, cells,
                          Rect(grid.col_bounds[0], grid.row_bounds[0],
                               grid.col_bounds[-1], grid.row_bounds[-1]),
                          warnings)


def extract_table(region: TableRegion, page: PageGraphics, tol: Tolerances = DEFAULT_TOL) -> TableStructure:
    hs, vs = _region_segments(region, page)
    grid = build_grid(region, page, tol)
    return merge_spans(grid, compute_edges(grid, hs, vs, tol))


def structure_from_segments(hs: list[Segment], vs: list[Segment], tol: Tolerances = DEFAULT_TOL) -> TableStructure:
    grid = grid_from_segments(hs, vs, tol)
    return merge_spans(grid, compute_edges(grid, hs, vs, tol))


def all_present(n_rows: int, n_cols: int) -> EdgePresence:
    return EdgePresence(np.ones((n_rows + 1, n_cols), dtype=bool),
                        np.ones((n_rows, n_cols + 1), dtype=bool))

