"""Axis-aligned primitives shared by the whole pipeline.

Coordinates are page points (1/72 inch) with the origin at the top-left
corner and y growing downward. PDF user space is flipped on ingestion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence


class InvalidInputError(ValueError):
    """Raised when an operation's precondition is violated."""


class Orientation(str, Enum):
    H = "h"
    V = "v"


@dataclass(frozen=True)
class Point:
    x: float
    y: float


@dataclass(frozen=True, order=True)
class Segment:
    """A straight rule. ``position`` is y for horizontal, x for vertical."""

    orientation: Orientation
    position: float
    lo: float
    hi: float

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def is_horizontal(self) -> bool:
        return self.orientation is Orientation.H

    def bbox(self) -> "Rect":
        if self.is_horizontal:
            return Rect(self.lo, self.position, self.hi, self.position)
        return Rect(self.position, self.lo, self.position, self.hi)


@dataclass(frozen=True)
class Rect:
    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return max(self.width, 0.0) * max(self.height, 0.0)

    @property
    def center(self) -> Point:
        return Point((self.x0 + self.x1) / 2, (self.y0 + self.y1) / 2)

    def as_list(self) -> list[float]:
        return [self.x0, self.y0, self.x1, self.y1]

    def contains_point(self, x: float, y: float, pad: float = 0.0) -> bool:
        return (self.x0 - pad <= x <= self.x1 + pad
                and self.y0 - pad <= y <= self.y1 + pad)

    def union(self, other: "Rect") -> "Rect":
        return Rect(min(self.x0, other.x0), min(self.y0, other.y0),
                    max(self.x1, other.x1), max(self.y1, other.y1))

    def intersects(self, other: "Rect", pad: float = 0.0) -> bool:
        return (self.x0 - pad <= other.x1 and other.x0 - pad <= self.x1
                and self.y0 - pad <= other.y1 and other.y0 - pad <= self.y1)


def hull(rects: Iterable[Rect]) -> Rect:
    it = iter(rects)
    out = next(it)
    for r in it:
        out = out.union(r)
    return out


@dataclass(frozen=True)
class Tolerances:
    line_snap_tol: float = 2.0
    edge_cover_ratio: float = 0.8
    join_tol: float = 3.0
    overlap_frac: float = 0.5

    def __post_init__(self):
        for name in ("line_snap_tol", "edge_cover_ratio", "join_tol", "overlap_frac"):
            v = getattr(self, name)
            if not (v > 0) or not math.isfinite(v):
                raise InvalidInputError(f"{name} must be positive, got {v!r}")
        if self.edge_cover_ratio > 1 or self.overlap_frac > 1:
            raise InvalidInputError("ratios must be <= 1")


DEFAULT_TOL = Tolerances()


def rect_iou(a: Rect, b: Rect) -> float:
    iw = min(a.x1, b.x1) - max(a.x0, b.x0)
    ih = min(a.y1, b.y1) - max(a.y0, b.y0)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    if union <= 0:
        return 0.0
    return min(1.0, inter / union)


@dataclass
class Cluster:
    canonical: float
    members: list[int] = field(default_factory=list)


def snap_1d(values: Sequence[float], tol: float) -> list[Cluster]:
    """Single-linkage clustering of 1-D values with gap threshold ``tol``.

    Returns clusters in ascending order; ``canonical`` is the member mean.
    """
    if len(values) == 0:
        raise InvalidInputError("snap_1d needs at least one value")
    order = sorted(range(len(values)), key=lambda i: (values[i], i))
    clusters: list[list[int]] = [[order[0]]]
    for prev, cur in zip(order, order[1:]):
        if values[cur] - values[prev] <= tol:
            clusters[-1].append(cur)
        else:
            clusters.append([cur])
    return [Cluster(math.fsum(values[i] for i in c) / len(c), sorted(c)) for c in clusters]


def _mergeable(a: Segment, b: Segment, tol: Tolerances) -> bool:
    if abs(a.position - b.position) > tol.line_snap_tol:
        return False
    gap = max(a.lo, b.lo) - min(a.hi, b.hi)
    return gap <= tol.join_tol


def merge_collinear(segments: Sequence[Segment], tol: Tolerances = DEFAULT_TOL) -> list[Segment]:
    """Merge same-orientation segments that are near-collinear and touching.

    Runs to a fixpoint: merged segments take the mean position of all the
    input segments they absorbed and the hull of their intervals.
    """
    if not segments:
        return []
    orient = segments[0].orientation
    if any(s.orientation is not orient for s in segments):
        raise InvalidInputError("merge_collinear got mixed orientations")

    groups = [[s] for s in segments]
    current = list(segments)
    while True:
        n = len(current)
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        order = sorted(range(n), key=lambda i: current[i].position)
        changed = False
        for a_idx, i in enumerate(order):
            si = current[i]
            for j in order[a_idx + 1:]:
                sj = current[j]
                if sj.position - si.position > tol.line_snap_tol:
                    break
                if _mergeable(si, sj, tol):
                    ri, rj = find(i), find(j)
                    if ri != rj:
                        parent[max(ri, rj)] = min(ri, rj)
                        changed = True
        if not changed:
            break
        buckets: dict[int, list[int]] = {}
        for i in range(n):
            buckets.setdefault(find(i), []).append(i)
        new_groups, new_current = [], []
        for idxs in buckets.values():
            members = [m for i in idxs for m in groups[i]]
            new_groups.append(members)
            new_current.append(Segment(
                orient,
                math.fsum(m.position for m in members) / len(members),
                min(m.lo for m in members),
                max(m.hi for m in members),
            ))
        groups, current = new_groups, new_current
    return sorted(current, key=lambda s: (s.position, s.lo, s.hi))


def shifted(seg: Segment, dx: float, dy: float) -> Segment:
    if seg.is_horizontal:
        return replace(seg, position=seg.position + dy, lo=seg.lo + dx, hi=seg.hi + dx)
    return replace(seg, position=seg.position + dx, lo=seg.lo + dy, hi=seg.hi + dy)
