"""Table-level and cell-level precision / recall / F1."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from ..geometry import rect_iou
from ..linecell import TableStructure


def f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


@dataclass
class PRF:
    n_pred: int = 0
    n_gt: int = 0
    n_correct: int = 0
    n_pred_cells: int = 0
    n_gt_cells: int = 0
    n_matched_cells: int = 0

    def __add__(self, other: "PRF") -> "PRF":
        return PRF(*(a + b for a, b in zip(self.astuple(), other.astuple())))

    def astuple(self):
        return (self.n_pred, self.n_gt, self.n_correct,
                self.n_pred_cells, self.n_gt_cells, self.n_matched_cells)

    @property
    def precision(self) -> float:
        return self.n_correct / self.n_pred if self.n_pred else 0.0

    @property
    def recall(self) -> float:
        return self.n_correct / self.n_gt if self.n_gt else 0.0

    @property
    def f1(self) -> float:
        return f1(self.precision, self.recall)

    @property
    def cell_precision(self) -> float:
        return self.n_matched_cells / self.n_pred_cells if self.n_pred_cells else 0.0

    @property
    def cell_recall(self) -> float:
        return self.n_matched_cells / self.n_gt_cells if self.n_gt_cells else 0.0


def match_tables(pred: list[TableStructure], gt: list[TableStructure], iou_thresh: float = 0.5):
    """Greedy one-to-one pairing by region IoU, best pairs first.

    When any table lacks a region bbox, tables are paired by position in
    their lists instead.
    """
    if any(t.region_bbox is None for t in pred + gt):
        return [(i, i) for i in range(min(len(pred), len(gt)))]
    cand = []
    for i, p in enumerate(pred):
        for j, g in enumerate(gt):
            iou = rect_iou(p.region_bbox, g.region_bbox)
            if iou >= iou_thresh:
                cand.append((-iou, i, j))
    cand.sort()
    used_p, used_g, out = set(), set(), []
    for _, i, j in cand:
        if i in used_p or j in used_g:
            continue
        used_p.add(i)
        used_g.add(j)
        out.append((i, j))
    return sorted(out)


def table_prf(pred: list[TableStructure], gt: list[TableStructure], iou_thresh: float = 0.5) -> PRF:
    out = PRF(len(pred), len(gt), 0,
              sum(len(t.cells) for t in pred), sum(len(t.cells) for t in gt), 0)
    for i, j in match_tables(pred, gt, iou_thresh):
        p, g = pred[i], gt[j]
        if p.same_structure(g):
            out.n_correct += 1
        common = Counter(p.cell_keys()) & Counter(g.cell_keys())
        out.n_matched_cells += sum(common.values())
    return out
