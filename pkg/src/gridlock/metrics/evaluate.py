"""Corpus evaluation: pairs prediction/ground-truth files and aggregates metrics."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from statistics import fmean

from ..emit import document_from_json
from ..linecell import TableStructure
from .prf import PRF, match_tables, table_prf
from .teds import teds, teds_struct
from .tree import parse_table_html, structure_to_tree, tree_to_structure

_TABLE_RE = re.compile(r"<table\b.*?</table\s*>", re.IGNORECASE | re.DOTALL)
SUFFIXES = (".json", ".html")


@dataclass
class ItemScore:
    name: str
    teds: float | None
    teds_struct: float | None
    prf: PRF


@dataclass
class EvalReport:
    items: list[ItemScore] = field(default_factory=list)
    totals: PRF = field(default_factory=PRF)
    metrics: tuple[str, ...] = ("teds", "teds-struct", "prf")

    @property
    def mean_teds(self) -> float | None:
        vals = [i.teds for i in self.items if i.teds is not None]
        return fmean(vals) if vals else None

    @property
    def mean_teds_struct(self) -> float | None:
        vals = [i.teds_struct for i in self.items if i.teds_struct is not None]
        return fmean(vals) if vals else None

    def to_dict(self) -> dict:
        t = self.totals
        d = {"items": len(self.items), "metrics": list(self.metrics)}
        if "teds" in self.metrics:
            d["teds"] = self.mean_teds
        if "teds-struct" in self.metrics:
            d["teds_struct"] = self.mean_teds_struct
        if "prf" in self.metrics:
            d.update(precision=t.precision, recall=t.recall, f1=t.f1,
                     cell_precision=t.cell_precision, cell_recall=t.cell_recall,
                     n_pred=t.n_pred, n_gt=t.n_gt, n_correct=t.n_correct)
        d["per_item"] = [
            {"name": i.name, "teds": i.teds, "teds_struct": i.teds_struct,
             "n_pred": i.prf.n_pred, "n_gt": i.prf.n_gt, "n_correct": i.prf.n_correct}
            for i in self.items
        ]
        return d

    def summary(self) -> str:
        d = self.to_dict()
        lines = [f"{'items':<15}{d['items']}"]
        for key in ("teds", "teds_struct", "precision", "recall", "f1", "cell_precision", "cell_recall"):
            if key in d and d[key] is not None:
                lines.append(f"{key:<15}{d[key]:.4f}")
        if "n_pred" in d:
            lines.append(f"{'tables':<15}pred={d['n_pred']} gt={d['n_gt']} correct={d['n_correct']}")
        return "\n".join(lines)


def load_tables(path: Path) -> list[TableStructure]:
    data = Path(path).read_text(encoding="utf-8")
    if path.suffix == ".json":
        doc = document_from_json(data)
        return [t for page in doc.pages for t in page.tables]
    return [tree_to_structure(parse_table_html(m.group(0))) for m in _TABLE_RE.finditer(data)]


def score_item(name: str, pred: list[TableStructure], gt: list[TableStructure],
               metrics=("teds", "teds-struct", "prf"), iou_thresh: float = 0.5) -> ItemScore:
    pairs = match_tables(pred, gt, iou_thresh)
    slots = max(len(pred), len(gt))
    t_val = s_val = None
    if slots and ("teds" in metrics or "teds-struct" in metrics):
        t_sum = s_sum = 0.0
        for i, j in pairs:
            a, b = structure_to_tree(pred[i]), structure_to_tree(gt[j])
            if "teds" in metrics:
                t_sum += teds(a, b)
            if "teds-struct" in metrics:
                s_sum += teds_struct(a, b)
        t_val = t_sum / slots if "teds" in metrics else None
        s_val = s_sum / slots if "teds-struct" in metrics else None
    return ItemScore(name, t_val, s_val, table_prf(pred, gt, iou_thresh))


def pair_files(pred_dir: Path, gt_dir: Path):
    """Match files by stem. Returns (pairs, missing_pred, missing_gt)."""

    def index(d):
        out = {}
        for p in sorted(Path(d).iterdir()):
            if p.is_file() and p.suffix in SUFFIXES:
                # prefer JSON (it carries region boxes) when both exist
                if p.stem not in out or p.suffix == ".json":
                    out[p.stem] = p
        return out

    pi, gi = index(pred_dir), index(gt_dir)
    pairs = [(stem, pi[stem], gi[stem]) for stem in sorted(pi.keys() & gi.keys())]
    return pairs, sorted(gi.keys() - pi.keys()), sorted(pi.keys() - gi.keys())


def evaluate_dirs(pred_dir: Path, gt_dir: Path, metrics=("teds", "teds-struct", "prf"),
                  iou_thresh: float = 0.5) -> tuple[EvalReport, list[str], list[str]]:
    pairs, missing_pred, missing_gt = pair_files(pred_dir, gt_dir)
    report = EvalReport(metrics=tuple(metrics))
    for stem, pp, gp in pairs:
        item = score_item(stem, load_tables(pp), load_tables(gp), metrics, iou_thresh)
        report.items.append(item)
        report.totals = report.totals + item.prf
    # a ground-truth file without a prediction still counts its tables as missed
    for stem in missing_pred:
        gt = load_tables(Path(gt_dir) / f"{stem}.json") if (Path(gt_dir) / f"{stem}.json").exists() \
            else load_tables(Path(gt_dir) / f"{stem}.html")
        item = score_item(stem, [], gt, metrics, iou_thresh)
        report.items.append(item)
        report.totals = report.totals + item.prf
    return report, missing_pred, missing_gt


def report_json(report: EvalReport) -> str:
    return json.dumps(report.to_dict(), indent=2)
