"""Flat ``key = value`` configuration covering every tunable threshold."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .geometry import InvalidInputError, Tolerances
from .raster_lines import ConfigError


@dataclass(frozen=True)
class Config:
    # geometry tolerances (page units / fractions)
    line_snap_tol: float = 2.0
    edge_cover_ratio: float = 0.8
    join_tol: float = 3.0
    overlap_frac: float = 0.5
    # raster rule extraction
    binarize_window: int = 31
    binarize_offset: int = 10
    min_len_frac: float = 0.04
    short_rule_frac: float = 0.25
    dpi: float = 150.0
    # deskew
    deskew_coarse_step: float = 1.0
    deskew_fine_step: float = 0.1
    deskew_min_angle: float = 0.05
    # digital PDF text
    thin_rule_pt: float = 3.0
    tj_split_em: float = 0.5
    newline_ratio: float = 0.6
    para_line_gap_ratio: float = 0.5
    para_gap_ratio: float = 1.5
    para_min_x_overlap: float = 0.5
    # evaluation
    iou_thresh: float = 0.5

    @property
    def tol(self) -> Tolerances:
        return Tolerances(self.line_snap_tol, self.edge_cover_ratio, self.join_tol, self.overlap_frac)

    def check(self) -> "Config":
        try:
            self.tol
        except InvalidInputError as exc:
            raise ConfigError(str(exc)) from None
        if self.binarize_window < 1 or self.binarize_window % 2 == 0:
            raise ConfigError("binarize_window must be odd and positive")
        positive = ("min_len_frac", "dpi", "deskew_coarse_step", "deskew_fine_step",
                    "thin_rule_pt", "tj_split_em", "newline_ratio", "para_line_gap_ratio",
                    "para_gap_ratio")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if not 0 < self.min_len_frac <= 1:
            raise ConfigError("min_len_frac must lie in (0, 1]")
        if not 0 <= self.iou_thresh <= 1 or not 0 <= self.para_min_x_overlap <= 1:
            raise ConfigError("iou_thresh and para_min_x_overlap must lie in [0, 1]")
        if not 0 <= self.short_rule_frac <= 1:
            raise ConfigError("short_rule_frac must lie in [0, 1]")
        if self.deskew_min_angle < 0:
            raise ConfigError("deskew_min_angle must be non-negative")
        return self


KEYS = {f.name: f.type for f in fields(Config)}


def parse_config(text: str, base: Config | None = None) -> Config:
    """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys are errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = int(val) if KEYS[key] in ("int", int) else float(val)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} needs a number, got {val!r}") from None
    return replace(base or Config(), **values).check()


def load_config(path) -> Config:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
