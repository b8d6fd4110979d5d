"""External rasterizer invocation and page-image loading."""

from __future__ import annotations

import os
import shlex
import string
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..page_model import RasterPage
from ..raster_lines import ConfigError

# Ghostscript-compatible; {page} is 1-based as gs expects
DEFAULT_TEMPLATE = ("gs -q -dNOPAUSE -dBATCH -dSAFER -sDEVICE=pnggray -r{dpi} "
                    "-dFirstPage={page} -dLastPage={page} -sOutputFile={output} {input}")
PLACEHOLDERS = frozenset({"input", "page", "dpi", "output"})
ENV_VAR = "GRIDLOCK_RASTERIZER"


class ExternalToolError(RuntimeError):
    def __init__(self, message: str, stderr: str = "", returncode: int | None = None):
        super().__init__(message + (f"\n{stderr.strip()}" if stderr.strip() else ""))
        self.stderr = stderr
        self.returncode = returncode


@dataclass(frozen=True)
class RasterizerConfig:
    template: str = DEFAULT_TEMPLATE
    dpi: float = 150.0

    def __post_init__(self):
        try:
            fields = {f for _, f, _, _ in string.Formatter().parse(self.template) if f is not None}
        except ValueError as exc:
            raise ConfigError(f"rasterizer template is malformed: {exc}") from None
        missing = PLACEHOLDERS - fields
        if missing:
            raise ConfigError("rasterizer template lacks placeholder(s): "
                              + ", ".join("{" + m + "}" for m in sorted(missing)))
        unknown = fields - PLACEHOLDERS
        if unknown:
            raise ConfigError("rasterizer template has unknown placeholder(s): "
                              + ", ".join("{" + m + "}" for m in sorted(unknown)))
        if not self.dpi > 0:
            raise ConfigError("dpi must be positive")

    @classmethod
    def from_env(cls, dpi: float = 150.0) -> "RasterizerConfig":
        return cls(os.environ.get(ENV_VAR) or DEFAULT_TEMPLATE, dpi)


def load_raster(path, dpi: float | None = None) -> RasterPage:
    """Load a PNG/PGM (or any Pillow-readable image) as a grayscale page.

    Without an explicit ``dpi`` the file's own resolution tag is used,
    falling back to 150.
    """
    try:
        with Image.open(path) as im:
            if dpi is None:
                tag = im.info.get("dpi")
                # PNG stores pixels per metre; round off the conversion error
                dpi = round(float(tag[0]), 1) if tag and tag[0] else 150.0
            pixels = np.asarray(im.convert("L"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError) as exc:
        raise ExternalToolError(f"cannot read image {path}: {exc}") from None
    return RasterPage(pixels.copy(), dpi)


def save_raster(page: RasterPage, path) -> None:
    path = Path(path)
    im = Image.fromarray(page.pixels, mode="L")
    if path.suffix.lower() == ".pgm":
        im.save(path, format="PPM")
    else:
        im.save(path, format="PNG", dpi=(page.dpi, page.dpi))


def rasterize_page(pdf_path, page: int, cfg: RasterizerConfig, timeout: float = 300.0) -> RasterPage:
    """Render 0-based ``page`` of ``pdf_path`` with the configured command."""
    with tempfile.TemporaryDirectory(prefix="gridlock-") as tmp:
        out = Path(tmp) / "page.png"
        dpi = int(cfg.dpi) if float(cfg.dpi).is_integer() else cfg.dpi
        cmd = cfg.template.format(input=shlex.quote(str(pdf_path)), page=page + 1, dpi=dpi,
                                  output=shlex.quote(str(out)))
        try:
            proc = subprocess.run(shlex.split(cmd), capture_output=True, timeout=timeout)
        except FileNotFoundError as exc:
            raise ExternalToolError(f"rasterizer not found: {exc.filename}") from None
        except subprocess.TimeoutExpired:
            raise ExternalToolError(f"rasterizer timed out after {timeout}s") from None
        stderr = proc.stderr.decode("utf-8", "replace")
        if proc.returncode != 0:
            raise ExternalToolError(f"rasterizer exited with status {proc.returncode}", stderr, proc.returncode)
        if not out.exists():
            raise ExternalToolError("rasterizer produced no output file", stderr, proc.returncode)
        return load_raster(out, cfg.dpi)
