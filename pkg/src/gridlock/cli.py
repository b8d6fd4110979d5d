"""Command-line entry point: extract, evaluate, synth, pif-dump."""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .config import Config, load_config
from .emit import (CellKind, DocumentOutput, PageOutput, PdfCell, document_to_json, page_to_html,
                   table_to_csv)
from .geometry import InvalidInputError
from .metrics.evaluate import evaluate_dirs, report_json
from .page_model import PageGraphics, PifError, pif_load, pif_save
from .pdf import (ExternalToolError, PdfError, RasterizerConfig, extract_page_detail, load_raster,
                  open_pdf, rasterize_page, save_raster)
from .pipeline import analyze_page, raster_to_page
from .raster_lines import ConfigError
from .synth import SynthParams, gen_table

PDF_SUFFIXES = {".pdf"}
IMAGE_SUFFIXES = {".png", ".pgm", ".ppm", ".pbm", ".tif", ".tiff", ".jpg", ".jpeg", ".bmp"}
PIF_SUFFIXES = {".pif", ".json"}

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# -- page sources ---------------------------------------------------------------


@dataclass
class PageJob:
    path: str
    kind: str  # "pdf" | "image" | "pif"
    page: int
    dpi: float | None
    deskew: bool
    cfg: Config
    template: str


@dataclass
class PageResult:
    path: str
    page: int
    output: PageOutput | None = None
    pif: PageGraphics | None = None
    error: str | None = None
    notes: list[str] = field(default_factory=list)


def _kind(path: Path) -> str | None:
    suf = path.suffix.lower()
    if suf in PDF_SUFFIXES:
        return "pdf"
    if suf in IMAGE_SUFFIXES:
        return "image"
    if suf == ".pif":
        return "pif"
    return None


def expand_inputs(inputs) -> list[Path]:
    out = []
    for raw in inputs:
        p = Path(raw)
        if p.is_dir():
            out.extend(sorted(c for c in p.iterdir() if c.is_file() and _kind(c)))
        elif p.exists():
            out.append(p)
        else:
            raise UsageError(f"no such file or directory: {raw}")
    return out


def page_graphics_for(job: PageJob) -> tuple[PageGraphics, list, list[str]]:
    """Primitives for one page, plus image boxes and notes."""
    cfg = job.cfg
    if job.kind == "pif":
        return pif_load(Path(job.path).read_bytes()), [], []
    if job.kind == "image":
        raster = load_raster(job.path, job.dpi)
        rr = raster_to_page(raster, cfg, job.page, job.deskew)
        return rr.page, [], rr.warnings
    doc = open_pdf(Path(job.path).read_bytes())
    ext = extract_page_detail(doc, job.page, cfg.thin_rule_pt, cfg.tj_split_em)
    notes = list(ext.warnings)
    page = ext.page
    images = [(box, f"{Path(job.path).stem}.page{job.page}.image{k}") for k, box in enumerate(ext.images)]
    if not page.text_spans and not page.segments:
        # nothing vector to work with: treat as a scanned page
        rcfg = RasterizerConfig(job.template, job.dpi or cfg.dpi)
        try:
            raster = rasterize_page(job.path, job.page, rcfg)
        except ExternalToolError as exc:
            notes.append(f"page looks image-based but rasterization failed: {exc}")
        else:
            rr = raster_to_page(raster, cfg, job.page, job.deskew)
            notes.extend(rr.warnings)
            page = rr.page
    return page, images, notes


def run_job(job: PageJob) -> PageResult:
    res = PageResult(job.path, job.page)
    try:
        page, images, notes = page_graphics_for(job)
        res.pif = page
        res.output = analyze_page(page, job.cfg, images, notes)
    except (PdfError, PifError, ExternalToolError, ConfigError, InvalidInputError, OSError, ValueError,
            IndexError) as exc:
        res.error = f"{type(exc).__name__}: {exc}"
    return res


def _page_count(path: Path, kind: str) -> int:
    if kind == "pdf":
        return open_pdf(path.read_bytes()).page_count
    return 1


def render(out: PageOutput, fmt: str) -> bytes:
    if fmt == "html":
        return page_to_html(out).encode("utf-8")
    if fmt == "csv":
        # several tables on a page are separated by one empty line
        return "\r\n".join(table_to_csv(t) for t in out.tables).encode("utf-8")
    return document_to_json(DocumentOutput([out]))


def _resolve_config(args) -> Config:
    return load_config(args.config) if args.config else Config()


def _run_jobs(jobs: list[PageJob], n_jobs: int) -> list[PageResult]:
    if n_jobs <= 1 or len(jobs) <= 1:
        return [run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        # map keeps submission order, so output assembly is deterministic
        return list(pool.map(run_job, jobs, chunksize=1))


# -- subcommands ------------------------------------------------------------------


def cmd_extract(args) -> int:
    cfg = _resolve_config(args)
    if args.dpi is not None and not args.dpi > 0:
        raise UsageError("--dpi must be positive")
    template = os.environ.get("GRIDLOCK_RASTERIZER") or RasterizerConfig().template
    RasterizerConfig(template, args.dpi or cfg.dpi)  # validate before any work
    files = expand_inputs(args.inputs)
    if not files:
        raise UsageError("no input files")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    failed = 0
    jobs: list[PageJob] = []
    for f in files:
        kind = _kind(f)
        if kind is None:
            print(f"{f}: unsupported input type", file=sys.stderr)
            failed += 1
            continue
        try:
            n = _page_count(f, kind)
        except (PdfError, OSError) as exc:
            print(f"{f}: {type(exc).__name__}: {exc}", file=sys.stderr)
            failed += 1
            continue
        jobs.extend(PageJob(str(f), kind, i, args.dpi, not args.no_deskew, cfg, template) for i in range(n))

    stems: dict[str, str] = {}
    for f in files:
        prev = stems.setdefault(f.stem, str(f))
        if prev != str(f):
            print(f"warning: {f} and {prev} write to the same output names; the later one wins",
                  file=sys.stderr)

    n_pages = n_tables = n_warn = 0
    for res in _run_jobs(jobs, args.jobs):
        if res.error:
            print(f"{res.path}: page {res.page}: {res.error}", file=sys.stderr)
            failed += 1
            continue
        n_pages += 1
        n_tables += len(res.output.tables)
        n_warn += len(res.output.warnings)
        if args.verbose:
            for w in res.output.warnings:
                print(f"{res.path}: page {res.page}: warning: {w}", file=sys.stderr)
        target = out_dir / f"{Path(res.path).stem}.page{res.page}.{args.format}"
        target.write_bytes(render(res.output, args.format))
    print(f"pages={n_pages} tables={n_tables} warnings={n_warn} failed={failed}")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_evaluate(args) -> int:
    metrics = ("teds", "teds-struct", "prf") if args.metric == "all" else (args.metric,)
    pred, gt = Path(args.pred_dir), Path(args.gt_dir)
    for d in (pred, gt):
        if not d.is_dir():
            raise UsageError(f"not a directory: {d}")
    if not any(p.suffix in (".json", ".html") for p in gt.iterdir()):
        raise UsageError(f"ground-truth directory {gt} has no .json or .html files")
    iou = 0.5
    if args.config:
        iou = load_config(args.config).iou_thresh
    report, missing_pred, missing_gt = evaluate_dirs(pred, gt, metrics, iou)
    for stem in missing_pred:
        print(f"missing prediction: {stem}", file=sys.stderr)
    for stem in missing_gt:
        print(f"prediction without ground truth: {stem}", file=sys.stderr)
    print(report.summary())
    if args.report:
        Path(args.report).write_text(report_json(report) + "\n", encoding="utf-8")
    if (missing_pred or missing_gt) and not args.allow_missing:
        return EXIT_FAIL
    return EXIT_OK


def synth_stem(seed: int) -> str:
    return f"synth_{seed:06d}"


def cmd_synth(args) -> int:
    out = Path(args.out)
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    base = SynthParams(seed=args.seed, max_rows=args.max_rows, max_cols=args.max_cols,
                       merge_prob=args.merge_prob, skew_deg=args.skew, dpi=args.dpi,
                       text_fill=not args.no_text, noise_sigma=args.noise)
    base.check()
    (out / "gt").mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        seed = args.seed + i
        item = gen_table(SynthParams(**{**base.__dict__, "seed": seed}))
        stem = synth_stem(seed)
        (out / f"{stem}.pif").write_bytes(pif_save(item.page))
        save_raster(item.raster, out / f"{stem}.{args.image_format}")
        page_out = PageOutput(0, [PdfCell(CellKind.TABLE, item.truth.region_bbox, item.truth)])
        (out / "gt" / f"{stem}.page0.html").write_bytes(render(page_out, "html"))
        (out / "gt" / f"{stem}.page0.json").write_bytes(render(page_out, "json"))
    print(f"wrote {args.count} item(s) to {out}")
    return EXIT_OK


def cmd_pif_dump(args) -> int:
    path = Path(args.input)
    if not path.is_file():
        raise UsageError(f"no such file: {path}")
    kind = _kind(path) or ("pif" if path.suffix.lower() in PIF_SUFFIXES else None)
    if kind is None:
        raise UsageError(f"unsupported input type: {path}")
    n = _page_count(path, kind)
    if not 0 <= args.page < n:
        raise UsageError(f"page {args.page} out of range; {path} has {n} page(s)")
    cfg = _resolve_config(args)
    template = os.environ.get("GRIDLOCK_RASTERIZER") or RasterizerConfig().template
    page, _, notes = page_graphics_for(PageJob(str(path), kind, args.page, args.dpi,
                                               not args.no_deskew, cfg, template))
    for w in notes:
        print(f"warning: {w}", file=sys.stderr)
    sys.stdout.write(pif_save(page).decode("utf-8") + "\n")
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gridlock", description="Wired-table extraction from PDFs and page images.")
    p.add_argument("--version", action="version", version=f"gridlock {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("extract", help="extract tables from PDF, image or PIF inputs")
    e.add_argument("inputs", nargs="+")
    e.add_argument("--format", choices=("html", "csv", "json"), default="html")
    e.add_argument("--out", default=".")
    e.add_argument("--dpi", type=float, default=None, help="raster resolution (default: config dpi)")
    e.add_argument("--no-deskew", action="store_true")
    e.add_argument("--config", help="key=value file overriding thresholds")
    e.add_argument("--jobs", type=int, default=1, help="page-level worker processes")
    e.add_argument("-v", "--verbose", action="store_true", help="print per-page warnings")
    e.set_defaults(func=cmd_extract)

    v = sub.add_parser("evaluate", help="score predictions against ground truth")
    v.add_argument("pred_dir")
    v.add_argument("gt_dir")
    v.add_argument("--metric", choices=("teds", "teds-struct", "prf", "all"), default="all")
    v.add_argument("--allow-missing", action="store_true")
    v.add_argument("--report", help="write the JSON report here")
    v.add_argument("--config")
    v.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("synth", help="generate synthetic wired tables")
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="synth")
    s.add_argument("--max-rows", type=int, default=12)
    s.add_argument("--max-cols", type=int, default=8)
    s.add_argument("--merge-prob", type=float, default=0.3)
    s.add_argument("--skew", type=float, default=0.0, help="raster rotation in degrees")
    s.add_argument("--dpi", type=float, default=150.0)
    s.add_argument("--noise", type=float, default=0.0, help="Gaussian pixel noise sigma")
    s.add_argument("--no-text", action="store_true")
    s.add_argument("--image-format", choices=("png", "pgm"), default="png")
    s.set_defaults(func=cmd_synth)

    d = sub.add_parser("pif-dump", help="print the PIF of one page")
    d.add_argument("input")
    d.add_argument("--page", type=int, default=0)
    d.add_argument("--dpi", type=float, default=None)
    d.add_argument("--no-deskew", action="store_true")
    d.add_argument("--config")
    d.set_defaults(func=cmd_pif_dump)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be at least 1")
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, InvalidInputError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except PdfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
