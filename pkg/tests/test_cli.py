import json
import sys
from pathlib import Path

import pytest
from pdf_fixtures import RECT_RULES, TRUNCATED, image_page_pdf, page_to_pdf

from gridlock.cli import main
from gridlock.emit import document_from_json
from gridlock.page_model import pif_load, pif_save
from gridlock.pdf import save_raster
from gridlock.synth import SynthParams, gen_table

TOOLS = Path(__file__).parent / "tools"
PDFIUM = f"{sys.executable} {TOOLS / 'pdfium_rasterizer.py'} {{input}} {{page}} {{dpi}} {{output}}"
FAIL = f"{sys.executable} {TOOLS / 'fake_rasterizer.py'} fail {{output}} {{input}} {{page}} {{dpi}}"


def write_pif(path, seed, **kw):
    truth, page, _ = gen_table(SynthParams(seed=seed, **kw))
    path.write_bytes(pif_save(page))
    return truth


def files(d):
    return sorted(p.name for p in Path(d).iterdir() if p.is_file())


def test_extract_pif_to_html(tmp_path, capsys):
    write_pif(tmp_path / "grid.pif", 0)
    out = tmp_path / "out"
    assert main(["extract", str(tmp_path / "grid.pif"), "--format", "html", "--out", str(out)]) == 0
    assert files(out) == ["grid.page0.html"]
    assert "<table>" in (out / "grid.page0.html").read_text()
    assert "pages=1 tables=1 warnings=0 failed=0" in capsys.readouterr().out


def test_corrupt_pdf_among_three(tmp_path, capsys):
    src = tmp_path / "in"
    src.mkdir()
    for seed in (1, 2):
        (src / f"t{seed}.pdf").write_bytes(page_to_pdf(gen_table(SynthParams(seed=seed)).page))
    (src / "broken.pdf").write_bytes(TRUNCATED)
    out = tmp_path / "out"
    assert main(["extract", str(src), "--out", str(out), "--format", "json"]) == 1
    assert files(out) == ["t1.page0.json", "t2.page0.json"]
    err = capsys.readouterr().err
    assert "broken.pdf" in err and "MalformedXrefError" in err


@pytest.mark.parametrize("argv", [
    ["extract", "x.pif", "--format", "xml"],
    ["extract"],
    ["extract", "does-not-exist.pif"],
    ["extract", "x.pif", "--jobs", "0"],
    ["nonsense"],
])
def test_usage_errors_exit_2(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    write_pif(tmp_path / "x.pif", 0)
    assert main(argv) == 2


def test_bad_config_and_template_exit_2(tmp_path, monkeypatch):
    write_pif(tmp_path / "x.pif", 0)
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("no_such_key = 1\n")
    assert main(["extract", str(tmp_path / "x.pif"), "--config", str(cfg), "--out", str(tmp_path)]) == 2
    monkeypatch.setenv("GRIDLOCK_RASTERIZER", "gs {input} {page} {dpi}")
    assert main(["extract", str(tmp_path / "x.pif"), "--out", str(tmp_path)]) == 2


def test_config_changes_results(tmp_path):
    truth = write_pif(tmp_path / "x.pif", 3)
    cfg = tmp_path / "coarse.cfg"
    # a snap tolerance wider than the smallest row fuses neighbouring boundaries
    cfg.write_text("line_snap_tol = 40\n")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["extract", str(tmp_path / "x.pif"), "--out", str(a), "--format", "json"]) == 0
    assert main(["extract", str(tmp_path / "x.pif"), "--out", str(b), "--format", "json",
                 "--config", str(cfg)]) == 0
    plain = document_from_json((a / "x.page0.json").read_bytes()).pages[0].tables[0]
    coarse = document_from_json((b / "x.page0.json").read_bytes()).pages[0].tables
    assert plain.same_structure(truth)
    assert not coarse or coarse[0].n_rows < truth.n_rows


def test_csv_output_and_multi_table_page(tmp_path):
    truth = write_pif(tmp_path / "x.pif", 4)
    out = tmp_path / "o"
    assert main(["extract", str(tmp_path / "x.pif"), "--out", str(out), "--format", "csv"]) == 0
    text = (out / "x.page0.csv").read_bytes().decode()
    assert text.count("\r\n") == truth.n_rows

    # two tables stacked on one page
    p1 = gen_table(SynthParams(seed=0, max_rows=3, max_cols=3, text_fill=False)).page
    bottom = max(s.position for s in p1.segments if s.is_horizontal)
    p2 = [type(s)(s.orientation, s.position + (bottom + 40 - 36 if s.is_horizontal else 0),
                  s.lo + (0 if s.is_horizontal else bottom + 40 - 36),
                  s.hi + (0 if s.is_horizontal else bottom + 40 - 36)) for s in p1.segments]
    p1.segments = p1.segments + p2
    (tmp_path / "two.pif").write_bytes(pif_save(p1))
    assert main(["extract", str(tmp_path / "two.pif"), "--out", str(out), "--format", "csv"]) == 0
    text = (out / "two.page0.csv").read_bytes().decode()
    assert "\r\n\r\n" in text and text.count("\r\n\r\n") == 1


def test_image_based_pdf_is_rasterized(tmp_path, monkeypatch, capsys):
    pytest.importorskip("pypdfium2")
    truth, _, raster = gen_table(SynthParams(seed=12, max_rows=5, max_cols=4))
    (tmp_path / "scan.pdf").write_bytes(image_page_pdf(raster.pixels))
    monkeypatch.setenv("GRIDLOCK_RASTERIZER", PDFIUM)
    out = tmp_path / "o"
    assert main(["extract", str(tmp_path / "scan.pdf"), "--out", str(out), "--format", "json"]) == 0
    doc = document_from_json((out / "scan.page0.json").read_bytes())
    (table,) = doc.pages[0].tables
    assert table.same_structure(truth)
    assert all(c.text == "" for c in table.cells)


def test_rasterizer_failure_falls_back_with_warning(tmp_path, monkeypatch, capsys):
    (tmp_path / "blank.pdf").write_bytes(image_page_pdf(gen_table(SynthParams(seed=1)).raster.pixels))
    monkeypatch.setenv("GRIDLOCK_RASTERIZER", FAIL)
    out = tmp_path / "o"
    assert main(["extract", str(tmp_path / "blank.pdf"), "--out", str(out), "--format", "json", "-v"]) == 0
    doc = document_from_json((out / "blank.page0.json").read_bytes())
    assert any("rasterization failed" in w for w in doc.pages[0].warnings)
    assert "warning" in capsys.readouterr().err


def test_png_input_and_digital_pdf(tmp_path):
    truth, page, raster = gen_table(SynthParams(seed=21, max_rows=4, max_cols=4))
    save_raster(raster, tmp_path / "img.png")
    (tmp_path / "doc.pdf").write_bytes(page_to_pdf(page))
    out = tmp_path / "o"
    assert main(["extract", str(tmp_path / "img.png"), str(tmp_path / "doc.pdf"),
                 "--out", str(out), "--format", "json"]) == 0
    img = document_from_json((out / "img.page0.json").read_bytes()).pages[0].tables[0]
    pdf = document_from_json((out / "doc.page0.json").read_bytes()).pages[0].tables[0]
    assert img.same_structure(truth) and pdf.same_structure(truth)
    assert [c.text for c in pdf.cells] == [c.text for c in truth.cells]


def test_same_stem_warns(tmp_path, capsys):
    truth, page, raster = gen_table(SynthParams(seed=21, max_rows=3, max_cols=3))
    save_raster(raster, tmp_path / "a.png")
    (tmp_path / "a.pif").write_bytes(pif_save(page))
    assert main(["extract", str(tmp_path / "a.png"), str(tmp_path / "a.pif"), "--out", str(tmp_path / "o")]) == 0
    assert "same output names" in capsys.readouterr().err


def test_extract_is_deterministic_across_runs_and_jobs(tmp_path):
    src = tmp_path / "in"
    src.mkdir()
    for seed in range(6):
        write_pif(src / f"p{seed}.pif", seed)
    (src / "multi.pdf").write_bytes(page_to_pdf(gen_table(SynthParams(seed=9)).page))
    outs = []
    for jobs, name in ((1, "a"), (1, "b"), (3, "c")):
        d = tmp_path / name
        assert main(["extract", str(src), "--out", str(d), "--format", "json", "--jobs", str(jobs)]) == 0
        outs.append({f: (d / f).read_bytes() for f in files(d)})
    assert outs[0] == outs[1] == outs[2] and len(outs[0]) == 7


def test_synth_command(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["synth", "--count", "5", "--seed", "0", "--out", str(a)]) == 0
    assert main(["synth", "--count", "5", "--seed", "0", "--out", str(b)]) == 0
    names = files(a)
    assert len([n for n in names if n.endswith(".pif")]) == 5
    assert len([n for n in names if n.endswith(".png")]) == 5
    assert len(files(a / "gt")) == 10
    for sub in ("", "gt"):
        for n in files(a / sub):
            assert (a / sub / n).read_bytes() == (b / sub / n).read_bytes()
    assert main(["synth", "--max-rows", "100", "--out", str(tmp_path / "c")]) == 2
    assert main(["synth", "--count", "0", "--out", str(tmp_path / "c")]) == 2
    assert main(["synth", "--count", "1", "--image-format", "pgm", "--out", str(tmp_path / "d")]) == 0
    assert (tmp_path / "d" / "synth_000000.pgm").exists()


def test_pif_dump(tmp_path, capsys):
    (tmp_path / "r.pdf").write_bytes(RECT_RULES)
    assert main(["pif-dump", str(tmp_path / "r.pdf")]) == 0
    dumped = capsys.readouterr().out
    page = pif_load(dumped)
    assert len(page.segments) == 4
    assert main(["pif-dump", str(tmp_path / "r.pdf"), "--page", "3"]) == 2
    # a PIF echoes back in normalized form
    loose = json.dumps(json.loads(dumped), indent=2, sort_keys=True)
    assert loose != dumped.strip()
    (tmp_path / "p.pif").write_text(loose)
    capsys.readouterr()
    assert main(["pif-dump", str(tmp_path / "p.pif")]) == 0
    assert capsys.readouterr().out == dumped


def test_evaluate(tmp_path, capsys):
    assert main(["synth", "--count", "4", "--out", str(tmp_path / "s")]) == 0
    gt = tmp_path / "s" / "gt"
    # the corpus dir holds a .pif and a .png per item; score the PIF results
    pred_pif = tmp_path / "pred_pif"
    assert main(["extract", *[str(p) for p in sorted((tmp_path / "s").glob("*.pif"))],
                 "--out", str(pred_pif), "--format", "json"]) == 0
    capsys.readouterr()
    report = tmp_path / "r.json"
    assert main(["evaluate", str(pred_pif), str(gt), "--report", str(report)]) == 0
    r = json.loads(report.read_text())
    assert r["f1"] == 1.0 and r["teds_struct"] == 1.0 and r["teds"] == 1.0 and r["items"] == 4
    assert "f1" in capsys.readouterr().out

    # mutate one prediction: drop a span so the table no longer matches
    victim = sorted(pred_pif.glob("*.json"))[0]
    doc = json.loads(victim.read_text())
    cells = doc["pages"][0]["cells"][0]["table"]["cells"]
    cells[0]["colspan"] = cells[0]["colspan"] + 1
    victim.write_text(json.dumps(doc))
    assert main(["evaluate", str(pred_pif), str(gt), "--report", str(report), "--metric", "prf"]) == 0
    r = json.loads(report.read_text())
    assert r["f1"] < 1.0 and "teds" not in r

    victim.unlink()
    assert main(["evaluate", str(pred_pif), str(gt)]) == 1
    assert "missing prediction" in capsys.readouterr().err
    assert main(["evaluate", str(pred_pif), str(gt), "--allow-missing"]) == 0

    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["evaluate", str(pred_pif), str(empty)]) == 2
