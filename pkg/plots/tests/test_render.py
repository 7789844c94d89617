"""Rendering contracts: schema guards, file output, extrema fidelity."""

import csv
from pathlib import Path

import pytest

from vscstab_plots import FigureSpec, SchemaError, render
from vscstab_plots.render import main_locus, main_sweep, main_trace

DATA = Path(__file__).resolve().parent.parent / "sample_data"


def csv_extrema(path, xcol, ycol, group=None):
    """Column extrema straight from the file, optionally per group value."""
    spans = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            if row[ycol] == "":
                continue
            key = row[group] if group else "all"
            x, y = float(row[xcol]), float(row[ycol])
            if key not in spans:
                spans[key] = [x, x, y, y]
            s = spans[key]
            s[0], s[1] = min(s[0], x), max(s[1], x)
            s[2], s[3] = min(s[2], y), max(s[3], y)
    return spans


# ---------------------------------------------------------------------------
# schema guards

def test_missing_column_named(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("f_hz,re,curve\n1,2,x\n")
    spec = FigureSpec(csv_paths=(str(bad),), kind="locus",
                      out_path=str(tmp_path / "o.png"))
    with pytest.raises(SchemaError, match="'im'"):
        render(spec)


def test_empty_sweep_is_an_error(tmp_path):
    empty = tmp_path / "sweep.csv"
    empty.write_text(
        "param,value,method,stable,winding_p,winding_n,iop_hz,damping_pu\n")
    spec = FigureSpec(csv_paths=(str(empty),), kind="sweep",
                      out_path=str(tmp_path / "o.png"))
    with pytest.raises(SchemaError, match="no data rows"):
        render(spec)
    assert not (tmp_path / "o.png").exists()


def test_missing_file_is_an_error(tmp_path):
    spec = FigureSpec(csv_paths=(str(tmp_path / "nope.csv"),), kind="trace",
                      out_path=str(tmp_path / "o.png"))
    with pytest.raises(SchemaError, match="no such file"):
        render(spec)


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(SchemaError):
        FigureSpec(csv_paths=("x.csv",), kind="pie",
                   out_path=str(tmp_path / "o.png"))


# ---------------------------------------------------------------------------
# rendering the shipped sample data

def test_render_locus_extrema(tmp_path):
    out = tmp_path / "locus.png"
    spec = FigureSpec(csv_paths=(str(DATA / "locus.csv"),), kind="locus",
                      out_path=str(out))
    plotted = render(spec)
    assert out.exists() and out.stat().st_size > 0
    file_spans = csv_extrema(DATA / "locus.csv", "re", "im", group="curve")
    for curve, span in file_spans.items():
        got = plotted[f"locus.csv:{curve}"]
        assert got["re"] == pytest.approx((span[0], span[1]))
        assert got["im"] == pytest.approx((span[2], span[3]))


def test_render_trace_extrema(tmp_path):
    out = tmp_path / "trace.png"
    spec = FigureSpec(csv_paths=(str(DATA / "trace.csv"),), kind="trace",
                      out_path=str(out))
    plotted = render(spec)
    assert out.exists() and out.stat().st_size > 0
    spans = csv_extrema(DATA / "trace.csv", "t", "i_d")["all"]
    got = plotted["trace.csv:i_d"]
    assert got["t"] == pytest.approx((spans[0], spans[1]))
    assert got["y"] == pytest.approx((spans[2], spans[3]))


def test_render_sweep_extrema(tmp_path):
    out = tmp_path / "sweep.png"
    spec = FigureSpec(csv_paths=(str(DATA / "sweep.csv"),), kind="sweep",
                      out_path=str(out))
    plotted = render(spec)
    assert out.exists() and out.stat().st_size > 0
    spans = csv_extrema(DATA / "sweep.csv", "value", "damping_pu",
                        group="method")
    for method, span in spans.items():
        got = plotted[f"sweep.csv:{method}"]
        assert got["value"] == pytest.approx((span[0], span[1]))
        assert got["damping_pu"] == pytest.approx((span[2], span[3]))


def test_render_multi_panel_locus(tmp_path):
    out = tmp_path / "multi.png"
    spec = FigureSpec(
        csv_paths=(str(DATA / "locus.csv"), str(DATA / "locus.csv")),
        kind="locus", out_path=str(out))
    render(spec)
    assert out.exists()


# ---------------------------------------------------------------------------
# command-line entry points

def test_cli_entry_points(tmp_path):
    assert main_locus([str(DATA / "locus.csv"),
                       str(tmp_path / "l.png")]) == 0
    assert main_trace([str(DATA / "trace.csv"),
                       str(tmp_path / "t.png")]) == 0
    assert main_sweep([str(DATA / "sweep.csv"),
                       str(tmp_path / "s.png")]) == 0
    for name in ("l.png", "t.png", "s.png"):
        assert (tmp_path / name).stat().st_size > 0


def test_cli_usage_and_schema_exit(tmp_path):
    assert main_locus([str(tmp_path / "only_out.png")]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("t,i_d\n0,0\n")
    assert main_trace([str(bad), str(tmp_path / "o.png")]) == 2
