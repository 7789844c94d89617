"""Figure rendering for the stability workbench's CSV artifacts.

Pure consumers: every number plotted comes verbatim from a CSV produced by
the `vscstab` command line; no computation happens here beyond axis
scaling.  Each renderer returns the extrema of the data it actually drew,
keyed per curve, so callers can verify the figure against the file without
inspecting pixels.

Invocations:
    render_locus <locus.csv> [<more.csv> ...] <out.png>
    render_trace <trace.csv> <out.png>
    render_sweep <sweep.csv> <out.png>
"""

from __future__ import annotations

import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


class SchemaError(Exception):
    """A CSV is missing a required column or holds no data rows."""


_SCHEMAS = {
    "locus": ("f_hz", "re", "im", "curve"),
    "trace": ("t", "i_d", "i_q", "theta_pll", "u_g_mag"),
    "sweep": ("param", "value", "method", "stable", "winding_p", "winding_n",
              "iop_hz", "damping_pu"),
}

# curves whose reference point is the origin vs the minus-one point
_GNC_PREFIX = "gnc_"


@dataclass(frozen=True)
class FigureSpec:
    csv_paths: tuple
    kind: str                      # 'locus' | 'sweep' | 'trace'
    out_path: str
    xlim: tuple | None = None
    ylim: tuple | None = None

    def __post_init__(self):
        if self.kind not in _SCHEMAS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")


def _read_rows(path, kind):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in _SCHEMAS[kind]:
            if col not in header:
                raise SchemaError(f"{path}: missing column '{col}'")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def _span(values):
    return (min(values), max(values))


def _render_locus(spec: FigureSpec):
    n = len(spec.csv_paths)
    fig, axes = plt.subplots(n, 2, figsize=(9.0, 3.4 * n), squeeze=False)
    extrema = {}
    for row_i, path in enumerate(spec.csv_paths):
        rows = _read_rows(path, "locus")
        curves: dict = {}
        for r in rows:
            curves.setdefault(r["curve"], ([], []))
            curves[r["curve"]][0].append(float(r["re"]))
            curves[r["curve"]][1].append(float(r["im"]))
        ax_ap, ax_gnc = axes[row_i]
        for name in sorted(curves):
            re, im = curves[name]
            ax = ax_gnc if name.startswith(_GNC_PREFIX) else ax_ap
            ax.plot(re, im, lw=1.0, label=name)
            extrema[f"{Path(path).name}:{name}"] = {
                "re": _span(re), "im": _span(im),
            }
        ax_ap.plot([0.0], [0.0], "x", color="k", ms=8, mew=2)
        ax_gnc.plot([-1.0], [0.0], "x", color="k", ms=8, mew=2)
        ax_ap.set_title(f"loop impedances - {Path(path).name}", fontsize=9)
        ax_gnc.set_title("minor-loop eigenvalue loci", fontsize=9)
        for ax in (ax_ap, ax_gnc):
            ax.axhline(0.0, color="0.8", lw=0.5)
            ax.axvline(0.0, color="0.8", lw=0.5)
            ax.legend(fontsize=6, loc="best")
            ax.set_xlabel("real part")
            ax.set_ylabel("imaginary part")
            if spec.xlim:
                ax.set_xlim(*spec.xlim)
            if spec.ylim:
                ax.set_ylim(*spec.ylim)
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=110)
    plt.close(fig)
    return extrema


def _render_trace(spec: FigureSpec):
    fig, (ax_i, ax_u) = plt.subplots(2, 1, figsize=(9.0, 5.4), sharex=True)
    extrema = {}
    for path in spec.csv_paths:
        rows = _read_rows(path, "trace")
        t = [float(r["t"]) for r in rows]
        i_d = [float(r["i_d"]) for r in rows]
        i_q = [float(r["i_q"]) for r in rows]
        u_g = [float(r["u_g_mag"]) for r in rows]
        name = Path(path).name
        ax_i.plot(t, i_d, lw=0.8, label=f"{name} i_d")
        ax_i.plot(t, i_q, lw=0.8, label=f"{name} i_q")
        ax_u.plot(t, u_g, lw=0.8, label=f"{name} |u_g|")
        extrema[f"{name}:i_d"] = {"t": _span(t), "y": _span(i_d)}
        extrema[f"{name}:i_q"] = {"t": _span(t), "y": _span(i_q)}
        extrema[f"{name}:u_g_mag"] = {"t": _span(t), "y": _span(u_g)}
    ax_i.set_ylabel("current (pu)")
    ax_u.set_ylabel("sampling-node voltage (pu)")
    ax_u.set_xlabel("time (s)")
    for ax in (ax_i, ax_u):
        ax.legend(fontsize=7)
        ax.grid(alpha=0.3)
    if spec.xlim:
        ax_u.set_xlim(*spec.xlim)
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=110)
    plt.close(fig)
    return extrema


def _render_sweep(spec: FigureSpec):
    fig, ax = plt.subplots(figsize=(7.2, 4.4))
    extrema = {}
    markers = {"stable": "o", "marginal": "s", "unstable": "v"}
    for path in spec.csv_paths:
        rows = _read_rows(path, "sweep")
        by_method: dict = {}
        for r in rows:
            if r["damping_pu"] == "":
                continue
            by_method.setdefault(r["method"], ([], [], []))
            by_method[r["method"]][0].append(float(r["value"]))
            by_method[r["method"]][1].append(float(r["damping_pu"]))
            by_method[r["method"]][2].append(r["stable"])
        if not by_method:
            raise SchemaError(f"{path}: no rows with a damping value")
        param = rows[0]["param"]
        for method in sorted(by_method):
            x, y, states = by_method[method]
            ax.plot(x, y, lw=1.0, label=f"{Path(path).name} {method}")
            for xv, yv, st in zip(x, y, states):
                ax.plot([xv], [yv], markers.get(st, "."), ms=5, color="k",
                        mfc="none")
            extrema[f"{Path(path).name}:{method}"] = {
                "value": _span(x), "damping_pu": _span(y),
            }
        ax.set_xlabel(param)
    ax.axhline(0.0, color="r", lw=0.8, ls="--")
    ax.set_ylabel("damping at the oscillatory point (pu)")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=7)
    if spec.xlim:
        ax.set_xlim(*spec.xlim)
    if spec.ylim:
        ax.set_ylim(*spec.ylim)
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=110)
    plt.close(fig)
    return extrema


_RENDERERS = {
    "locus": _render_locus,
    "trace": _render_trace,
    "sweep": _render_sweep,
}


def render(spec: FigureSpec):
    """Render one figure; returns the plotted extrema keyed per curve."""
    for path in spec.csv_paths:
        if not Path(path).exists():
            raise SchemaError(f"{path}: no such file")
    return _RENDERERS[spec.kind](spec)


def _main(kind, argv):
    args = sys.argv[1:] if argv is None else list(argv)
    if len(args) < 2:
        print(f"usage: render_{kind} <csv> [<csv> ...] <out.png>",
              file=sys.stderr)
        return 2
    spec = FigureSpec(csv_paths=tuple(args[:-1]), kind=kind, out_path=args[-1])
    try:
        render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args[-1]}")
    return 0


def main_locus(argv=None):
    return _main("locus", argv)


def main_trace(argv=None):
    return _main("trace", argv)


def main_sweep(argv=None):
    return _main("sweep", argv)
