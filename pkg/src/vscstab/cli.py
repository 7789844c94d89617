"""Command-line front end: INI config, analysis dispatch, deterministic CSVs.

Config format: INI-style sections with `key = value` lines, `#`/`;`
comments.  Unknown sections or keys are rejected with the offending line
number.  All numeric output uses 12 significant digits and carries no
timestamps, so identical inputs produce byte-identical files.

Exit codes: 0 success, 2 config error, 3 numerical error, 4 inconclusive
verdict.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import sequence, sim, stability
from .errors import ConfigError, UnreliableWindingError, VscStabError
from .model import (
    BaseQuantities,
    Case,
    CircuitParams,
    ControllerParams,
    build_case,
)

_G = "{:.12g}"


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return _G.format(x)


# ---------------------------------------------------------------------------
# config parsing

_SCHEMA = {
    "base": {"s_base_va", "v_base_v", "f_base_hz"},
    "circuit": {"l_filter", "l_t", "l_s", "scr", "r_filter", "r_t", "r_s"},
    "control": {"cc_bw_hz", "pll_bw_hz", "pll_damping",
                "kp_cc", "ki_cc", "kp_pll", "ki_pll"},
    "operating": {"i_ref_re", "i_ref_im", "u_s_mag"},
    "analysis": {"f_min_hz", "f_max_hz", "n_points", "marginal_eps", "methods"},
    "sweep": {"param", "values", "critical_lo", "critical_hi"},
    "sim": {"dt_s", "t_end_s", "perturb_time_s", "perturb_kind",
            "perturb_size", "record_decimation", "classify_window_s",
            "spectrum_window_s"},
}


def _read_ini(path) -> dict:
    """Parse `key = value` sections; values kept as (string, line_no)."""
    sections: dict = {}
    current = None
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if current not in _SCHEMA:
                raise ConfigError(f"unknown section [{current}] at line {no}")
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value' at line {no}: {raw!r}")
        if current is None:
            raise ConfigError(f"key outside any section at line {no}")
        key, _, val = line.partition("=")
        key = key.strip().lower()
        if key not in _SCHEMA[current]:
            raise ConfigError(f"unknown key '{key}' in [{current}] at line {no}")
        if key in sections[current]:
            raise ConfigError(f"duplicate key '{key}' at line {no}")
        sections[current][key] = (val.strip(), no)
    return sections


def _take(sec: dict, key: str, conv, default=None, required=False, name=""):
    if key in sec:
        raw, no = sec[key]
        try:
            return conv(raw)
        except ValueError as exc:
            raise ConfigError(
                f"bad value for '{key}' at line {no}: {raw!r} ({exc})"
            ) from exc
    if required:
        raise ConfigError(f"missing required key '{key}' in [{name}]")
    return default


@dataclass(frozen=True)
class RunConfig:
    case: Case
    settings: stability.SweepSettings
    methods: tuple
    sweep_param: str | None = None
    sweep_values: tuple = ()
    critical_lo: float | None = None
    critical_hi: float | None = None
    sim_cfg: sim.SimConfig = field(default_factory=sim.SimConfig)
    classify_window_s: float = 0.5
    spectrum_window_s: float = 2.0


def parse_config(path) -> RunConfig:
    sec = _read_ini(path)
    base_s = sec.get("base", {})
    base = BaseQuantities(
        s_base=_take(base_s, "s_base_va", float, 2e6),
        v_base=_take(base_s, "v_base_v", float, 690.0),
        f_base=_take(base_s, "f_base_hz", float, 50.0),
    )

    circ_s = sec.get("circuit", {})
    l_s = _take(circ_s, "l_s", float)
    scr = _take(circ_s, "scr", float)
    if l_s is not None and scr is not None:
        raise ConfigError(
            "contradictory keys: give exactly one of 'l_s' (line "
            f"{circ_s['l_s'][1]}) and 'scr' (line {circ_s['scr'][1]})"
        )
    if l_s is None and scr is None:
        scr = 3.0   # Table-like default: grid inductance 1/scr
    circuit = CircuitParams(
        l_filter=_take(circ_s, "l_filter", float, 0.1),
        l_t=_take(circ_s, "l_t", float, 0.1),
        l_s=l_s if l_s is not None else 1.0 / scr,
        r_filter=_take(circ_s, "r_filter", float, 0.0),
        r_t=_take(circ_s, "r_t", float, 0.0),
        r_s=_take(circ_s, "r_s", float, 0.0),
    )

    if "control" not in sec or not sec["control"]:
        raise ConfigError(
            "missing [control] section; required keys: either "
            "cc_bw_hz, pll_bw_hz[, pll_damping] or kp_cc, ki_cc, kp_pll, ki_pll"
        )
    ctrl_s = sec["control"]
    bw_keys = {"cc_bw_hz", "pll_bw_hz"} & ctrl_s.keys()
    gain_keys = {"kp_cc", "ki_cc", "kp_pll", "ki_pll"} & ctrl_s.keys()
    if bw_keys and gain_keys:
        raise ConfigError(
            "contradictory [control] keys: give bandwidths or explicit gains, not both"
        )
    op_s = sec.get("operating", {})
    u_s_mag = _take(op_s, "u_s_mag", float, 1.0)
    i_ref = complex(
        _take(op_s, "i_ref_re", float, 0.5),
        _take(op_s, "i_ref_im", float, 0.0),
    )

    gains = None
    cc_bw, pll_bw, pll_damping = 200.0, 13.0, 0.707
    if gain_keys:
        if gain_keys != {"kp_cc", "ki_cc", "kp_pll", "ki_pll"}:
            missing = {"kp_cc", "ki_cc", "kp_pll", "ki_pll"} - gain_keys
            raise ConfigError(f"missing explicit gain keys: {sorted(missing)}")
        gains = ControllerParams(
            kp_cc=_take(ctrl_s, "kp_cc", float, required=True, name="control"),
            ki_cc=_take(ctrl_s, "ki_cc", float, required=True, name="control"),
            kp_pll=_take(ctrl_s, "kp_pll", float, required=True, name="control"),
            ki_pll=_take(ctrl_s, "ki_pll", float, required=True, name="control"),
            u_s_mag=u_s_mag,
        )
    else:
        cc_bw = _take(ctrl_s, "cc_bw_hz", float, required=True, name="control")
        pll_bw = _take(ctrl_s, "pll_bw_hz", float, required=True, name="control")
        pll_damping = _take(ctrl_s, "pll_damping", float, 0.707)

    case = Case(
        base=base, circuit=circuit, scr=None, r_extra=0.0,
        cc_bw=cc_bw, pll_bw=pll_bw, pll_damping=pll_damping,
        gains=gains, i_ref=i_ref, u_s_mag=u_s_mag,
    )

    an_s = sec.get("analysis", {})
    settings = stability.SweepSettings(
        f_min=_take(an_s, "f_min_hz", float, 0.1),
        f_max=_take(an_s, "f_max_hz", float, 1000.0),
        n_points=_take(an_s, "n_points", int, 2000),
        marginal_eps=_take(an_s, "marginal_eps", float, 1e-3),
    )
    methods_raw = _take(an_s, "methods", str, "ap,gnc,gasin")
    methods = tuple(m.strip().lower() for m in methods_raw.split(",") if m.strip())
    for m in methods:
        if m not in ("ap", "gnc", "gasin", "sim", "all"):
            raise ConfigError(f"unknown method '{m}' in [analysis] methods")

    sw_s = sec.get("sweep", {})
    sweep_param = _take(sw_s, "param", str)
    sweep_values = ()
    if "values" in sw_s:
        raw, no = sw_s["values"]
        try:
            sweep_values = tuple(float(v) for v in raw.split(",") if v.strip())
        except ValueError as exc:
            raise ConfigError(f"bad sweep values at line {no}: {raw!r}") from exc

    sim_s = sec.get("sim", {})
    sim_cfg = sim.SimConfig(
        dt=_take(sim_s, "dt_s", float, 5e-5),
        t_end=_take(sim_s, "t_end_s", float, 4.0),
        perturb_time=_take(sim_s, "perturb_time_s", float, 0.5),
        perturb_kind=_take(sim_s, "perturb_kind", str, "grid_voltage_step"),
        perturb_size=_take(sim_s, "perturb_size", float, 0.01),
        record_decimation=_take(sim_s, "record_decimation", int, 20),
    )

    return RunConfig(
        case=case,
        settings=settings,
        methods=methods,
        sweep_param=sweep_param,
        sweep_values=sweep_values,
        critical_lo=_take(sw_s, "critical_lo", float),
        critical_hi=_take(sw_s, "critical_hi", float),
        sim_cfg=sim_cfg,
        classify_window_s=_take(sim_s, "classify_window_s", float, 0.5),
        spectrum_window_s=_take(sim_s, "spectrum_window_s", float, 2.0),
    )


# ---------------------------------------------------------------------------
# CSV writers

_VERDICT_HEADER = "param,value,method,stable,winding_p,winding_n,iop_hz,damping_pu\n"


def _verdict_row(param: str, value: float, v: stability.StabilityVerdict) -> str:
    return ",".join([
        param, _fmt(value), v.method, v.stable,
        "" if v.winding_p is None else str(v.winding_p),
        "" if v.winding_n is None else str(v.winding_n),
        _fmt(v.iop_hz), _fmt(v.damping),
    ]) + "\n"


def _write_loci(path: Path, loci) -> None:
    with path.open("w") as fh:
        fh.write("f_hz,re,im,curve\n")
        for locus in loci:
            for f, z in zip(locus.freqs, locus.values):
                fh.write(f"{_fmt(f)},{_fmt(z.real)},{_fmt(z.imag)},{locus.label}\n")


def _sim_verdict_label(cls: str) -> str:
    return {"damped": "stable", "sustained": "marginal", "growing": "unstable"}[cls]


# ---------------------------------------------------------------------------
# subcommands

def _resolve_methods(cfg: RunConfig, args) -> tuple:
    methods = cfg.methods
    if args.method:
        methods = (args.method.lower(),)
    if "all" in methods:
        methods = ("ap", "gnc", "gasin", "sim")
    return methods


def _model_of(cfg: RunConfig):
    params, op = build_case(cfg.case)
    return params, op, sequence.build_model(params, op)


def cmd_impedance(cfg: RunConfig, out: Path, args) -> int:
    _, _, m = _model_of(cfg)
    st = cfg.settings
    f = np.logspace(math.log10(st.f_min), math.log10(st.f_max), st.n_points)
    members = [
        ("h_i", m.h_i), ("h_pll", m.h_pll), ("g_pll", m.g_pll),
        ("c_pll", m.c_pll), ("z_grid_p", m.z_grid_p), ("z_grid_n", m.z_grid_n),
        ("d_pll", m.d_pll), ("z_c_p", m.z_c_p), ("z_c_n", m.z_c_n),
        ("r", m.r), ("gamma", m.gamma),
        ("z_loop_p", m.z_loop_p), ("z_loop_n", m.z_loop_n),
    ]
    loci = []
    for name, fn in members:
        fk, vals, _ = stability._eval_masked(fn, f)
        loci.append(stability.Locus(freqs=fk, values=vals, label=name))
    _write_loci(out / "impedance.csv", loci)
    print(f"wrote {out / 'impedance.csv'}")
    return 0


def cmd_locus(cfg: RunConfig, out: Path, args) -> int:
    _, _, m = _model_of(cfg)
    st = cfg.settings
    loci = [
        stability.sample_locus(m.z_loop_p, st.f_min, st.f_max, st.n_points,
                               label="z_loop_p"),
        stability.sample_locus(m.z_loop_n, st.f_min, st.f_max, st.n_points,
                               label="z_loop_n"),
    ]
    l1, l2 = stability.gnc_eigenloci(m, st)
    loci += [l1, l2]
    zgp, zgn = sequence.gasin_loop(sequence.gasin_input_from_model(m))
    loci += [
        stability.sample_locus(zgp, st.f_min, st.f_max, st.n_points,
                               label="gasin_z_p"),
        stability.sample_locus(zgn, st.f_min, st.f_max, st.n_points,
                               label="gasin_z_n"),
    ]
    _write_loci(out / "locus.csv", loci)
    print(f"wrote {out / 'locus.csv'}")
    return 0


def _param_label_value(cfg: RunConfig):
    if cfg.case.gains is not None:
        return "kp_pll", cfg.case.gains.kp_pll
    return "pll_bw", cfg.case.pll_bw


def cmd_verdict(cfg: RunConfig, out: Path, args) -> int:
    params, op, m = _model_of(cfg)
    methods = _resolve_methods(cfg, args)
    label, value = _param_label_value(cfg)
    rows = []
    for meth in methods:
        if meth == "sim":
            trace = sim.simulate(params, op, cfg.sim_cfg)
            cls = sim.classify_trace(trace, cfg.classify_window_s)
            v = stability.StabilityVerdict(method="SIM",
                                           stable=_sim_verdict_label(cls))
        else:
            v = stability.verdict(m, meth, cfg.settings)
        rows.append(_verdict_row(label, value, v))
    with (out / "verdict.csv").open("w") as fh:
        fh.write(_VERDICT_HEADER)
        fh.writelines(rows)
    print(f"wrote {out / 'verdict.csv'}")
    return 0


def cmd_sweep(cfg: RunConfig, out: Path, args) -> int:
    if not cfg.sweep_param or not cfg.sweep_values:
        raise ConfigError("[sweep] needs both 'param' and 'values'")
    methods = tuple(m for m in _resolve_methods(cfg, args) if m != "sim")
    rows = stability.sweep(cfg.case, cfg.sweep_param, cfg.sweep_values,
                           cfg.settings, methods)
    with (out / "sweep.csv").open("w") as fh:
        fh.write(_VERDICT_HEADER)
        for param, value, v in rows:
            fh.write(_verdict_row(param, value, v))
    print(f"wrote {out / 'sweep.csv'}")
    if cfg.critical_lo is not None and cfg.critical_hi is not None:
        crit = stability.critical(cfg.case, cfg.sweep_param, cfg.critical_lo,
                                  cfg.critical_hi, cfg.settings)
        with (out / "critical.csv").open("w") as fh:
            fh.write("param,lo,hi,critical\n")
            fh.write(f"{cfg.sweep_param},{_fmt(cfg.critical_lo)},"
                     f"{_fmt(cfg.critical_hi)},{_fmt(crit)}\n")
        print(f"wrote {out / 'critical.csv'}")
    return 0


def cmd_simulate(cfg: RunConfig, out: Path, args) -> int:
    params, op, _ = _model_of(cfg)
    trace = sim.simulate(params, op, cfg.sim_cfg)
    with (out / "trace.csv").open("w") as fh:
        sim.trace_write_csv(trace, fh)
    print(f"wrote {out / 'trace.csv'}")
    cls = sim.classify_trace(trace, cfg.classify_window_s)
    print(f"classification: {cls}"
          + (f" (diverged at t={trace.trip_time:.6g} s)" if trace.diverged else ""))
    try:
        spec = sim.sequence_spectrum(trace, cfg.spectrum_window_s)
    except VscStabError as exc:
        print(f"spectrum skipped: {exc}")
        return 0
    with (out / "spectrum.csv").open("w") as fh:
        fh.write("osc_freq_hz,i_p_pu,i_n_pu,f_u\n")
        fh.write(f"{_fmt(spec.osc_freq)},{_fmt(spec.i_p_mag)},"
                 f"{_fmt(spec.i_n_mag)},{_fmt(spec.f_u)}\n")
    print(f"wrote {out / 'spectrum.csv'}")
    return 0


def cmd_compare(cfg: RunConfig, out: Path, args) -> int:
    params, op, m = _model_of(cfg)
    verdicts = {
        meth: stability.verdict(m, meth, cfg.settings).stable
        for meth in ("ap", "gnc", "gasin")
    }
    trace = sim.simulate(params, op, cfg.sim_cfg)
    verdicts["sim"] = _sim_verdict_label(
        sim.classify_trace(trace, cfg.classify_window_s))
    agree = "yes" if len(set(verdicts.values())) == 1 else "no"
    with (out / "compare.csv").open("w") as fh:
        fh.write("ap,gnc,gasin,sim,agree\n")
        fh.write(f"{verdicts['ap']},{verdicts['gnc']},{verdicts['gasin']},"
                 f"{verdicts['sim']},{agree}\n")
    print(f"wrote {out / 'compare.csv'}")
    print("agreement: " + agree)
    return 0


_COMMANDS = {
    "impedance": cmd_impedance,
    "locus": cmd_locus,
    "verdict": cmd_verdict,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
}


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="vscstab",
        description="Sequence-impedance stability workbench for grid-tied VSCs",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="INI configuration file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--fmin", type=float, help="override analysis f_min (Hz)")
        p.add_argument("--fmax", type=float, help="override analysis f_max (Hz)")
        p.add_argument("--npoints", type=int, help="override analysis grid size")
        p.add_argument("--method",
                       choices=["ap", "gnc", "gasin", "sim", "all"],
                       help="restrict to one method")
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        st = cfg.settings
        if args.fmin is not None:
            st = replace(st, f_min=args.fmin)
        if args.fmax is not None:
            st = replace(st, f_max=args.fmax)
        if args.npoints is not None:
            st = replace(st, n_points=args.npoints)
        cfg = replace(cfg, settings=st)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg, out, args)
    except ConfigError as exc:
        print(f"error: code=2 kind=config msg={exc}", file=sys.stderr)
        return 2
    except UnreliableWindingError as exc:
        print(f"error: code=4 kind=inconclusive msg={exc}", file=sys.stderr)
        return 4
    except VscStabError as exc:
        print(f"error: code=3 kind={type(exc).__name__} msg={exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
