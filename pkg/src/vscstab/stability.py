"""Frequency-domain stability verdicts from loop-impedance loci.

Three criteria are implemented against the same sampled-locus machinery:

* AP    - winding of the two augmented loop impedances about the origin.
* GNC   - eigenvalue loci of the minor-loop gain about (-1, 0); the net
          encirclement count is evaluated through det(I + L), whose winding
          about the origin equals the summed eigenloci encirclements and is
          immune to eigenvalue branch swapping.
* GASIN - winding of the generalized (Schur-complement) loop impedances.

Each criterion is an Argument-Principle count and therefore needs the
right-half-plane poles of its own loop function as a premise term.  Those
are counted exactly from the reduced rational representation (the degrees
are small), and the truncated half-axis sweep is completed analytically:
for a function with pole order m0 at s = 0 and relative degree d the two
frequency sweeps (the function and its coefficient-conjugate mirror, which
is the negative-frequency half of the contour) satisfy

    W_raw(F) + W_raw(mirror F) = P - Z + (m0 + d) / 2

so Z = P + (m0 + d)/2 - W_raw_sum.  When P = 0 this reduces to the plain
"stable iff neither curve encircles the origin".  Verdicts record the
premise count instead of refusing to answer when it is nonzero.

Marginality is a physical measurement shared by all three criteria: the
damping Re(z_loop_p) at the intrinsic oscillatory point (the frequency
where Im(z_loop_p) vanishes).  |damping| below marginal_eps classifies the
case as marginal regardless of the winding count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .errors import AmbiguousBoundaryError, ParameterError, UnreliableWindingError
from .model import Case, build_case
from .sequence import (
    SequenceModel,
    build_model,
    gasin_input_from_model,
    gasin_loop,
    minor_loop_matrix,
)
from .tf import CRational

_ANGLE_LIMIT = math.pi / 2
_AXIS_TOL = 1e-9          # relative margin for calling a root right-half-plane
_ZERO_ROOT_TOL = 1e-6     # rad/s; |root| below this counts as "at the origin"
_SHARE_TOL = 1e-6         # relative tolerance for pairing num/den roots


@dataclass(frozen=True)
class SweepSettings:
    """Frequency grid and classification thresholds."""

    f_min: float = 0.1
    f_max: float = 1000.0
    n_points: int = 2000
    marginal_eps: float = 1e-3
    max_refine: int = 20


@dataclass(frozen=True)
class Locus:
    """A sampled frequency-response curve."""

    freqs: np.ndarray          # Hz, strictly increasing
    values: np.ndarray         # complex samples at s = j*2*pi*f
    label: str = ""
    flags: tuple = ()


@dataclass(frozen=True)
class StabilityVerdict:
    method: str                # 'AP' | 'GNC' | 'GASIN' | 'SIM'
    stable: str                # 'stable' | 'unstable' | 'marginal'
    winding_p: int | None = None
    winding_n: int | None = None
    iop_hz: float | None = None
    damping: float | None = None
    detail: dict = field(default_factory=dict)


def _eval_masked(x: CRational, f_hz: np.ndarray):
    """Evaluate on a grid, dropping pole points instead of raising."""
    s = 1j * 2.0 * np.pi * f_hz
    num = x.num(s)
    den = x.den(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = num / den
    good = np.isfinite(vals) & (den != 0)
    return f_hz[good], vals[good], int(np.sum(~good))


def sample_locus(x: CRational, f_min: float, f_max: float, n: int,
                 about: complex = 0.0, label: str = "",
                 max_refine: int | None = None) -> Locus:
    """Log-spaced sweep with adaptive bisection.

    Intervals are bisected (in log frequency) wherever the polar angle
    about `about` jumps by pi/2 or more, or the imaginary part of
    (value - about) changes sign, until resolved or the refinement depth
    cap is reached.
    """
    if not (0.0 < f_min < f_max):
        raise ParameterError("need 0 < f_min < f_max")
    if n < 16:
        raise ParameterError("need at least 16 base points")
    depth_cap = 20 if max_refine is None else max_refine
    f = np.logspace(math.log10(f_min), math.log10(f_max), n)
    f, vals, skipped = _eval_masked(x, f)
    flags = [f"pole-skipped:{skipped}"] if skipped else []
    for _ in range(depth_cap):
        z = vals - about
        dang = np.abs(np.angle(z[1:] / z[:-1]))
        imflip = np.sign(z[1:].imag) != np.sign(z[:-1].imag)
        narrow = f[1:] / f[:-1] <= 1.0 + 1e-9
        need = ((dang >= _ANGLE_LIMIT) | imflip) & ~narrow
        if not need.any():
            break
        mids = np.sqrt(f[:-1][need] * f[1:][need])
        fm, vm, skipped = _eval_masked(x, mids)
        if skipped:
            flags.append(f"pole-skipped:{skipped}")
        f = np.concatenate([f, fm])
        vals = np.concatenate([vals, vm])
        order = np.argsort(f)
        f, vals = f[order], vals[order]
    else:
        flags.append("refinement-cap")
    # post-hoc audit of the angle-step invariant
    z = vals - about
    dang = np.abs(np.angle(z[1:] / z[:-1]))
    if np.any(dang >= _ANGLE_LIMIT):
        flags.append("angle-step-violation")
    return Locus(freqs=f, values=vals, label=label or "curve",
                 flags=tuple(flags))


def _raw_winding(locus: Locus, about: complex) -> float:
    z = locus.values - about
    if np.any(z == 0.0):
        raise UnreliableWindingError(
            f"{locus.label}: a sample coincides with the reference point"
        )
    steps = np.angle(z[1:] / z[:-1])
    if np.any(np.abs(steps) >= _ANGLE_LIMIT):
        raise UnreliableWindingError(
            f"{locus.label}: angle step >= pi/2 survived refinement"
        )
    return float(np.sum(steps) / (2.0 * math.pi))


def winding_number(locus: Locus, about: complex = 0.0) -> int:
    """Net counterclockwise turns of the locus about a point."""
    return int(round(_raw_winding(locus, about)))


def _root_profile(fn: CRational, omega_cut: float):
    """RHP pole count, pole order at the origin, and relative degree.

    Numerator and denominator roots that coincide within a relative
    tolerance are treated as a cancelled pair (uncancelled structural
    factors do not change the function's values, so they must not change
    the counts either).  Roots beyond omega_cut are discarded: they are
    floating-point noise from inflated polynomial degrees and lie far
    outside the swept band, so neither the windings nor the endpoint
    corrections see them.  A root found between the sweep limit and the
    cutoff means the frequency grid does not cover the system dynamics.
    """
    fr = fn.reduce()
    rn = list(fr.num.roots())
    rd = list(fr.den.roots())
    kept_n = []
    for r in rn:
        hit = None
        for k, q in enumerate(rd):
            if abs(r - q) <= _SHARE_TOL * (1.0 + abs(r)):
                hit = k
                break
        if hit is None:
            kept_n.append(r)
        else:
            rd.pop(hit)
    guard = [r for r in kept_n + rd if omega_cut <= abs(r) < 100.0 * omega_cut]
    if guard:
        raise UnreliableWindingError(
            "system dynamics extend beyond the frequency sweep: root at "
            f"|s| = {abs(guard[0]):.3e} rad/s; raise f_max"
        )
    kept_n = [r for r in kept_n if abs(r) < omega_cut]
    rd = [r for r in rd if abs(r) < omega_cut]
    p_rhp = sum(1 for r in rd if r.real > _AXIS_TOL * (1.0 + abs(r)))
    den_zero = sum(1 for r in rd if abs(r) < _ZERO_ROOT_TOL)
    num_zero = sum(1 for r in kept_n if abs(r) < _ZERO_ROOT_TOL)
    m0 = den_zero - num_zero
    d_rel = len(kept_n) - len(rd)
    return p_rhp, m0, d_rel


def rhp_zero_count(fn: CRational, settings: SweepSettings, label: str = "F"):
    """Count right-half-plane zeros of fn via the completed Argument Principle.

    Returns (Z, detail) where detail carries the premise pole count, the
    raw windings of the curve and its mirror, the endpoint correction, and
    the two sampled loci.
    """
    mirror = fn.conj_coeff()
    lp = sample_locus(fn, settings.f_min, settings.f_max, settings.n_points,
                      about=0.0, label=f"{label}", max_refine=settings.max_refine)
    lm = sample_locus(mirror, settings.f_min, settings.f_max, settings.n_points,
                      about=0.0, label=f"{label}*", max_refine=settings.max_refine)
    raw_p = _raw_winding(lp, 0.0)
    raw_m = _raw_winding(lm, 0.0)
    p_rhp, m0, d_rel = _root_profile(fn, 2.0 * math.pi * settings.f_max)
    corr = 0.5 * (m0 + d_rel)
    z_float = p_rhp + corr - (raw_p + raw_m)
    z = int(round(z_float))
    if abs(z_float - z) > 0.15:
        raise UnreliableWindingError(
            f"{label}: zero count {z_float:.3f} too far from an integer"
        )
    detail = {
        "rhp_poles": p_rhp,
        "pole_order_at_zero": m0,
        "relative_degree": d_rel,
        "raw_winding": raw_p,
        "raw_winding_mirror": raw_m,
        "zero_count_float": z_float,
    }
    return z, detail, lp, lm


def find_iop(x: CRational, f_min: float, f_max: float, n: int = 2000):
    """All intrinsic oscillatory points: Im(x(j*w)) sign changes, bisected.

    Returns a list of (frequency_hz, damping) with damping = Re at the
    root.  An empty list is a valid outcome.
    """
    if not (0.0 < f_min < f_max):
        raise ParameterError("need 0 < f_min < f_max")
    f, vals, _ = _eval_masked(x, np.logspace(math.log10(f_min),
                                             math.log10(f_max), n))
    im = vals.imag

    def im_at(fr):
        return x(1j * 2.0 * np.pi * fr).imag

    out = []
    for k in range(len(f) - 1):
        if im[k] == 0.0:
            out.append(f[k])
        elif im[k] * im[k + 1] < 0.0:
            out.append(brentq(im_at, f[k], f[k + 1], rtol=1e-10))
    if len(f) and im[-1] == 0.0:
        out.append(f[-1])
    roots = []
    for fr in out:
        if not roots or abs(fr - roots[-1]) > 1e-9 * fr:
            roots.append(fr)
    return [(fr, float(x(1j * 2.0 * np.pi * fr).real)) for fr in roots]


def _measure_iop(model: SequenceModel, settings: SweepSettings):
    """Worst-damping IOP of the loop impedance (shared marginality measure)."""
    iops = find_iop(model.z_loop_p, settings.f_min, settings.f_max,
                    settings.n_points)
    if not iops:
        return None, None, iops
    fr, damp = min(iops, key=lambda t: t[1])
    return fr, damp, iops


def _classify(z_count: int, damping, eps: float) -> str:
    if damping is not None and abs(damping) < eps:
        return "marginal"
    return "stable" if z_count == 0 else "unstable"


def ap_verdict(model: SequenceModel, settings: SweepSettings = SweepSettings()
               ) -> StabilityVerdict:
    """Argument-Principle verdict on the two augmented loop impedances."""
    z, detail, lp, lm = rhp_zero_count(model.z_loop_p, settings, "z_loop_p")
    iop_hz, damping, iops = _measure_iop(model, settings)
    detail.update(z_count=z, iops=iops)
    return StabilityVerdict(
        method="AP",
        stable=_classify(z, damping, settings.marginal_eps),
        winding_p=int(round(detail["raw_winding"])),
        winding_n=int(round(detail["raw_winding_mirror"])),
        iop_hz=iop_hz,
        damping=damping,
        detail=detail,
    )


def gnc_eigenloci(model: SequenceModel, settings: SweepSettings = SweepSettings()
                  ) -> tuple[Locus, Locus]:
    """Continuity-tracked eigenvalue loci of the minor-loop gain."""
    f = np.logspace(math.log10(settings.f_min), math.log10(settings.f_max),
                    settings.n_points)
    l1 = np.empty(len(f), dtype=complex)
    l2 = np.empty(len(f), dtype=complex)
    good = np.ones(len(f), dtype=bool)
    prev = None
    for k, fk in enumerate(f):
        try:
            m = minor_loop_matrix(model, 1j * 2.0 * np.pi * fk)
            eig = np.linalg.eigvals(m)
        except Exception:
            good[k] = False
            continue
        if prev is not None:
            # keep branches continuous: pick the pairing closer to the last point
            straight = abs(eig[0] - prev[0]) + abs(eig[1] - prev[1])
            swapped = abs(eig[1] - prev[0]) + abs(eig[0] - prev[1])
            if swapped < straight:
                eig = eig[::-1]
        l1[k], l2[k] = eig
        prev = eig
    return (
        Locus(freqs=f[good], values=l1[good], label="gnc_lambda1"),
        Locus(freqs=f[good], values=l2[good], label="gnc_lambda2"),
    )


def gnc_verdict(model: SequenceModel, settings: SweepSettings = SweepSettings()
                ) -> StabilityVerdict:
    """Generalized Nyquist verdict via det(I + minor loop) about the origin.

    The winding of det(I + L) about 0 equals the net encirclement count of
    (-1, 0) by the eigenvalue loci, with no branch-tracking ambiguity.  The
    per-branch windings about -1 are reported as diagnostics.
    """
    z, detail, _, _ = rhp_zero_count(model.gnc_det, settings, "det(I+L)")
    iop_hz, damping, iops = _measure_iop(model, settings)
    w1 = w2 = None
    try:
        loc1, loc2 = gnc_eigenloci(model, settings)
        w1 = winding_number(loc1, about=-1.0)
        w2 = winding_number(loc2, about=-1.0)
    except UnreliableWindingError:
        pass
    detail.update(z_count=z, iops=iops, open_loop_rhp_poles=detail["rhp_poles"])
    return StabilityVerdict(
        method="GNC",
        stable=_classify(z, damping, settings.marginal_eps),
        winding_p=w1,
        winding_n=w2,
        iop_hz=iop_hz,
        damping=damping,
        detail=detail,
    )


def gasin_verdict(model: SequenceModel, settings: SweepSettings = SweepSettings()
                  ) -> StabilityVerdict:
    """Verdict on the generalized loop impedances (full Schur reduction)."""
    z_g_p, _ = gasin_loop(gasin_input_from_model(model))
    z, detail, lp, lm = rhp_zero_count(z_g_p, settings, "z_gasin_p")
    iop_hz, damping, iops = _measure_iop(model, settings)
    detail.update(z_count=z, iops=iops)
    return StabilityVerdict(
        method="GASIN",
        stable=_classify(z, damping, settings.marginal_eps),
        winding_p=int(round(detail["raw_winding"])),
        winding_n=int(round(detail["raw_winding_mirror"])),
        iop_hz=iop_hz,
        damping=damping,
        detail=detail,
    )


_METHODS = {"ap": ap_verdict, "gnc": gnc_verdict, "gasin": gasin_verdict}


def verdict(model: SequenceModel, method: str = "ap",
            settings: SweepSettings = SweepSettings()) -> StabilityVerdict:
    try:
        fn = _METHODS[method.lower()]
    except KeyError:
        raise ParameterError(f"unknown method {method!r}") from None
    return fn(model, settings)


# ---------------------------------------------------------------------------
# parameter sweeps

_SWEEP_PARAMS = ("pll_bw", "scr", "resistance", "cc_bw")


def _apply_param(case: Case, param: str, value: float) -> Case:
    if param == "pll_bw":
        return replace(case, pll_bw=value, gains=None)
    if param == "cc_bw":
        return replace(case, cc_bw=value, gains=None)
    if param == "scr":
        return replace(case, scr=value)
    if param == "resistance":
        return replace(case, r_extra=value)
    raise ParameterError(f"unknown sweep parameter {param!r}; "
                         f"choose one of {_SWEEP_PARAMS}")


def model_for(case: Case) -> SequenceModel:
    params, op = build_case(case)
    return build_model(params, op)


def sweep(case: Case, param: str, values, settings: SweepSettings = SweepSettings(),
          methods=("ap", "gnc", "gasin")):
    """One model build plus all requested verdicts per parameter value."""
    rows = []
    for v in values:
        m = model_for(_apply_param(case, param, float(v)))
        for meth in methods:
            rows.append((param, float(v), verdict(m, meth, settings)))
    return rows


def critical(case: Case, param: str, lo: float, hi: float,
             settings: SweepSettings = SweepSettings(), method: str = "ap",
             scan_points: int = 9, rel_tol: float = 0.01) -> float:
    """Bisect the parameter to the stable/unstable boundary.

    The verdict transition in [lo, hi] must be monotone; a coarse scan
    guards against multiple transitions before the bisection starts.
    `marginal` counts as the boundary itself.
    """
    if not lo < hi:
        raise ParameterError("need lo < hi")

    def is_stable(v: float) -> bool:
        m = model_for(_apply_param(case, param, v))
        return verdict(m, method, settings).stable == "stable"

    grid = np.linspace(lo, hi, scan_points)
    states = [is_stable(v) for v in grid]
    transitions = [
        0.5 * (grid[k] + grid[k + 1])
        for k in range(len(grid) - 1)
        if states[k] != states[k + 1]
    ]
    if not transitions:
        raise AmbiguousBoundaryError([], "no verdict transition in [lo, hi]")
    if len(transitions) > 1:
        raise AmbiguousBoundaryError(transitions)
    k = next(i for i in range(len(grid) - 1) if states[i] != states[i + 1])
    a, b = grid[k], grid[k + 1]
    sa = states[k]
    while (b - a) > rel_tol * max(abs(a), abs(b)):
        mid = 0.5 * (a + b)
        if is_stable(mid) == sa:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)
