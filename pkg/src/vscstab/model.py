"""Physical parameters, per-unit bases, gain design, and the operating point.

Per-unit convention: a per-unit inductance is the reactance at base
frequency, so the impedance of an inductor at Laplace point s (rad/s) is
``l_pu * (s + j*w_s) / w_s`` and a complete branch in SI ohms is that times
``z_base``.  All frequency-domain work stays in per-unit with s in rad/s.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

from scipy.optimize import brentq

from .errors import InfeasibleOperatingPointError, ParameterError

# Integral gain of the current PI: the zero of kp + ki/s is placed at
# omega_c / KI_ZERO_RATIO below the proportional-gain frequency
# omega_c = 2*pi*cc_bw.  The ratio is a tuning choice of this package; it
# sets the series-resonance frequency of the current loop against the grid
# inductance and thereby the PLL bandwidth at which damping is lost.
KI_ZERO_RATIO = 4.5


@dataclass(frozen=True)
class BaseQuantities:
    """Power, voltage and frequency bases with derived impedance base."""

    s_base: float = 2e6      # VA
    v_base: float = 690.0    # line-line rms V
    f_base: float = 50.0     # Hz

    def __post_init__(self):
        if self.s_base <= 0 or self.v_base <= 0 or self.f_base <= 0:
            raise ParameterError("base quantities must be strictly positive")

    @property
    def z_base(self) -> float:
        return self.v_base ** 2 / self.s_base

    @property
    def omega_s(self) -> float:
        return 2.0 * math.pi * self.f_base


@dataclass(frozen=True)
class CircuitParams:
    """Per-unit series branch parameters: filter, transformer, grid."""

    l_filter: float = 0.1
    l_t: float = 0.1
    l_s: float = 1.0 / 3.0
    r_filter: float = 0.0
    r_t: float = 0.0
    r_s: float = 0.0

    def __post_init__(self):
        if min(self.l_filter, self.l_t, self.l_s) < 0:
            raise ParameterError("inductances must be non-negative")
        if self.l_t + self.l_s <= 0:
            raise ParameterError("l_t + l_s must be positive (k_m undefined)")

    @property
    def r_total(self) -> float:
        return self.r_filter + self.r_t + self.r_s

    @property
    def l_total(self) -> float:
        return self.l_filter + self.l_t + self.l_s

    @property
    def l_grid_side(self) -> float:
        """Inductance between the PLL sampling node and the grid source."""
        return self.l_t + self.l_s

    @property
    def r_grid_side(self) -> float:
        return self.r_t + self.r_s

    @property
    def k_m(self) -> float:
        return self.l_filter / (self.l_s + self.l_t)

    # -- per-unit <-> SI ------------------------------------------------
    def to_si(self, base: BaseQuantities) -> dict:
        """SI values: resistances in ohm, inductances in henry."""
        zb, ws = base.z_base, base.omega_s
        return {
            "r_filter_ohm": self.r_filter * zb,
            "r_t_ohm": self.r_t * zb,
            "r_s_ohm": self.r_s * zb,
            "l_filter_h": self.l_filter * zb / ws,
            "l_t_h": self.l_t * zb / ws,
            "l_s_h": self.l_s * zb / ws,
        }

    @classmethod
    def from_si(cls, si: dict, base: BaseQuantities) -> "CircuitParams":
        zb, ws = base.z_base, base.omega_s
        return cls(
            l_filter=si["l_filter_h"] * ws / zb,
            l_t=si["l_t_h"] * ws / zb,
            l_s=si["l_s_h"] * ws / zb,
            r_filter=si["r_filter_ohm"] / zb,
            r_t=si["r_t_ohm"] / zb,
            r_s=si["r_s_ohm"] / zb,
        )


@dataclass(frozen=True)
class ControllerParams:
    """Current-PI and PLL-PI gains plus the PLL voltage normalization."""

    kp_cc: float
    ki_cc: float
    kp_pll: float
    ki_pll: float
    u_s_mag: float = 1.0

    def __post_init__(self):
        if self.kp_cc <= 0:
            raise ParameterError("kp_cc must be positive")
        if self.kp_pll < 0 or self.ki_pll < 0:
            raise ParameterError("PLL gains must be non-negative")
        if self.u_s_mag <= 0:
            raise ParameterError("u_s_mag must be positive")


@dataclass(frozen=True)
class OperatingPoint:
    """Steady-state phasors in the PLL frame around which the model linearizes."""

    i_c0: complex
    u_s0_pll: complex
    delta_pll0: float
    u_g0_pll: complex


@dataclass(frozen=True)
class SystemParams:
    """Everything the sequence model and the simulator need."""

    base: BaseQuantities
    circuit: CircuitParams
    ctrl: ControllerParams
    i_ref: complex = 0.5 + 0.0j


def design_gains(cc_bw, pll_bw, pll_damping, circuit: CircuitParams,
                 u_s_mag=1.0) -> ControllerParams:
    """Map bandwidth targets to PI gains.

    Current loop: kp_cc = 2*pi*cc_bw, integral zero at omega_c/KI_ZERO_RATIO
    (ki_cc = kp_cc * omega_c / KI_ZERO_RATIO).  PLL: standard second-order
    loop with omega_n = 2*pi*pll_bw, kp_pll = 2*zeta*omega_n,
    ki_pll = omega_n**2.  A zero PLL bandwidth freezes the PLL.
    """
    if cc_bw <= 0:
        raise ParameterError("current-controller bandwidth must be positive")
    if pll_bw < 0:
        raise ParameterError("PLL bandwidth must be non-negative")
    if pll_damping <= 0:
        raise ParameterError("PLL damping must be positive")
    omega_c = 2.0 * math.pi * cc_bw
    kp_cc = omega_c
    ki_cc = kp_cc * omega_c / KI_ZERO_RATIO
    omega_n = 2.0 * math.pi * pll_bw
    kp_pll = 2.0 * pll_damping * omega_n
    ki_pll = omega_n ** 2
    return ControllerParams(kp_cc=kp_cc, ki_cc=ki_cc, kp_pll=kp_pll,
                            ki_pll=ki_pll, u_s_mag=u_s_mag)


def solve_operating_point(circuit: CircuitParams, ctrl: ControllerParams,
                          i_ref: complex, u_s_mag=None) -> OperatingPoint:
    """Solve the PLL lock angle for a given current reference.

    Integral action forces i_c0 = i_ref.  The lock condition is
    Im[u_g_pll] = 0 with u_g_pll = u_s*exp(-j*delta) + (r_g + j*l_g)*i_c0,
    where r_g, l_g are the grid-side branch between the PLL sampling node
    and the source.  Scalar root find on delta in (-pi/2, pi/2).
    """
    us = ctrl.u_s_mag if u_s_mag is None else u_s_mag
    if not (cmath.isfinite(i_ref) and us > 0):
        raise ParameterError("i_ref must be finite and u_s_mag positive")
    zg = circuit.r_grid_side + 1j * circuit.l_grid_side

    def lock(delta):
        return (us * cmath.exp(-1j * delta) + zg * i_ref).imag

    lo, hi = -math.pi / 2 + 1e-12, math.pi / 2 - 1e-12
    flo, fhi = lock(lo), lock(hi)
    if flo == 0.0:
        delta0 = lo
    elif fhi == 0.0:
        delta0 = hi
    elif flo * fhi > 0:
        raise InfeasibleOperatingPointError(
            "no PLL lock angle in (-pi/2, pi/2); the grid cannot carry i_ref"
        )
    else:
        delta0 = brentq(lock, lo, hi, xtol=1e-14, rtol=8.9e-16)
    u_s0 = us * cmath.exp(-1j * delta0)
    u_g0 = u_s0 + zg * i_ref
    if abs(u_g0.imag) > 1e-10:
        raise InfeasibleOperatingPointError(
            f"lock residual too large: Im[u_g] = {u_g0.imag:.3e}"
        )
    return OperatingPoint(i_c0=i_ref, u_s0_pll=u_s0, delta_pll0=delta0,
                          u_g0_pll=u_g0)


@dataclass(frozen=True)
class Case:
    """A design-level system description: circuit knobs plus bandwidth targets.

    This is what parameter sweeps mutate; `build_case` turns it into
    concrete params and an operating point.  Exactly one of scr / explicit
    l_s applies: when `scr` is set it overrides `circuit.l_s` with 1/scr.
    `r_extra` is a series resistance added to the grid branch (and thereby
    to the total loop resistance).
    """

    base: BaseQuantities = field(default_factory=BaseQuantities)
    circuit: CircuitParams = field(default_factory=CircuitParams)
    scr: float | None = 3.0
    r_extra: float = 0.0
    cc_bw: float = 200.0
    pll_bw: float = 13.0
    pll_damping: float = 0.707
    gains: ControllerParams | None = None   # explicit gains override bandwidths
    i_ref: complex = 0.5 + 0.0j
    u_s_mag: float = 1.0

    def resolved_circuit(self) -> CircuitParams:
        circ = self.circuit
        if self.scr is not None:
            if self.scr <= 0:
                raise ParameterError("scr must be positive")
            circ = replace(circ, l_s=1.0 / self.scr)
        if self.r_extra:
            circ = replace(circ, r_s=circ.r_s + self.r_extra)
        return circ


def build_case(case: Case) -> tuple[SystemParams, OperatingPoint]:
    """Resolve a Case into concrete parameters and a solved operating point."""
    circ = case.resolved_circuit()
    if case.gains is not None:
        ctrl = case.gains
    else:
        ctrl = design_gains(case.cc_bw, case.pll_bw, case.pll_damping, circ,
                            u_s_mag=case.u_s_mag)
    op = solve_operating_point(circ, ctrl, case.i_ref)
    params = SystemParams(base=case.base, circuit=circ, ctrl=ctrl,
                          i_ref=case.i_ref)
    return params, op
