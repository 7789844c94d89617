"""Coupled sequence impedances of the PLL-synchronized converter.

Everything is expressed with complex-coefficient rationals in per-unit,
s in rad/s.  The PLL couples the positive and negative sequence networks;
the coupling is folded into a single ratio r so that each sequence becomes
an independent SISO loop with impedance z_loop = (1 - r)(z_c + z_grid).
The same model also yields the 2x2 coupled source matrix, the eigenvalues
of the minor-loop gain for the generalized Nyquist route, and the
generalized (Schur-complement) loop impedances.

The transfer functions are assembled from hand-factored polynomial pieces
rather than blind rational arithmetic, so shared structural factors never
enter numerator and denominator redundantly; the resulting degrees are the
minimal ones (z_loop is degree 8 over 7) and root-based pole/zero counting
stays reliable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSystemError, ModelConstructionError, PoleError
from .model import OperatingPoint, SystemParams
from .tf import CPoly, CRational


def dq_to_sequence(u_d: complex, u_q: complex) -> tuple[complex, complex]:
    """Symmetrical decomposition of a dq pair at one frequency."""
    return (u_d + 1j * u_q) / 2.0, (u_d - 1j * u_q) / 2.0


def sequence_to_dq(u_p: complex, u_n: complex) -> tuple[complex, complex]:
    """Inverse of dq_to_sequence."""
    return u_p + u_n, -1j * (u_p - u_n)


@dataclass(frozen=True)
class SequenceModel:
    """The complete transfer-function set of one operating point."""

    h_i: CRational
    h_pll: CRational
    g_pll: CRational
    c_pll: CRational
    z_grid_p: CRational
    z_grid_n: CRational
    d_pll: CRational
    z_c_p: CRational
    z_c_n: CRational
    z_sigma: CRational
    r: CRational
    gamma: CRational
    z_loop_p: CRational
    z_loop_n: CRational
    gnc_det: CRational           # det(I + Z_source * Z_conv^-1)
    source_pp: CRational         # coupled source matrix entries, gamma included
    source_pn: CRational
    source_np: CRational
    source_nn: CRational
    params: SystemParams
    op_point: OperatingPoint


def build_model(params: SystemParams, op: OperatingPoint) -> SequenceModel:
    """Assemble every sequence-domain transfer function for one operating point."""
    ws = params.base.omega_s
    circ, ctrl = params.circuit, params.ctrl
    lf_h = circ.l_filter / ws
    lsum_h = circ.l_total / ws
    km = circ.k_m
    cosd = np.cos(op.delta_pll0)
    us = ctrl.u_s_mag
    u0 = op.u_s0_pll
    i0 = op.i_c0

    s = CPoly.s()
    # current PI scaled by the filter inductance
    A = CPoly([ctrl.ki_cc * lf_h, ctrl.kp_cc * lf_h])
    # PLL PI numerator and the closed PLL-loop denominator
    Pg = CPoly([ctrl.ki_pll, ctrl.kp_pll])
    B = km * cosd * Pg + (km + 1.0) * s * s
    # angle-perturbation gain of the circuit equation
    K = CPoly([-1j * u0, 1j * lsum_h * i0])
    # total series impedance
    z_sigma_num = CPoly([circ.r_total + 1j * circ.l_total, lsum_h])
    T = us * B + 0.5j * (K * Pg)
    if T.is_zero:
        raise ModelConstructionError("1 + j*C_pll/2 is identically zero")
    S = A * T + us * (s * z_sigma_num * B)
    if S.is_zero:
        raise ModelConstructionError("z_c + z_grid is identically zero")
    KPg = K * Pg
    N_r = 0.25 * (KPg * KPg.conj()) * (A * A.conj())
    X = S * S.conj() - N_r
    W = T * T.conj() - 0.25 * (KPg * KPg.conj())
    if W.is_zero:
        raise ModelConstructionError("1 - |D_pll|^2 is identically zero")

    h_i = CRational(A, s)
    h_pll = CRational(Pg, us * s)
    g_pll = CRational(Pg, us * B)
    c_pll = CRational(KPg, us * B)
    z_sigma = CRational(z_sigma_num)
    z_grid_p = CRational(z_sigma_num * (us * B), T)
    d_pll = CRational(0.5j * KPg, T)
    r = CRational(N_r, S * S.conj())
    gamma = CRational(T * T.conj(), W)
    z_loop_p = CRational(X, s * T * S.conj())
    z_loop_n = CRational(X, s * T.conj() * S)
    gnc_det = CRational(X, (T * T.conj()) * (A * A.conj()))
    usB = us * B
    source_pp = CRational(T.conj() * z_sigma_num * usB, W)
    source_pn = CRational(0.5j * (z_sigma_num.conj() * usB) * KPg, W)

    return SequenceModel(
        h_i=h_i,
        h_pll=h_pll,
        g_pll=g_pll,
        c_pll=c_pll,
        z_grid_p=z_grid_p,
        z_grid_n=z_grid_p.conj_coeff(),
        d_pll=d_pll,
        z_c_p=h_i,
        z_c_n=h_i.conj_coeff(),
        z_sigma=z_sigma,
        r=r,
        gamma=gamma,
        z_loop_p=z_loop_p,
        z_loop_n=z_loop_n,
        gnc_det=gnc_det,
        source_pp=source_pp,
        source_pn=source_pn,
        source_np=source_pn.conj_coeff(),
        source_nn=source_pp.conj_coeff(),
        params=params,
        op_point=op,
    )


def coupling_ratio(model: SequenceModel, reading: str = "p") -> CRational:
    """The ratio r rebuilt through generic rational arithmetic.

    reading 'p' uses positive-sequence quantities inside the magnitudes,
    reading 'n' the negative-sequence ones.  Both are mathematically the
    same rational because every factor pairs with its own coefficient
    conjugate; this helper exists so tests can verify that.
    """
    if reading == "p":
        zc, zg = model.z_c_p, model.z_grid_p
    elif reading == "n":
        zc, zg = model.z_c_n, model.z_grid_n
    else:
        raise ValueError("reading must be 'p' or 'n'")
    d2 = model.d_pll * model.d_pll.conj_coeff()
    zc2 = zc * zc.conj_coeff()
    ssum = zc + zg
    return (d2 * zc2) / (ssum * ssum.conj_coeff())


@dataclass(frozen=True)
class FreqMatrix2:
    """A 2x2 complex matrix sampled at one Laplace point."""

    entries: np.ndarray
    frequency: complex

    def __post_init__(self):
        if self.entries.shape != (2, 2):
            raise ValueError("entries must be 2x2")
        if not np.all(np.isfinite(self.entries)):
            raise PoleError(self.frequency, "non-finite matrix entry")


def source_matrix(model: SequenceModel, s: complex) -> FreqMatrix2:
    """The coupled source impedance matrix at s, gamma prefactor included."""
    m = np.array(
        [
            [model.source_pp(s), model.source_pn(s)],
            [model.source_np(s), model.source_nn(s)],
        ],
        dtype=complex,
    )
    return FreqMatrix2(entries=m, frequency=s)


def converter_matrix(model: SequenceModel, s: complex) -> FreqMatrix2:
    """The diagonal converter impedance matrix at s."""
    m = np.array(
        [[model.z_c_p(s), 0.0], [0.0, model.z_c_n(s)]], dtype=complex
    )
    return FreqMatrix2(entries=m, frequency=s)


def minor_loop_matrix(model: SequenceModel, s: complex) -> np.ndarray:
    """Source matrix times the inverse converter matrix at s."""
    zc_p, zc_n = model.z_c_p(s), model.z_c_n(s)
    if zc_p == 0 or zc_n == 0:
        raise PoleError(s, "converter matrix singular")
    src = source_matrix(model, s).entries
    return src @ np.diag([1.0 / zc_p, 1.0 / zc_n])


def gnc_eigenvalues(model: SequenceModel, s: complex):
    """Eigenvalues of the minor-loop gain at s.

    Primary result: roots of the characteristic quadratic of the assembled
    2x2 matrix.  The closed-form expression with the radical
    sqrt(gamma^2 (a+a*)^2 - 4 |a|^2) is also evaluated; analytic_agrees
    records whether it matches the quadratic roots to 1e-6 relative (it
    generally does not once the PLL couples the sequences, because the
    closed form misses a gamma under the radical).
    """
    m = minor_loop_matrix(model, s)
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = np.sqrt(tr * tr - 4.0 * det)
    roots = np.array([(tr + disc) / 2.0, (tr - disc) / 2.0])
    # order by proximity to the decoupled positive-sequence value
    a = model.z_grid_p(s) / model.z_c_p(s)
    if abs(roots[1] - a) < abs(roots[0] - a):
        roots = roots[::-1]
    # closed-form variant as printed (gamma outside the |a|^2 term)
    ac = model.z_grid_n(s) / model.z_c_n(s)
    gam = model.gamma(s)
    disc_v = np.sqrt(gam ** 2 * (a + ac) ** 2 - 4.0 * a * ac)
    verb = np.array(
        [(gam * a + gam * ac + disc_v) / 2.0, (gam * a + gam * ac - disc_v) / 2.0]
    )
    scale = max(np.max(np.abs(roots)), 1e-30)
    d1 = max(abs(verb[0] - roots[0]), abs(verb[1] - roots[1]))
    d2 = max(abs(verb[0] - roots[1]), abs(verb[1] - roots[0]))
    analytic_agrees = bool(min(d1, d2) <= 1e-6 * scale)
    return roots[0], roots[1], analytic_agrees


@dataclass(frozen=True)
class GasinInput:
    """Source and load 2x2 rational impedance matrices (pp, pn, np, nn)."""

    z_source: tuple
    z_load: tuple


def gasin_loop(inp: GasinInput) -> tuple[CRational, CRational]:
    """Generalized loop impedances via Schur complements of source + load."""
    zsum = [
        [inp.z_source[i][j] + inp.z_load[i][j] for j in range(2)]
        for i in range(2)
    ]
    if zsum[1][1].is_zero:
        raise DegenerateSystemError("nn sum identically zero")
    if zsum[0][0].is_zero:
        raise DegenerateSystemError("pp sum identically zero")
    cross = zsum[0][1] * zsum[1][0]
    z_g_p = zsum[0][0] - cross / zsum[1][1]
    z_g_n = zsum[1][1] - cross / zsum[0][0]
    return z_g_p.reduce(), z_g_n.reduce()


def gasin_input_from_model(model: SequenceModel) -> GasinInput:
    """Coupled source matrix plus the diagonal converter load."""
    zero = CRational(CPoly.zero())
    return GasinInput(
        z_source=(
            (model.source_pp, model.source_pn),
            (model.source_np, model.source_nn),
        ),
        z_load=((model.z_c_p, zero), (zero, model.z_c_n)),
    )
