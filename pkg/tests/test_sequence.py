"""Sequence model construction: limits, identities, and cross-checks."""

import numpy as np
import pytest
from dataclasses import replace

from vscstab.model import Case, build_case
from vscstab.sequence import (
    build_model,
    converter_matrix,
    coupling_ratio,
    dq_to_sequence,
    gasin_input_from_model,
    gasin_loop,
    gnc_eigenvalues,
    minor_loop_matrix,
    sequence_to_dq,
    source_matrix,
)
from vscstab.tf import CPoly, CRational

CASE = Case()          # Table-like defaults: SCR 3, 200 Hz / 13 Hz, 0.707


@pytest.fixture(scope="module")
def model():
    return build_model(*build_case(CASE))


@pytest.fixture(scope="module")
def frozen():
    return build_model(*build_case(replace(CASE, pll_bw=0.0)))


def grid(n=200, lo=0.1, hi=1000.0):
    return 1j * 2 * np.pi * np.logspace(np.log10(lo), np.log10(hi), n)


# ---------------------------------------------------------------------------
# symmetrical decomposition

def test_dq_to_sequence_examples():
    assert dq_to_sequence(1.0, 0.0) == (0.5, 0.5)
    assert dq_to_sequence(0.0, 1.0) == (0.5j, -0.5j)
    up, un = dq_to_sequence(1.0, -1j)   # u_p = (1 + j*(-j))/2 = 1
    assert up == pytest.approx(1.0)
    assert un == pytest.approx(0.0)


def test_sequence_round_trip():
    rng = np.random.default_rng(3)
    for _ in range(50):
        ud, uq = rng.normal() + 1j * rng.normal(), rng.normal() + 1j * rng.normal()
        up, un = dq_to_sequence(ud, uq)
        back = sequence_to_dq(up, un)
        assert back[0] == pytest.approx(ud)
        assert back[1] == pytest.approx(uq)


# ---------------------------------------------------------------------------
# frozen-PLL decoupling

def test_frozen_pll_decouples(frozen):
    s = grid()
    assert np.allclose(frozen.g_pll(s), 0.0)
    assert np.allclose(frozen.c_pll(s), 0.0)
    assert np.allclose(frozen.d_pll(s), 0.0)
    assert np.allclose(frozen.r(s), 0.0)
    assert np.allclose(frozen.z_grid_p(s), frozen.z_sigma(s), rtol=1e-12)
    direct = frozen.h_i(s) + frozen.z_sigma(s)
    assert np.allclose(frozen.z_loop_p(s), direct, rtol=1e-10)


def test_d_pll_decays_above_pll_bandwidth(model):
    f = np.logspace(2, 3, 50)       # 100 Hz .. 1 kHz
    mags = np.abs(model.d_pll(1j * 2 * np.pi * f))
    assert np.all(np.diff(mags) < 0)
    assert mags[-1] < 0.1 * np.abs(model.d_pll(1j * 2 * np.pi * 13.0))


# ---------------------------------------------------------------------------
# conjugate-mirror structure

def test_negative_fields_are_coefficient_conjugates(model):
    assert model.z_grid_n.allclose(model.z_grid_p.conj_coeff())
    assert model.z_c_n.allclose(model.z_c_p.conj_coeff())
    assert model.z_loop_n.allclose(model.z_loop_p.conj_coeff())


def test_negative_loop_built_independently(model):
    # assemble (1 - r)(z_c_n + z_grid_n) through generic arithmetic
    alt = (CRational.const(1.0) - model.r) * (model.z_c_n + model.z_grid_n)
    s = grid()
    assert np.allclose(alt(s), model.z_loop_n(s), rtol=1e-9)


def test_coupling_ratio_p_and_n_readings_agree(model):
    rp = coupling_ratio(model, "p")
    rn = coupling_ratio(model, "n")
    s = grid(80)
    assert np.allclose(rp(s), rn(s), rtol=1e-9)
    assert np.allclose(rp(s), model.r(s), rtol=1e-9)


def test_gamma_matches_definition(model):
    dd = model.d_pll * model.d_pll.conj_coeff()
    s = grid(80)
    assert np.allclose(model.gamma(s), 1.0 / (1.0 - dd(s)), rtol=1e-9)


def test_coupling_gain_may_exceed_unity_while_gamma_stays_finite(model):
    # |D_pll| < 1 is NOT assumed; at low frequency it does exceed one here,
    # and gamma must still evaluate finite everywhere on the grid
    s = grid(400)
    mags = np.abs(model.d_pll(s))
    assert mags.max() > 1.0
    g = model.gamma(s)
    assert np.all(np.isfinite(g))


# ---------------------------------------------------------------------------
# loop impedance vs the coupled-network solve (independent oracle)

def test_loop_impedance_matches_network_solve(model):
    s = grid(500)
    zg, zgn = model.z_grid_p(s), model.z_grid_n(s)
    zc, zcn = model.z_c_p(s), model.z_c_n(s)
    d, dn = model.d_pll(s), model.d_pll.conj_coeff()(s)
    z_alt = np.empty_like(s)
    for k in range(len(s)):
        a = np.array(
            [[zg[k] + zc[k], -d[k] * zcn[k]],
             [-dn[k] * zc[k], zgn[k] + zcn[k]]])
        i_p, i_n = np.linalg.solve(a, np.array([-1.0, 0.0]))
        z_couple = d[k] * (-zcn[k] * i_n) / i_p
        z_alt[k] = zc[k] + zg[k] + z_couple
    assert np.allclose(model.z_loop_p(s), z_alt, rtol=1e-9)


# ---------------------------------------------------------------------------
# coupled matrices and eigenvalues

def test_source_matrix_decoupled_limit(frozen):
    s = 1j * 2 * np.pi * 37.0
    m = source_matrix(frozen, s).entries
    assert m[0, 1] == pytest.approx(0.0, abs=1e-15)
    assert m[1, 0] == pytest.approx(0.0, abs=1e-15)
    assert m[0, 0] == pytest.approx(frozen.z_sigma(s))
    assert frozen.gamma(s) == pytest.approx(1.0)


def test_source_matrix_offdiagonal_ratio(model):
    for f in (3.0, 17.0, 130.0):
        s = 1j * 2 * np.pi * f
        m = source_matrix(model, s).entries
        assert m[0, 1] / m[1, 1] == pytest.approx(model.d_pll(s), rel=1e-10)


def test_source_matrix_mirror_consistency(model):
    # entry(1,0) at s equals conj of entry(0,1) at conj(s) mirrored
    for f in (3.0, 17.0, 130.0):
        s = 1j * 2 * np.pi * f
        m = source_matrix(model, s).entries
        m_neg = source_matrix(model, np.conj(s)).entries
        assert m[1, 0] == pytest.approx(np.conj(m_neg[0, 1]), rel=1e-10)


def test_converter_matrix_diagonal(model):
    s = 1j * 2 * np.pi * 11.0
    m = converter_matrix(model, s).entries
    assert m[0, 1] == 0.0 and m[1, 0] == 0.0
    assert m[0, 0] == pytest.approx(model.h_i(s))


def test_gnc_eigenvalues_match_brute_force(model):
    rng = np.random.default_rng(11)
    for _ in range(25):
        s = 1j * 2 * np.pi * float(rng.uniform(0.5, 800.0))
        l1, l2, _ = gnc_eigenvalues(model, s)
        brute = np.linalg.eigvals(minor_loop_matrix(model, s))
        got = sorted([l1, l2], key=lambda z: (z.real, z.imag))
        want = sorted(brute, key=lambda z: (z.real, z.imag))
        scale = max(abs(want[0]), abs(want[1]))
        assert abs(got[0] - want[0]) <= 1e-9 * scale
        assert abs(got[1] - want[1]) <= 1e-9 * scale


def test_gnc_eigenvalue_product_is_determinant(model):
    for f in (1.0, 23.0, 310.0):
        s = 1j * 2 * np.pi * f
        l1, l2, _ = gnc_eigenvalues(model, s)
        m = minor_loop_matrix(model, s)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        assert l1 * l2 == pytest.approx(det, rel=1e-9)


def test_gnc_decoupled_eigenvalues(frozen):
    s = 1j * 2 * np.pi * 29.0
    l1, l2, agrees = gnc_eigenvalues(frozen, s)
    assert l1 == pytest.approx(frozen.z_grid_p(s) / frozen.h_i(s))
    assert l2 == pytest.approx(frozen.z_grid_n(s) / frozen.z_c_n(s))
    assert agrees   # with no coupling the closed form loses nothing


def test_gnc_closed_form_discrepancy_is_flagged(model):
    # with PLL coupling the printed closed form misses a gamma under the
    # radical; the flag must report the disagreement
    disagreements = 0
    for f in (5.0, 15.0, 30.0):
        _, _, agrees = gnc_eigenvalues(model, 1j * 2 * np.pi * f)
        disagreements += 0 if agrees else 1
    assert disagreements > 0


# ---------------------------------------------------------------------------
# generalized network reduction

def test_gasin_diagonal_limit():
    zero = CRational(CPoly.zero())
    a = CRational(CPoly([1.0, 2.0]))
    b = CRational(CPoly([3.0, 0.5]))
    load = ((CRational.const(2.0), zero), (zero, CRational.const(4.0)))
    src = ((a, zero), (zero, b))
    z_p, z_n = gasin_loop(type("I", (), {"z_source": src, "z_load": load}))
    s = grid(40)
    assert np.allclose(z_p(s), a(s) + 2.0)
    assert np.allclose(z_n(s), b(s) + 4.0)


def test_gasin_swap_symmetry(model):
    inp = gasin_input_from_model(model)
    z_p, z_n = gasin_loop(inp)
    swapped = type(inp)(
        z_source=((inp.z_source[1][1], inp.z_source[1][0]),
                  (inp.z_source[0][1], inp.z_source[0][0])),
        z_load=((inp.z_load[1][1], inp.z_load[1][0]),
                (inp.z_load[0][1], inp.z_load[0][0])),
    )
    w_p, w_n = gasin_loop(swapped)
    s = grid(60)
    assert np.allclose(w_p(s), z_n(s), rtol=1e-8)
    assert np.allclose(w_n(s), z_p(s), rtol=1e-8)


def test_gasin_vs_augmented_loop_pointwise_gap(model):
    # measured outcome: the generalized reduction and the augmented loop
    # impedance are NOT pointwise equal (they differ by a regular factor);
    # the stability verdicts must nevertheless agree (tested elsewhere)
    z_p, _ = gasin_loop(gasin_input_from_model(model))
    s = grid(200)
    gap = np.max(np.abs(z_p(s) - model.z_loop_p(s)) / np.abs(model.z_loop_p(s)))
    print(f"\nmax relative pointwise gap gasin vs augmented loop: {gap:.3f}")
    assert gap > 1e-3   # genuinely different functions
