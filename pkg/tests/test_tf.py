"""Complex-coefficient rational algebra: exact cases and randomized properties."""

import numpy as np
import pytest

from vscstab.errors import PoleError, RationalArithmeticError
from vscstab.tf import CPoly, CRational, arith, conj_coeff, evaluate

RNG_SEED = 20260811
N_DRAWS = 200


def rand_rational(rng, max_deg=4):
    def rand_poly(min_deg=0):
        deg = rng.integers(min_deg, max_deg + 1)
        c = rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)
        c[-1] += 2.0  # keep the leading coefficient away from zero
        return CPoly(c)

    num = rand_poly()
    den = rand_poly()
    return CRational(num, den)


def eval_safe(x, s):
    try:
        return x(s)
    except PoleError:
        return None


# ---------------------------------------------------------------------------
# arithmetic

def test_add_one_over_s():
    one_over_s = CRational(CPoly.one(), CPoly.s())
    total = arith(one_over_s, one_over_s, "add")
    # 2/s after normalization: num/den evaluate identically to 2/s
    for w in (0.3, 1.0, 17.2):
        assert total(1j * w) == pytest.approx(2.0 / (1j * w))


def test_multiplicative_inverse():
    rng = np.random.default_rng(RNG_SEED)
    for _ in range(20):
        x = rand_rational(rng)
        if x.is_zero:
            continue
        prod = arith(x, CRational.const(1.0) / x, "mul")
        s = 0.7 + 1.3j
        assert prod(s) == pytest.approx(1.0)


def test_conjugate_root_product():
    a = CRational(CPoly([1j, 1.0]))       # s + j
    b = CRational(CPoly([-1j, 1.0]))      # s - j
    prod = a * b
    assert prod.num.allclose(CPoly([1.0, 0.0, 1.0]))


def test_division_by_zero_rational():
    x = CRational(CPoly.one(), CPoly.s())
    with pytest.raises(RationalArithmeticError):
        x / CRational.const(0.0)
    with pytest.raises(RationalArithmeticError):
        CRational(CPoly.one(), CPoly.zero())


# ---------------------------------------------------------------------------
# coefficient conjugation

def test_conj_coeff_total_impedance_example():
    w_s = 2 * np.pi * 50.0
    l, r = 0.53 / w_s, 0.01
    z = CRational(CPoly([r + 1j * w_s * l, l]))
    zc = conj_coeff(z)
    assert zc.num.allclose(CPoly([r - 1j * w_s * l, l]))


def test_conj_coeff_real_fixed_point():
    x = CRational(CPoly([1.0, 2.0, 3.0]), CPoly([4.0, 5.0]))
    assert conj_coeff(x).allclose(x)


def test_conj_coeff_involution_and_homomorphism():
    rng = np.random.default_rng(RNG_SEED)
    for _ in range(N_DRAWS):
        x = rand_rational(rng)
        y = rand_rational(rng)
        assert conj_coeff(conj_coeff(x)).allclose(x)
        assert conj_coeff(x * y).allclose(conj_coeff(x) * conj_coeff(y))
        assert conj_coeff(x + y).allclose(conj_coeff(x) + conj_coeff(y))


# ---------------------------------------------------------------------------
# evaluation

def test_eval_one_over_s():
    x = CRational(CPoly.one(), CPoly.s())
    assert evaluate(x, 1j) == pytest.approx(-1j)


def test_eval_pole_error():
    x = CRational(CPoly.one(), CPoly.s())
    with pytest.raises(PoleError):
        evaluate(x, 0.0)


def test_mirror_identity_randomized():
    rng = np.random.default_rng(RNG_SEED + 1)
    checked = 0
    while checked < N_DRAWS:
        x = rand_rational(rng)
        w = float(rng.uniform(0.1, 50.0))
        lhs = eval_safe(conj_coeff(x), 1j * w)
        rhs = eval_safe(x, -1j * w)
        if lhs is None or rhs is None:
            continue
        assert lhs == pytest.approx(np.conj(rhs), rel=1e-12, abs=1e-12)
        checked += 1


def test_degree_bookkeeping_product():
    rng = np.random.default_rng(RNG_SEED + 2)
    for _ in range(N_DRAWS):
        x = rand_rational(rng)
        y = rand_rational(rng)
        if x.is_zero or y.is_zero:
            continue
        prod = x * y
        assert prod.num.degree == x.num.degree + y.num.degree


# ---------------------------------------------------------------------------
# reduction

def test_reduce_cancels_exact_common_factor():
    common = CPoly([2.0 + 1j, 1.0])
    x = CRational(common * CPoly([3.0, 1.0]), common * CPoly([5.0, 0.0, 1.0]))
    red = x.reduce()
    assert red.num.degree == 1
    assert red.den.degree == 2
    s = 0.4 - 2.2j
    assert red(s) == pytest.approx(x(s))


def test_reduce_keeps_distinct_near_pair():
    # a pole/zero pair separated by much more than the cancellation tolerance
    x = CRational(CPoly([-(1.0 + 1e-6), 1.0]), CPoly([-1.0, 1.0]))
    red = x.reduce()
    assert red.num.degree == 1
    assert red.den.degree == 1


def test_normalization_monic_denominator():
    x = CRational(CPoly([2.0, 4.0]), CPoly([6.0, 2.0]))
    assert x.den.coeffs[-1] == pytest.approx(1.0)
    assert x(1j * 3.0) == pytest.approx((2 + 4j * 3) / (6 + 2j * 3))
