"""Rational functions of the Laplace variable with complex coefficients.

The coefficient-conjugation operator conjugates every coefficient while
leaving the Laplace variable untouched, so for example the conjugate of
``L*s + (R + j*w*L)`` is ``L*s + (R - j*w*L)``.  It is an involution and a
ring homomorphism, and on the imaginary axis it satisfies the mirror
identity ``eval(conj_coeff(X), j*w) == conj(eval(X, -j*w))``.

Rationals are kept in expanded polynomial form (degrees in this package
stay small).  No silent pole/zero cancellation happens during arithmetic;
``CRational.reduce`` cancels only root pairs that coincide to 1e-12,
because sloppier cancellation could hide right-half-plane pole/zero pairs
that the stability criteria must see.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import PoleError, RationalArithmeticError

def _as_coeff_array(coeffs) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("coefficients must be a non-empty 1-d sequence")
    return arr


def _trim(arr: np.ndarray) -> np.ndarray:
    # Only exact zeros are dropped.  With s in rad/s the coefficient
    # dynamic range legitimately spans many orders of magnitude, so any
    # relative threshold would destroy true leading coefficients.
    keep = np.nonzero(arr != 0.0)[0]
    if keep.size == 0:
        return np.zeros(1, dtype=complex)
    return arr[: keep[-1] + 1].copy()


class CPoly:
    """Polynomial in s with complex coefficients, ascending powers."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = _trim(_as_coeff_array(coeffs))

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls) -> "CPoly":
        return cls([0.0])

    @classmethod
    def one(cls) -> "CPoly":
        return cls([1.0])

    @classmethod
    def s(cls) -> "CPoly":
        return cls([0.0, 1.0])

    # -- structure ----------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0.0

    def conj(self) -> "CPoly":
        return CPoly(np.conj(self.coeffs))

    def roots(self) -> np.ndarray:
        if self.degree == 0:
            return np.zeros(0, dtype=complex)
        return np.roots(self.coeffs[::-1])

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        other = _coerce_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        out = np.zeros(n, dtype=complex)
        out[: len(self.coeffs)] += self.coeffs
        out[: len(other.coeffs)] += other.coeffs
        return CPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return CPoly(-self.coeffs)

    def __sub__(self, other):
        return self + (-_coerce_poly(other))

    def __rsub__(self, other):
        return _coerce_poly(other) + (-self)

    def __mul__(self, other):
        other = _coerce_poly(other)
        if self.is_zero or other.is_zero:
            return CPoly.zero()
        return CPoly(np.convolve(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    # -- evaluation ---------------------------------------------------
    def __call__(self, s):
        return npoly.polyval(np.asarray(s, dtype=complex), self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, CPoly):
            return NotImplemented
        return (
            len(self.coeffs) == len(other.coeffs)
            and bool(np.all(self.coeffs == other.coeffs))
        )

    def allclose(self, other, rtol=1e-12, atol=1e-300) -> bool:
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        pa = np.zeros(n, complex)
        pb = np.zeros(n, complex)
        pa[: len(a)] = a
        pb[: len(b)] = b
        scale = max(np.abs(pa).max(), np.abs(pb).max(), atol)
        return bool(np.all(np.abs(pa - pb) <= rtol * scale + atol))

    def __repr__(self):
        return f"CPoly({np.array2string(self.coeffs, separator=', ')})"


def _coerce_poly(x) -> CPoly:
    if isinstance(x, CPoly):
        return x
    if np.isscalar(x):
        return CPoly([x])
    raise TypeError(f"cannot coerce {type(x).__name__} to CPoly")


class CRational:
    """Ratio of two CPoly, normalized so the denominator is monic."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = _coerce_poly(num)
        den = CPoly.one() if den is None else _coerce_poly(den)
        if den.is_zero:
            raise RationalArithmeticError("denominator is the zero polynomial")
        lead = den.coeffs[-1]
        self.num = CPoly(num.coeffs / lead)
        self.den = CPoly(den.coeffs / lead)

    # -- constructors -------------------------------------------------
    @classmethod
    def const(cls, c) -> "CRational":
        return cls(CPoly([c]))

    @classmethod
    def s(cls) -> "CRational":
        return cls(CPoly.s())

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        other = _coerce_rational(other)
        return CRational(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __neg__(self):
        return CRational(-self.num, self.den)

    def __sub__(self, other):
        return self + (-_coerce_rational(other))

    def __rsub__(self, other):
        return _coerce_rational(other) + (-self)

    def __mul__(self, other):
        other = _coerce_rational(other)
        return CRational(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce_rational(other)
        if other.is_zero:
            raise RationalArithmeticError("division by the zero rational")
        return CRational(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return _coerce_rational(other) / self

    # -- the conjugation operator --------------------------------------
    def conj_coeff(self) -> "CRational":
        return CRational(self.num.conj(), self.den.conj())

    # -- evaluation ---------------------------------------------------
    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        d = self.den(s)
        if np.any(d == 0.0):
            bad = s[d == 0.0] if s.ndim else s
            raise PoleError(bad)
        out = self.num(s) / d
        if not np.all(np.isfinite(out)):
            bad = s[~np.isfinite(out)] if s.ndim else s
            raise PoleError(bad, f"non-finite evaluation at s = {bad}")
        return out

    # -- simplification -----------------------------------------------
    def reduce(self, tol=1e-12) -> "CRational":
        """Cancel numerator/denominator root pairs coinciding within tol.

        Matching is relative: roots r_n, r_d cancel when
        |r_n - r_d| <= tol * (1 + |r_n|).  Polynomials are rebuilt from the
        surviving roots, preserving leading coefficients.
        """
        if self.num.is_zero or self.num.degree == 0 or self.den.degree == 0:
            return self
        rn = list(self.num.roots())
        rd = list(self.den.roots())
        kept_n = []
        for r in rn:
            hit = None
            for k, q in enumerate(rd):
                if abs(r - q) <= tol * (1.0 + abs(r)):
                    hit = k
                    break
            if hit is None:
                kept_n.append(r)
            else:
                rd.pop(hit)
        if len(kept_n) == len(rn):
            return self
        lead_n = self.num.coeffs[-1]
        num = CPoly(lead_n * np.atleast_1d(np.poly(kept_n))[::-1]) if kept_n else CPoly([lead_n])
        den = CPoly(np.atleast_1d(np.poly(rd))[::-1]) if rd else CPoly.one()
        return CRational(num, den)

    def allclose(self, other, rtol=1e-12) -> bool:
        return self.num.allclose(other.num, rtol) and self.den.allclose(other.den, rtol)

    def __repr__(self):
        return f"CRational(num={self.num!r}, den={self.den!r})"


def _coerce_rational(x) -> CRational:
    if isinstance(x, CRational):
        return x
    if isinstance(x, CPoly) or np.isscalar(x):
        return CRational(_coerce_poly(x))
    raise TypeError(f"cannot coerce {type(x).__name__} to CRational")


def arith(a: CRational, b: CRational, op: str) -> CRational:
    """Dispatch helper: op is one of 'add', 'sub', 'mul', 'div'."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def conj_coeff(x: CRational) -> CRational:
    """Conjugate every coefficient; the Laplace variable is untouched."""
    return x.conj_coeff()


def evaluate(x: CRational, s) -> complex:
    """Evaluate x at Laplace point(s) s (rad/s); raises PoleError at poles."""
    return x(s)
