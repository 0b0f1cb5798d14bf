"""Exact real numbers of the form sum_i c_i * 2**(-b_i) with rational c_i, b_i.

Every value of a representable net at a grid index lives in this set, so all
pointwise inequalities reduce to the sign of an :class:`ExactReal`.

Canonical form: each exponent ``b`` is split as ``floor(b) + f`` with
``0 <= f < 1`` and the integer part is folded into the coefficient.  The
numbers ``2**(-f)`` for distinct ``f`` in ``[0, 1)`` are linearly independent
over the rationals (``x**q - 2`` is irreducible), so the canonical form is
unique and a value is zero iff its canonical form is empty.  Signs of
non-zero values are found by interval refinement.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import gmpy2
from gmpy2 import mpfr

START_PRECISION = 64


def _pow2_int(n: int) -> Fraction:
    """Exact 2**(-n) for integer n."""
    return Fraction(1, 1 << n) if n >= 0 else Fraction(1 << -n)


@lru_cache(maxsize=65536)
def pow2_bounds(f: Fraction, prec: int) -> tuple[Fraction, Fraction]:
    """Rational bounds ``lo <= 2**(-f) <= hi`` with about ``prec`` bits."""
    if f == 0:
        return Fraction(1), Fraction(1)
    u, w = f.numerator, f.denominator
    with gmpy2.context(gmpy2.get_context(), precision=prec, round=gmpy2.RoundUp):
        x_hi = mpfr(u) / w
    with gmpy2.context(gmpy2.get_context(), precision=prec, round=gmpy2.RoundDown):
        x_lo = mpfr(u) / w
        lo = gmpy2.exp2(-x_hi)
    with gmpy2.context(gmpy2.get_context(), precision=prec, round=gmpy2.RoundUp):
        hi = gmpy2.exp2(-x_lo)
    return Fraction(*lo.as_integer_ratio()), Fraction(*hi.as_integer_ratio())


@dataclass(frozen=True)
class ExactReal:
    """Canonical ``sum r * 2**(-f)`` over distinct ``f`` in ``[0, 1)``."""

    parts: tuple[tuple[Fraction, Fraction], ...] = ()

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[Fraction, Fraction]]) -> "ExactReal":
        """Build from ``(coeff, b)`` pairs meaning ``coeff * 2**(-b)``."""
        acc: dict[Fraction, Fraction] = {}
        for c, b in terms:
            if c == 0:
                continue
            if not isinstance(b, Fraction):
                b = Fraction(b)
            if not isinstance(c, Fraction):
                c = Fraction(c)
            n = b.numerator // b.denominator
            f = b - n if n else b
            acc[f] = acc.get(f, 0) + c * _pow2_int(n)
        return cls._from_dict(acc)

    @classmethod
    def _from_dict(cls, acc: dict) -> "ExactReal":
        return cls(tuple(sorted((f, r) for f, r in acc.items() if r != 0)))

    @classmethod
    def rational(cls, q) -> "ExactReal":
        q = Fraction(q)
        return cls(((Fraction(0), q),)) if q else ZERO_REAL

    @classmethod
    def power2(cls, b) -> "ExactReal":
        """The number ``2**(-b)``."""
        return _power2(Fraction(b))

    def __bool__(self) -> bool:
        return bool(self.parts)

    def __add__(self, other: "ExactReal") -> "ExactReal":
        if not other.parts:
            return self
        if not self.parts:
            return other
        acc = dict(self.parts)
        for f, r in other.parts:
            acc[f] = acc.get(f, 0) + r
        return ExactReal._from_dict(acc)

    def __neg__(self) -> "ExactReal":
        return ExactReal(tuple((f, -r) for f, r in self.parts))

    def __sub__(self, other: "ExactReal") -> "ExactReal":
        return self + (-other)

    def __mul__(self, other: "ExactReal") -> "ExactReal":
        if not self.parts or not other.parts:
            return ZERO_REAL
        acc: dict[Fraction, Fraction] = {}
        for f1, r1 in self.parts:
            for f2, r2 in other.parts:
                f, r = f1 + f2, r1 * r2
                if f >= 1:
                    f, r = f - 1, r / 2
                acc[f] = acc.get(f, 0) + r
        return ExactReal._from_dict(acc)

    def scale(self, q) -> "ExactReal":
        q = Fraction(q)
        if q == 0:
            return ZERO_REAL
        return ExactReal(tuple((f, r * q) for f, r in self.parts))

    def is_rational(self) -> bool:
        return not self.parts or (len(self.parts) == 1 and self.parts[0][0] == 0)

    def as_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is irrational")
        return self.parts[0][1] if self.parts else Fraction(0)

    def bounds(self, prec: int = START_PRECISION) -> tuple[Fraction, Fraction]:
        lo = hi = Fraction(0)
        for f, r in self.parts:
            plo, phi = pow2_bounds(f, prec)
            if r > 0:
                lo += r * plo
                hi += r * phi
            else:
                lo += r * phi
                hi += r * plo
        return lo, hi

    def sign(self) -> int:
        parts = self.parts
        if not parts:
            return 0
        if len(parts) == 1:
            return 1 if parts[0][1] > 0 else -1
        prec = START_PRECISION
        while True:
            lo, hi = self.bounds(prec)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            # terminates: the value is non-zero by canonicity
            prec *= 2

    def compare(self, other: "ExactReal") -> int:
        return (self - other).sign()

    def __lt__(self, other: "ExactReal") -> bool:
        return self.compare(other) < 0

    def __le__(self, other: "ExactReal") -> bool:
        return self.compare(other) <= 0

    def __gt__(self, other: "ExactReal") -> bool:
        return self.compare(other) > 0

    def __ge__(self, other: "ExactReal") -> bool:
        return self.compare(other) >= 0

    def __abs__(self) -> "ExactReal":
        return -self if self.sign() < 0 else self

    def to_puiseux(self, k: int) -> "PuiseuxValue":
        """Re-express this number as a value at grid index ``k``."""
        return PuiseuxValue.of((r, f / k) for f, r in self.parts)

    def __float__(self) -> float:
        lo, hi = self.bounds()
        return float((lo + hi) / 2)

    def __str__(self) -> str:
        if not self.parts:
            return "0"
        return " + ".join(str(r) if f == 0 else f"{r}*2^(-{f})" for f, r in self.parts)


ZERO_REAL = ExactReal()


@lru_cache(maxsize=65536)
def _power2(b: Fraction) -> ExactReal:
    return ExactReal.from_terms([(Fraction(1), b)])


@dataclass(frozen=True)
class PuiseuxValue:
    """``sum c * 2**(-k*a)`` at a fixed grid index ``k`` (``k`` not stored)."""

    pairs: tuple[tuple[Fraction, Fraction], ...] = ()

    @classmethod
    def of(cls, pairs: Iterable[tuple]) -> "PuiseuxValue":
        acc: dict[Fraction, Fraction] = {}
        for c, a in pairs:
            a = Fraction(a)
            acc[a] = acc.get(a, 0) + Fraction(c)
        return cls(tuple((c, a) for a, c in sorted(acc.items()) if c != 0))

    def real(self, k: int) -> ExactReal:
        return ExactReal.from_terms((c, k * a) for c, a in self.pairs)

    def __bool__(self) -> bool:
        return bool(self.pairs)


def compare_at(u: PuiseuxValue, v: PuiseuxValue, k: int) -> int:
    """Exact sign of ``u - v`` evaluated at grid index ``k``."""
    if k < 1:
        raise ValueError("grid index must be >= 1")
    return (u.real(k) - v.real(k)).sign()
