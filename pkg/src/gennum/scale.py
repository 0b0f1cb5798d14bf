"""Exact arithmetic on a representable subring of the generalized numbers.

A generalized number is stored as a finite asymptotic expansion
``sum c_i * eps**a_i`` where each term is active only on a periodic set of
grid indices (its mask).  The parameter runs over the grid ``eps_k = 2**-k``.
Masks are what make zero divisors representable: the indicator of the even
indices times the indicator of the odd indices is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Union

from .exact import ExactReal, PuiseuxValue

INF = math.inf


@dataclass(frozen=True)
class Gaussian:
    """Gaussian rational ``re + im*i``; only built when ``im != 0``."""

    re: Fraction
    im: Fraction

    def __add__(self, other):
        o = _as_gauss(other)
        return make_coeff(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return Gaussian(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-_as_gauss(other))

    def __rsub__(self, other):
        return _as_gauss(other) + (-self)

    def __mul__(self, other):
        o = _as_gauss(other)
        return make_coeff(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return False
        if not isinstance(other, Gaussian):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return True

    def __abs__(self):
        raise TypeError("no exact modulus for Gaussian coefficients")

    def __str__(self):
        return f"({self.re}{'+' if self.im > 0 else '-'}{abs(self.im)}i)"


def _as_gauss(x) -> Gaussian:
    if isinstance(x, Gaussian):
        return x
    return Gaussian(Fraction(x), Fraction(0))


def make_coeff(re, im=0):
    """Rational when the imaginary part vanishes, else :class:`Gaussian`."""
    re, im = Fraction(re), Fraction(im)
    return re if im == 0 else Gaussian(re, im)


Coeff = Union[Fraction, Gaussian]


def _coeff_key(c) -> tuple:
    return (c.re, c.im) if isinstance(c, Gaussian) else (c, Fraction(0))


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


@dataclass(frozen=True)
class Mask:
    """Periodic index set ``{k : k mod modulus in residues}``."""

    modulus: int
    residues: frozenset

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("mask modulus must be positive")
        res = frozenset(int(r) for r in self.residues)
        if not res:
            raise ValueError("mask residue set must be non-empty")
        if any(r < 0 or r >= self.modulus for r in res):
            raise ValueError(f"residues must lie in 0..{self.modulus - 1}")
        object.__setattr__(self, "residues", res)

    @classmethod
    def of(cls, modulus: int, residues: Iterable[int]) -> "Mask":
        """Mask in canonical form (least modulus for the same index set)."""
        res = frozenset(r % modulus for r in residues)
        for d in _divisors(modulus):
            if all((r + d) % modulus in res for r in res):
                return cls(d, frozenset(r % d for r in res))
        raise AssertionError("unreachable")

    def selects(self, k: int) -> bool:
        return k % self.modulus in self.residues

    @property
    def is_all(self) -> bool:
        return self.modulus == 1

    def __str__(self):
        return f"mod({self.modulus},{','.join(str(r) for r in sorted(self.residues))})"


ALL = Mask(1, frozenset({0}))


@dataclass(frozen=True)
class Term:
    coeff: Coeff
    exponent: Fraction
    mask: Mask = ALL

    def __post_init__(self):
        if not isinstance(self.coeff, Gaussian):
            object.__setattr__(self, "coeff", Fraction(self.coeff))
        object.__setattr__(self, "exponent", Fraction(self.exponent))
        if self.coeff == 0:
            raise ValueError("term coefficient must be non-zero")


# branch table: one {exponent: coeff} dict per residue modulo the period
Table = list


def _table_period(table: Table) -> int:
    n = len(table)
    for d in _divisors(n):
        if all(table[r] == table[r % d] for r in range(n)):
            return d
    return n


def _from_table(table: Table) -> "NormalForm":
    d = _table_period(table)
    groups: dict[tuple, set] = {}
    for r in range(d):
        for a, c in table[r].items():
            groups.setdefault((a, c), set()).add(r)
    terms = [Term(c, a, Mask.of(d, res)) for (a, c), res in groups.items()]
    terms.sort(key=_term_key)
    return NormalForm(tuple(terms))


def _term_key(t: Term) -> tuple:
    return (t.exponent, t.mask.modulus, tuple(sorted(t.mask.residues)), _coeff_key(t.coeff))


@dataclass(frozen=True)
class NormalForm:
    """Canonical finite expansion; structural equality is class equality."""

    terms: tuple = ()

    @cached_property
    def period(self) -> int:
        return reduce(math.lcm, (t.mask.modulus for t in self.terms), 1)

    def table(self, modulus: int | None = None) -> Table:
        """Per-residue ``{exponent: coeff}`` dicts; ``modulus`` must be a multiple of the period."""
        L = modulus or self.period
        out: Table = [dict() for _ in range(L)]
        for t in self.terms:
            m = t.mask.modulus
            for r in range(L):
                if r % m in t.mask.residues:
                    out[r][t.exponent] = t.coeff
        return out

    @classmethod
    def constant(cls, q) -> "NormalForm":
        return monomial(q, 0)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: "NormalForm") -> "NormalForm":
        return ring_op("add", self, other)

    def __sub__(self, other: "NormalForm") -> "NormalForm":
        return ring_op("sub", self, other)

    def __mul__(self, other: "NormalForm") -> "NormalForm":
        return ring_op("mul", self, other)

    def __neg__(self) -> "NormalForm":
        return ring_op("neg", self)

    def scale(self, q) -> "NormalForm":
        return self * NormalForm.constant(q) if q else ZERO

    @property
    def is_real(self) -> bool:
        return not any(isinstance(t.coeff, Gaussian) for t in self.terms)

    @property
    def mask_free(self) -> bool:
        return all(t.mask.is_all for t in self.terms)

    @cached_property
    def _values(self) -> dict:
        return {}

    def value_at(self, k: int) -> ExactReal:
        v = self._values.get(k)
        if v is None:
            v = self._values[k] = self.puiseux_at(k).real(k)
        return v

    def puiseux_at(self, k: int) -> PuiseuxValue:
        if not self.is_real:
            raise TypeError("pointwise evaluation needs real coefficients")
        return PuiseuxValue.of((t.coeff, t.exponent) for t in self.terms if t.mask.selects(k))

    def __str__(self) -> str:
        from .dsl import format_expression

        return format_expression(self)


ZERO = NormalForm()


def monomial(c, a, mask: Mask = ALL) -> NormalForm:
    return canonicalize([Term(c, a, mask)]) if c != 0 else ZERO


def canonicalize(terms: Iterable[Term]) -> NormalForm:
    """Merge, cancel and reorder terms into the canonical normal form."""
    terms = [t for t in terms if t.coeff != 0]
    if not terms:
        return ZERO
    L = reduce(math.lcm, (t.mask.modulus for t in terms), 1)
    table: Table = [dict() for _ in range(L)]
    for t in terms:
        m = t.mask.modulus
        for r in range(L):
            if r % m in t.mask.residues:
                row = table[r]
                row[t.exponent] = row.get(t.exponent, 0) + t.coeff
    for row in table:
        for a in [a for a, c in row.items() if c == 0]:
            del row[a]
    return _from_table(table)


def ring_op(kind: str, x: NormalForm, y: NormalForm | None = None) -> NormalForm:
    """``kind`` is one of add, sub, mul, neg."""
    if kind == "neg":
        return NormalForm(tuple(Term(-t.coeff, t.exponent, t.mask) for t in x.terms))
    if y is None:
        raise TypeError(f"{kind} needs two operands")
    if kind == "sub":
        return ring_op("add", x, ring_op("neg", y))
    if kind == "add":
        if not y:
            return x
        if not x:
            return y
        return canonicalize(list(x.terms) + list(y.terms))
    if kind == "mul":
        if not x or not y:
            return ZERO
        L = math.lcm(x.period, y.period)
        tx, ty = x.table(L), y.table(L)
        out: Table = []
        for px, py in zip(tx, ty):
            row: dict = {}
            for a1, c1 in px.items():
                for a2, c2 in py.items():
                    row[a1 + a2] = row.get(a1 + a2, 0) + c1 * c2
            out.append({a: c for a, c in row.items() if c != 0})
        return _from_table(out)
    raise ValueError(f"unknown ring operation {kind!r}")


def valuation(x: NormalForm):
    """Largest b with |x_eps| = O(eps**b); ``INF`` for zero."""
    if not x.terms:
        return INF
    return min(t.exponent for t in x.terms)


@dataclass(frozen=True)
class ValueNorm:
    """Zero (``rho is None``) or ``e**(-rho)``."""

    rho: Fraction | None = None

    def __post_init__(self):
        if self.rho is not None:
            object.__setattr__(self, "rho", Fraction(self.rho))

    @classmethod
    def exp_neg(cls, rho) -> "ValueNorm":
        return cls(Fraction(rho))

    @property
    def is_zero(self) -> bool:
        return self.rho is None

    def _key(self) -> tuple:
        return (0, 0) if self.rho is None else (1, -self.rho)

    def __lt__(self, other: "ValueNorm") -> bool:
        return self._key() < other._key()

    def __le__(self, other: "ValueNorm") -> bool:
        return self._key() <= other._key()

    def __gt__(self, other: "ValueNorm") -> bool:
        return self._key() > other._key()

    def __ge__(self, other: "ValueNorm") -> bool:
        return self._key() >= other._key()

    def __mul__(self, other: "ValueNorm") -> "ValueNorm":
        if self.rho is None or other.rho is None:
            return NORM_ZERO
        return ValueNorm(self.rho + other.rho)

    def __str__(self) -> str:
        if self.rho is None:
            return "0"
        if self.rho == 0:
            return "e^0"
        if self.rho > 0:
            return f"e^-{self.rho}"
        return f"e^{-self.rho}"


NORM_ZERO = ValueNorm()
NORM_ONE = ValueNorm(Fraction(0))


def sharp_norm(x: NormalForm) -> ValueNorm:
    v = valuation(x)
    return NORM_ZERO if v == INF else ValueNorm(v)


def distance(x: NormalForm, y: NormalForm) -> ValueNorm:
    return sharp_norm(x - y)


def annihilator_witness(x: NormalForm) -> NormalForm | None:
    """Non-zero ``y`` with ``x*y == 0`` supported on the zero branches of ``x``."""
    if not x:
        raise ValueError("annihilator_witness needs a non-zero argument")
    L = x.period
    empty = [r for r, row in enumerate(x.table(L)) if not row]
    if not empty:
        return None
    return monomial(1, 0, Mask.of(L, empty))


@dataclass(frozen=True)
class Patch:
    k: int
    value: PuiseuxValue


@dataclass(frozen=True)
class PrefixDelegate:
    """For every ``k < k0`` take the value of ``source`` at ``k``."""

    k0: int
    source: "Representative"


@dataclass(frozen=True)
class Representative:
    """A concrete net: the base expansion with finitely many index overrides.

    Overrides are applied newest first.  A prefix delegate stands for the
    finite family of patches ``k -> source_k`` for ``k < k0``.
    """

    base: NormalForm
    overrides: tuple = ()

    @classmethod
    def of(cls, x: NormalForm) -> "Representative":
        return cls(x)

    @property
    def patches(self) -> dict:
        """Explicit per-index patches (latest wins)."""
        out: dict = {}
        for o in self.overrides:
            if isinstance(o, Patch):
                out[o.k] = o.value
        return out

    @cached_property
    def stable_from(self) -> int:
        """First index from which every value comes from the base."""
        s = 1
        for o in self.overrides:
            s = max(s, o.k + 1 if isinstance(o, Patch) else o.k0)
        return s

    def _source(self, k: int):
        rep = self
        while True:
            for o in reversed(rep.overrides):
                if isinstance(o, Patch):
                    if o.k == k:
                        return o.value
                elif k < o.k0:
                    rep = o.source
                    break
            else:
                return rep.base

    def value_at(self, k: int) -> ExactReal:
        src = self._source(k)
        if isinstance(src, PuiseuxValue):
            return src.real(k)
        return src.value_at(k)

    def overridden_indices(self) -> list[int]:
        """Indices whose value does not come from the base expansion."""
        return [k for k in range(1, self.stable_from) if self._source(k) is not self.base]

    def eval_at(self, k: int) -> PuiseuxValue:
        src = self._source(k)
        return src if isinstance(src, PuiseuxValue) else src.puiseux_at(k)


def eval_at(r: Representative, k: int) -> PuiseuxValue:
    if k < 1:
        raise ValueError("grid index must be >= 1")
    return r.eval_at(k)


def class_of(r: Representative) -> NormalForm:
    return r.base


def patch_representative(r: Representative, k: int, value: PuiseuxValue) -> Representative:
    if k < 1:
        raise ValueError("grid index must be >= 1")
    kept = tuple(o for o in r.overrides if not (isinstance(o, Patch) and o.k == k))
    return Representative(r.base, kept + (Patch(k, value),))


def patch_real(r: Representative, k: int, value: ExactReal) -> Representative:
    return patch_representative(r, k, value.to_puiseux(k))


def delegate_prefix(r: Representative, k0: int, source: Representative) -> Representative:
    """Override ``r`` by ``source`` on every index ``k < k0``."""
    if k0 <= 1:
        return r
    kept = tuple(o for o in r.overrides if not (isinstance(o, Patch) and o.k < k0))
    return Representative(r.base, kept + (PrefixDelegate(k0, source),))

