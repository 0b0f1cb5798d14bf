"""Expression trees for positive radius-scaling nets ``(C_k)_k``.

Every node evaluates exactly at each grid index to an :class:`ExactReal`.
Besides pointwise values, nodes expose the structural facts needed to certify
asymptotic claims without scanning infinitely many indices:

``eventual``
    a normal form the net coincides with from some index on, if known;
``direction``
    +1 / -1 / 0 when the net is structurally non-decreasing /
    non-increasing / constant in ``k``, ``None`` otherwise;
``growth``
    ``(M, a, s)`` with ``|C_k| <= M * 2**(-k*a)`` for every ``k >= s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce

from .exact import ZERO_REAL, ExactReal
from .scale import (
    INF,
    NormalForm,
    Representative,
    ZERO,
    _from_table,
    monomial,
    valuation,
)


def ceil_log2(q: Fraction) -> int:
    """Some integer ``n`` with ``2**n >= q`` (q > 0), within 2 of optimal."""
    q = Fraction(q)
    return q.numerator.bit_length() - q.denominator.bit_length() + 1


def sign_stable_from(row: dict) -> int:
    """Index from which a branch polynomial has the sign of its leading term."""
    if len(row) < 2:
        return 1
    exps = sorted(row)
    a0, a1 = exps[0], exps[1]
    rest = sum(abs(row[a]) for a in exps[1:])
    ub = ceil_log2(rest / abs(row[a0]))
    return max(1, math.floor(Fraction(ub) / (a1 - a0)) + 1)


def _leading_sign(row: dict) -> int:
    if not row:
        return 0
    return 1 if row[min(row)] > 0 else -1


def _pick_branches(x: NormalForm, y: NormalForm, larger: bool) -> tuple[NormalForm, int]:
    """Eventual pointwise max (``larger``) or min of two real normal forms."""
    L = math.lcm(x.period, y.period)
    d = (x - y).table(L)
    tx, ty = x.table(L), y.table(L)
    rows, s = [], 1
    for r in range(L):
        sg = _leading_sign(d[r])
        s = max(s, sign_stable_from(d[r]))
        x_wins = sg >= 0 if larger else sg <= 0
        rows.append(dict(tx[r] if x_wins else ty[r]))
    return _from_table(rows), s


def _abs_branches(x: NormalForm) -> tuple[NormalForm, int]:
    table = x.table()
    rows, s = [], 1
    for row in table:
        s = max(s, sign_stable_from(row))
        if _leading_sign(row) < 0:
            row = {a: -c for a, c in row.items()}
        rows.append(row)
    return _from_table(rows), s


class CNet:
    """Base class; subclasses are frozen dataclasses."""

    def value(self, k: int) -> ExactReal:
        memo = self._memo
        v = memo.get(k)
        if v is None:
            # racing writers store identical values, so plain dict use is safe
            v = self._compute(k)
            memo[k] = v
        return v

    def _compute(self, k: int) -> ExactReal:
        raise NotImplementedError

    @cached_property
    def eventual(self):
        return None

    @cached_property
    def direction(self):
        return None

    @cached_property
    def nonneg(self) -> bool:
        return False

    @cached_property
    def growth(self):
        return None


def _memo_field():
    return field(default_factory=dict, compare=False, repr=False)


@dataclass(frozen=True)
class Const(CNet):
    q: Fraction
    _memo: dict = _memo_field()

    def __post_init__(self):
        object.__setattr__(self, "q", Fraction(self.q))

    def _compute(self, k):
        return ExactReal.rational(self.q)

    @cached_property
    def eventual(self):
        return NormalForm.constant(self.q), 1

    @cached_property
    def direction(self):
        return 0

    @cached_property
    def nonneg(self):
        return self.q >= 0

    @cached_property
    def growth(self):
        return abs(self.q), Fraction(0), 1

    def __str__(self):
        return f"const({self.q})"


@dataclass(frozen=True)
class Power(CNet):
    """The net ``eps**a``."""

    a: Fraction
    _memo: dict = _memo_field()

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))

    def _compute(self, k):
        return ExactReal.power2(k * self.a)

    @cached_property
    def eventual(self):
        return monomial(1, self.a), 1

    @cached_property
    def direction(self):
        return 0 if self.a == 0 else (1 if self.a < 0 else -1)

    @cached_property
    def nonneg(self):
        return True

    @cached_property
    def growth(self):
        return Fraction(1), self.a, 1

    def __str__(self):
        return f"power({self.a})"


@dataclass(frozen=True)
class AbsDiff(CNet):
    """``|r1_k - r2_k|`` for two representatives."""

    r1: Representative
    r2: Representative
    _memo: dict = _memo_field()

    def _compute(self, k):
        return abs(self.r1.value_at(k) - self.r2.value_at(k))

    @cached_property
    def _diff(self) -> NormalForm:
        return self.r1.base - self.r2.base

    @cached_property
    def _stable(self) -> int:
        return max(self.r1.stable_from, self.r2.stable_from)

    @cached_property
    def eventual(self):
        form, s = _abs_branches(self._diff)
        return form, max(s, self._stable)

    @cached_property
    def direction(self):
        return 0 if self.r1 == self.r2 else None

    @cached_property
    def nonneg(self):
        return True

    @cached_property
    def growth(self):
        d = self._diff
        if not d:
            return Fraction(0), Fraction(0), self._stable
        return sum(abs(t.coeff) for t in d.terms), valuation(d), self._stable

    def __str__(self):
        return f'absdiff("{_rep_str(self.r1)}", "{_rep_str(self.r2)}")'


def _rep_str(r: Representative) -> str:
    s = str(r.base)
    return s if not r.overrides else f"{s} [patched below {r.stable_from}]"


def _fold_dirs(dirs) -> int | None:
    ds = set(dirs)
    if None in ds:
        return None
    ds.discard(0)
    if not ds:
        return 0
    return ds.pop() if len(ds) == 1 else None


@dataclass(frozen=True)
class Sum(CNet):
    children: tuple
    _memo: dict = _memo_field()

    def _compute(self, k):
        return reduce(lambda acc, c: acc + c.value(k), self.children, ZERO_REAL)

    @cached_property
    def eventual(self):
        evs = [c.eventual for c in self.children]
        if any(e is None for e in evs):
            return None
        return reduce(lambda a, b: a + b, (e[0] for e in evs), ZERO), max(e[1] for e in evs)

    @cached_property
    def direction(self):
        return _fold_dirs(c.direction for c in self.children)

    @cached_property
    def nonneg(self):
        return all(c.nonneg for c in self.children)

    @cached_property
    def growth(self):
        gs = [c.growth for c in self.children]
        if any(g is None for g in gs):
            return None
        return sum(g[0] for g in gs), min(g[1] for g in gs), max(g[2] for g in gs)

    def __str__(self):
        return f"sum({', '.join(map(str, self.children))})"


@dataclass(frozen=True)
class Prod(CNet):
    children: tuple
    _memo: dict = _memo_field()

    def _compute(self, k):
        return reduce(lambda acc, c: acc * c.value(k), self.children, ExactReal.rational(1))

    @cached_property
    def eventual(self):
        evs = [c.eventual for c in self.children]
        if any(e is None for e in evs):
            return None
        return reduce(lambda a, b: a * b, (e[0] for e in evs)), max(e[1] for e in evs)

    @cached_property
    def direction(self):
        if not self.nonneg:
            return None
        d = _fold_dirs(c.direction for c in self.children)
        return d if d in (0, 1) else None

    @cached_property
    def nonneg(self):
        return all(c.nonneg for c in self.children)

    @cached_property
    def growth(self):
        gs = [c.growth for c in self.children]
        if any(g is None for g in gs):
            return None
        return math.prod(g[0] for g in gs), sum(g[1] for g in gs), max(g[2] for g in gs)

    def __str__(self):
        return f"prod({', '.join(map(str, self.children))})"


@dataclass(frozen=True)
class Scale(CNet):
    q: Fraction
    child: CNet
    _memo: dict = _memo_field()

    def __post_init__(self):
        object.__setattr__(self, "q", Fraction(self.q))

    def _compute(self, k):
        return self.child.value(k).scale(self.q)

    @cached_property
    def eventual(self):
        e = self.child.eventual
        return None if e is None else (e[0].scale(self.q), e[1])

    @cached_property
    def direction(self):
        d = self.child.direction
        if self.q == 0 or d == 0:
            return 0
        return None if d is None else (d if self.q > 0 else -d)

    @cached_property
    def nonneg(self):
        return self.q == 0 or (self.q > 0 and self.child.nonneg)

    @cached_property
    def growth(self):
        g = self.child.growth
        return None if g is None else (abs(self.q) * g[0], g[1], g[2])

    def __str__(self):
        return f"scale({self.q}, {self.child})"


class _Extremum(CNet):
    larger: bool

    def _compute(self, k):
        vals = [c.value(k) for c in self.children]
        return max(vals) if self.larger else min(vals)

    @cached_property
    def eventual(self):
        evs = [c.eventual for c in self.children]
        if any(e is None for e in evs) or not all(e[0].is_real for e in evs):
            return None
        form, s = evs[0]
        for e in evs[1:]:
            form, s2 = _pick_branches(form, e[0], self.larger)
            s = max(s, s2, e[1])
        return form, s

    @cached_property
    def direction(self):
        return _fold_dirs(c.direction for c in self.children)

    @cached_property
    def growth(self):
        gs = [c.growth for c in self.children]
        if not self.larger and self.nonneg:
            gs = [g for g in gs if g is not None]
            if not gs:
                return None
            return max(gs, key=lambda g: (g[1], -g[0]))
        if any(g is None for g in gs):
            return None
        return max(g[0] for g in gs), min(g[1] for g in gs), max(g[2] for g in gs)


@dataclass(frozen=True)
class Max(_Extremum):
    children: tuple
    _memo: dict = _memo_field()
    larger = True

    @cached_property
    def nonneg(self):
        return any(c.nonneg for c in self.children)

    def __str__(self):
        return f"max({', '.join(map(str, self.children))})"


@dataclass(frozen=True)
class Min(_Extremum):
    children: tuple
    _memo: dict = _memo_field()
    larger = False

    @cached_property
    def nonneg(self):
        return all(c.nonneg for c in self.children)

    def __str__(self):
        return f"min({', '.join(map(str, self.children))})"


@dataclass(frozen=True)
class Envelope(CNet):
    """Running maximum ``max_{j <= k} C_j``."""

    child: CNet
    _memo: dict = _memo_field()

    def _compute(self, k):
        memo = self._memo
        j = k - 1
        while j >= 1 and j not in memo:
            j -= 1
        acc = memo[j] if j >= 1 else None
        for i in range(j + 1, k):
            c = self.child.value(i)
            acc = c if acc is None or c > acc else acc
            memo[i] = acc
        c = self.child.value(k)
        return c if acc is None or c > acc else acc

    @cached_property
    def eventual(self):
        e = self.child.eventual
        if e is None:
            return None
        if self.child.direction in (0, 1):
            return e
        form, s = e
        if not form.is_real:
            return None
        consts = []
        for row in form.table():
            if any(a != 0 for a in row):
                return None
            consts.append(row.get(Fraction(0), Fraction(0)))
        top = ExactReal.rational(max(consts))
        for j in range(1, s):
            top = max(top, self.child.value(j))
        if not top.is_rational():
            return None
        return NormalForm.constant(top.as_rational()), s + form.period - 1

    @cached_property
    def direction(self):
        return 0 if self.child.direction == 0 else 1

    @cached_property
    def nonneg(self):
        return self.child.nonneg or self.value(1).sign() >= 0

    @cached_property
    def growth(self):
        g = self.child.growth
        if g is None:
            return None
        m, a, s = g
        prefix = max([abs(self.child.value(j)).bounds()[1] for j in range(1, s + 1)])
        return max(prefix, m), min(a, Fraction(0)), s

    def __str__(self):
        return f"env({self.child})"


@dataclass(frozen=True)
class Switch(CNet):
    """``before`` on indices ``k < k0``, ``after`` from ``k0`` on."""

    k0: int
    before: CNet
    after: CNet
    _memo: dict = _memo_field()

    def _compute(self, k):
        return (self.before if k < self.k0 else self.after).value(k)

    @cached_property
    def eventual(self):
        e = self.after.eventual
        return None if e is None else (e[0], max(e[1], self.k0))

    @cached_property
    def direction(self):
        if self.k0 <= 1:
            return self.after.direction
        db, da = self.before.direction, self.after.direction
        if db in (0, 1) and da in (0, 1):
            if self.before.value(self.k0 - 1) <= self.after.value(self.k0):
                return 1
        return None

    @cached_property
    def nonneg(self):
        return self.before.nonneg and self.after.nonneg

    @cached_property
    def growth(self):
        g = self.after.growth
        return None if g is None else (g[0], g[1], max(g[2], self.k0))

    def __str__(self):
        return f"switch({self.k0}, {self.before}, {self.after})"


def net_valuation(c: CNet):
    """Valuation of the class of ``c``; ``None`` when not determinable."""
    e = c.eventual
    if e is not None:
        return valuation(e[0])
    if isinstance(c, Scale):
        return INF if c.q == 0 else net_valuation(c.child)
    if isinstance(c, Switch):
        return net_valuation(c.after)
    if isinstance(c, Envelope):
        v = net_valuation(c.child)
        if v is None:
            return None
        if v == INF:
            return Fraction(0) if c.value(1).sign() > 0 else None
        return min(v, Fraction(0))
    if isinstance(c, (Sum, Max)) and all(_eventually_nonneg(ch) for ch in c.children):
        # no cancellation between eventually non-negative summands
        vs = [net_valuation(ch) for ch in c.children]
        return None if any(v is None for v in vs) else min(vs)
    if isinstance(c, Prod):
        # exact when every factor but one is an eventual monomial on all indices
        rest, total = [], Fraction(0)
        for ch in c.children:
            e = ch.eventual
            if e is not None and len(e[0].terms) == 1 and e[0].terms[0].mask.is_all:
                total += e[0].terms[0].exponent
            else:
                rest.append(ch)
        if len(rest) == 1:
            v = net_valuation(rest[0])
            return None if v is None else v + total
    return None


def _eventually_nonneg(c: CNet) -> bool:
    return c.nonneg or eventual_positive(c) is not None


def eventual_positive(c: CNet):
    """Index from which ``c`` is certainly positive, or ``None``."""
    e = c.eventual
    if e is None or not e[0].is_real:
        return None
    form, s = e
    for row in form.table():
        if _leading_sign(row) <= 0:
            return None
        s = max(s, sign_stable_from(row))
    return s


__all__ = [
    "CNet",
    "Const",
    "Power",
    "AbsDiff",
    "Sum",
    "Prod",
    "Scale",
    "Min",
    "Max",
    "Envelope",
    "Switch",
    "net_valuation",
    "eventual_positive",
    "ceil_log2",
    "sign_stable_from",
]
