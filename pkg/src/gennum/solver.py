"""Intersection witnesses for nested sequences of dressed balls.

The chain builder turns a nested sequence of sharp balls into a sequence of
euclidean models that is nested at every grid index (a proper chain).  The
witness is then read off pointwise, either as the centre of the last model of
a finite prefix or along the diagonal ``x_k := x^(k)_k``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .exact import ExactReal
from .geometry import (
    DEFAULT_WINDOW,
    DressedBall,
    EuclideanModel,
    PreconditionError,
    ball_relation,
    check_condition_E,
    monotone_envelope,
    within,
)
from .nets import AbsDiff, CNet, Const, Min, Power, Prod, Scale, Switch
from .scale import (
    ALL,
    Mask,
    NormalForm,
    Representative,
    ValueNorm,
    ZERO,
    delegate_prefix,
    distance,
    monomial,
    valuation,
)

# lookahead bound when skipping balls of repeated radius in a rule
MAX_DUPLICATE_RUN = 1000


class VerificationError(AssertionError):
    """An exact post-condition check failed at ball ``i``, grid index ``k``."""

    def __init__(self, message: str, i: int | None = None, k: int | None = None):
        super().__init__(f"{message} (i={i}, k={k})")
        self.i = i
        self.k = k


@dataclass(frozen=True)
class RationalFormula:
    """``slope*i + offset`` (affine) or ``limit - scale/i`` (harmonic)."""

    kind: str
    a: Fraction
    b: Fraction

    def __post_init__(self):
        if self.kind not in ("affine", "harmonic"):
            raise ValueError(f"unknown formula kind {self.kind!r}")
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    def __call__(self, i: int) -> Fraction:
        if self.kind == "affine":
            return self.a * i + self.b
        return self.a - self.b / i


class NestedBallSequence:
    """Balls ``i = 1, 2, ...`` given by an explicit list or by a rule.

    The rule form has centres ``x_i = sum_{j<=i} coeff * eps**exponent(j)``
    (restricted to ``mask``) and radii ``e**-rho(i)``.
    """

    def __init__(self, balls: list[DressedBall] | None = None,
                 term: Callable[[int], NormalForm] | None = None,
                 rho: Callable[[int], Fraction] | None = None):
        if (balls is None) == (term is None):
            raise ValueError("give either an explicit ball list or a rule")
        self._balls = list(balls) if balls is not None else None
        self._term = term
        self._rho = rho
        self._sums: list[NormalForm] = [ZERO]
        self._lock = threading.Lock()

    @classmethod
    def from_list(cls, balls) -> "NestedBallSequence":
        return cls(balls=[b if isinstance(b, DressedBall) else DressedBall(*b) for b in balls])

    @classmethod
    def partial_sums(cls, coeff, exponent: Callable[[int], Fraction],
                     rho: Callable[[int], Fraction], mask: Mask = ALL) -> "NestedBallSequence":
        return cls(term=lambda j: monomial(coeff, exponent(j), mask), rho=rho)

    @property
    def length(self) -> int | None:
        return None if self._balls is None else len(self._balls)

    def ball(self, i: int) -> DressedBall | None:
        """The i-th ball (1-based) or ``None`` past the end of a finite list."""
        if i < 1:
            raise IndexError("balls are numbered from 1")
        if self._balls is not None:
            return self._balls[i - 1] if i <= len(self._balls) else None
        with self._lock:
            while len(self._sums) <= i:
                j = len(self._sums)
                self._sums.append(self._sums[-1] + self._term(j))
        return DressedBall(self._sums[i], self._rho(i))


@dataclass(frozen=True)
class NestingReport:
    ok: bool
    checked: int
    failure: int | None = None
    reason: str = ""


def check_nested(seq: NestedBallSequence, n: int) -> NestingReport:
    """Radii non-increasing and ball ``i+1`` inside ball ``i`` for ``i < n``."""
    prev = seq.ball(1)
    for i in range(2, n + 1):
        cur = seq.ball(i)
        if cur is None:
            return NestingReport(True, i - 1)
        if cur.rho < prev.rho:
            return NestingReport(False, i - 1, i, "radius increases")
        if ball_relation(prev, cur) not in ("b2_inside_b1", "equal"):
            return NestingReport(False, i - 1, i, "ball not inside its predecessor")
        prev = cur
    return NestingReport(True, n)


def _half_radius_ok(x1: Representative, rho1: Fraction, c1: CNet, rep2: Representative, k: int) -> bool:
    bound = c1.value(k).scale(Fraction(1, 2)) * ExactReal.power2(k * rho1)
    return within(rep2.value_at(k) - x1.value_at(k), bound)


def _first_index(pred: Callable[[int], bool], start: int = 1) -> int:
    """Smallest ``k >= start`` with ``pred(k)`` for a predicate monotone in ``k``."""
    if pred(start):
        return start
    lo, hi = start, start + 1
    while not pred(hi):
        lo, hi = hi, start + 2 * (hi - start)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _last_failure(pred: Callable[[int], bool], top: int) -> int:
    """Largest ``k < top`` where ``pred`` fails, or 0."""
    for k in range(top - 1, 0, -1):
        if not pred(k):
            return k
    return 0


def _sufficient_index(d: NormalForm, rho: Fraction, lower: ExactReal, start: int = 1) -> int:
    """Smallest ``k >= start`` with ``sum|c| * eps_k**v <= lower * eps_k**rho``, v = valuation(d) > rho."""
    v = valuation(d)
    total = sum(abs(t.coeff) for t in d.terms)
    gap = v - rho
    return _first_index(lambda k: ExactReal.power2(k * gap).scale(total) <= lower, start)


def align_center(m1: EuclideanModel, x2: NormalForm, rho2) -> tuple[CNet, Representative]:
    """Scaling net for ball 1 and a representative of ``x2`` in its half-radius intervals.

    Only the centre and exponent of ``m1`` are used.
    """
    rho2 = Fraction(rho2)
    x1, rho1 = m1.center, m1.rho
    if rho2 <= rho1:
        raise PreconditionError("radii must strictly decrease")
    if ball_relation(DressedBall(x1.base, rho1), DressedBall(x2, rho2)) != "b2_inside_b1":
        raise PreconditionError("second ball is not inside the first")
    rep2 = Representative(x2)
    if distance(x2, x1.base) == ValueNorm(rho1):
        ratio = Prod((AbsDiff(x1, rep2), Power(-rho1)))
        return Scale(2, monotone_envelope(ratio)), rep2
    c1 = Const(1)
    d = x2 - x1.base
    top = x1.stable_from
    if d:
        top = max(top, _sufficient_index(d, rho1, ExactReal.rational(Fraction(1, 2))))
    last = _last_failure(lambda k: _half_radius_ok(x1, rho1, c1, rep2, k), top)
    return c1, delegate_prefix(rep2, last + 1, x1)


def _lower_bound_from(c: CNet, s: int) -> ExactReal:
    # valid for k >= s because condition (E) nets are non-decreasing in k
    return c.value(s)


def containment_threshold(m1: EuclideanModel, m2: EuclideanModel) -> int:
    """Least ``k0`` with ``C2_k eps**rho2 <= C1_k/2 eps**rho1`` for every ``k >= k0``.

    Beyond a structural index the inequality follows from the growth bound of
    ``C2`` and monotonicity of ``C1``; below it every index is checked exactly.
    """
    rho1, rho2 = m1.rho, m2.rho
    if rho2 <= rho1:
        raise PreconditionError("threshold needs rho2 > rho1")
    g = m2.cnet.growth
    if g is None:
        raise PreconditionError(f"no growth bound for {m2.cnet}")
    big, a2, s2 = g
    rate = a2 + rho2 - rho1
    if rate <= 0:
        raise PreconditionError("second scaling net grows too fast")

    def bound_index(s: int) -> int:
        half = _lower_bound_from(m1.cnet, s).scale(Fraction(1, 2))
        return _first_index(lambda k: ExactReal.power2(k * rate).scale(big) <= half, s)

    def settled(s: int) -> bool:
        return bound_index(s) <= s

    top = max(s2, _first_index(settled, 1))

    def holds(k: int) -> bool:
        return m2.radius(k) <= m1.radius(k).scale(Fraction(1, 2))

    return _last_failure(holds, top) + 1


def _nested_at(m1: EuclideanModel, m2: EuclideanModel, k: int) -> bool:
    gap = abs(m2.center.value_at(k) - m1.center.value_at(k))
    return gap + m2.radius(k) <= m1.radius(k)


def apply_reset(m1: EuclideanModel, m2: EuclideanModel, rep3: Representative | None,
                k0: int, window: int = DEFAULT_WINDOW, stage: int | None = None):
    """Repair model 2 and the next centre on ``k < k0`` so model 2 sits inside model 1 everywhere."""
    chat = m2.cnet
    if k0 > 1:
        capped = Scale(Fraction(1, 2), Prod((m1.cnet, Power(m1.rho - m2.rho))))
        cnet = Switch(k0, Min((capped, chat)), chat)
        if rep3 is not None:
            rep3 = delegate_prefix(rep3, k0, m2.center)
    else:
        cnet = chat
    new = EuclideanModel(m2.center, m2.rho, cnet)
    for k in range(1, window + 1):
        if not _nested_at(m1, new, k):
            raise VerificationError("model not nested in predecessor", stage, k)
        if rep3 is not None and not _half_radius_ok(new.center, new.rho, cnet, rep3, k):
            raise VerificationError("next centre outside half-radius interval", stage, k)
    check_condition_E(cnet, window)
    return new, rep3


@dataclass(frozen=True)
class ProperModelChain:
    models: tuple
    thresholds: tuple  # k0 used when resetting model i (1 for the first model)
    raw_index: tuple  # position of each model's ball in the input sequence
    window: int


class _ChainBuilder:
    """Extends a proper chain one ball at a time; stages never change once built."""

    def __init__(self, seq: NestedBallSequence, window: int = DEFAULT_WINDOW):
        self.seq = seq
        self.window = window
        self.balls: list[DressedBall] = []
        self.raw: list[int] = []
        self._next_raw = 1
        self._exhausted = False
        self.models: list[EuclideanModel] = []
        self.thresholds: list[int] = []
        self._pending: Representative | None = None
        self._lock = threading.RLock()

    def _ball(self, i: int) -> DressedBall | None:
        """i-th ball after dropping repeats of equal radius."""
        while len(self.balls) < i and not self._exhausted:
            run = 0
            while True:
                b = self.seq.ball(self._next_raw)
                if b is None:
                    self._exhausted = True
                    break
                raw = self._next_raw
                self._next_raw += 1
                if not self.balls:
                    break
                prev = self.balls[-1]
                rel = ball_relation(prev, b)
                if rel not in ("b2_inside_b1", "equal") or b.rho < prev.rho:
                    raise VerificationError("sequence is not nested", raw, None)
                if b.rho > prev.rho:
                    break
                run += 1
                if run >= MAX_DUPLICATE_RUN and self.seq.length is None:
                    self._exhausted = True
                    b = None
                    break
            if b is None:
                break
            self.balls.append(b)
            self.raw.append(raw)
        return self.balls[i - 1] if i <= len(self.balls) else None

    def model(self, i: int) -> EuclideanModel | None:
        with self._lock:
            while len(self.models) < i:
                if not self._stage():
                    return None
            return self.models[i - 1]

    def _stage(self) -> bool:
        i = len(self.models) + 1
        ball = self._ball(i)
        if ball is None:
            return False
        center = self._pending if i > 1 else Representative(ball.center)
        nxt = self._ball(i + 1)
        placeholder = EuclideanModel(center, ball.rho, Const(1))
        if nxt is not None:
            chat, rep_next = align_center(placeholder, nxt.center, nxt.rho)
        else:
            chat, rep_next = Const(1), None
        m_hat = EuclideanModel(center, ball.rho, chat)
        if i == 1:
            model, k0 = m_hat, 1
            check_condition_E(chat, self.window)
            for k in range(1, self.window + 1):
                if rep_next is not None and not _half_radius_ok(center, ball.rho, chat, rep_next, k):
                    raise VerificationError("next centre outside half-radius interval", i, k)
        else:
            k0 = containment_threshold(self.models[-1], m_hat)
            model, rep_next = apply_reset(self.models[-1], m_hat, rep_next, k0, self.window, i)
        self.models.append(model)
        self.thresholds.append(k0)
        self._pending = rep_next
        return True

    def chain(self, n: int) -> ProperModelChain:
        self.model(n)
        m = min(n, len(self.models))
        return ProperModelChain(tuple(self.models[:m]), tuple(self.thresholds[:m]),
                                tuple(self.raw[:m]), self.window)


def build_proper_models(seq: NestedBallSequence, n: int, window: int = DEFAULT_WINDOW) -> ProperModelChain:
    """Proper chain for the balls among the first ``n`` entries of ``seq``."""
    report = check_nested(seq, n)
    if not report.ok:
        raise PreconditionError(f"sequence not nested at ball {report.failure}: {report.reason}")
    limited = seq if seq.length is not None and seq.length <= n else _Prefix(seq, n)
    return _ChainBuilder(limited, window).chain(n)


class _Prefix(NestedBallSequence):
    def __init__(self, seq: NestedBallSequence, n: int):
        self._inner, self._n = seq, n

    @property
    def length(self):
        return self._n

    def ball(self, i):
        return self._inner.ball(i) if i <= self._n else None


def verify_chain(chain: ProperModelChain, window: int | None = None) -> int:
    """Re-check nesting and half-radius alignment of consecutive models; returns checks done."""
    window = window or chain.window
    count = 0
    ms = chain.models
    for i in range(len(ms) - 1):
        for k in range(1, window + 1):
            if not _nested_at(ms[i], ms[i + 1], k):
                raise VerificationError("chain not nested", i + 2, k)
            if not _half_radius_ok(ms[i].center, ms[i].rho, ms[i].cnet, ms[i + 1].center, k):
                raise VerificationError("centre outside half-radius interval", i + 2, k)
            count += 2
    return count


def intersect_prefix(seq: NestedBallSequence, n: int, window: int = DEFAULT_WINDOW) -> NormalForm:
    """A point in each of the first ``n`` balls, checked by exact valuations."""
    chain = build_proper_models(seq, n, window)
    x = chain.models[-1].center.base
    for i in range(1, n + 1):
        b = seq.ball(i)
        if b is None:
            break
        if valuation(x - b.center) < b.rho:
            raise VerificationError("witness outside ball", i, None)
    return x


@dataclass(frozen=True)
class DiagonalCertificate:
    ball: int
    window: int
    checked: int
    exceptional_below: int  # membership may fail only for k < this index


@dataclass
class LazyWitness:
    """Diagonal net ``x_k := x^(k)_k`` over a lazily extended proper chain."""

    builder: _ChainBuilder
    _memo: dict = field(default_factory=dict)

    def value_at(self, k: int) -> ExactReal:
        v = self._memo.get(k)
        if v is None:
            m = self.builder.model(k)
            if m is None:
                raise VerificationError("sequence ended before the requested index", None, k)
            v = m.center.value_at(k)
            self._memo[k] = v
        return v


def intersect_diagonal(seq: NestedBallSequence, window: int = DEFAULT_WINDOW) -> LazyWitness:
    if seq.length is not None:
        raise PreconditionError("the diagonal witness needs an infinite rule-backed sequence")
    return LazyWitness(_ChainBuilder(seq, window))


def certify(w: LazyWitness, i: int, K: int) -> DiagonalCertificate:
    """Check ``x_k`` against the i-th model for ``i <= k <= K``.

    For ``k >= i`` membership follows from nesting of the chain at index k,
    so the scan is a confirmation; indices ``k < i`` are finitely many and
    therefore negligible.
    """
    m = w.builder.model(i)
    if m is None:
        raise VerificationError("sequence has fewer balls", i, None)
    checked = 0
    for k in range(i, K + 1):
        x_k = w.value_at(k)
        if not within(x_k - m.center.value_at(k), m.radius(k)):
            raise VerificationError("diagonal point outside model", i, k)
        checked += 1
    return DiagonalCertificate(i, K, checked, i)


__all__ = [
    "RationalFormula",
    "NestedBallSequence",
    "NestingReport",
    "check_nested",
    "align_center",
    "containment_threshold",
    "apply_reset",
    "ProperModelChain",
    "build_proper_models",
    "verify_chain",
    "intersect_prefix",
    "intersect_diagonal",
    "certify",
    "LazyWitness",
    "DiagonalCertificate",
    "VerificationError",
]
