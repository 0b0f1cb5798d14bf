"""Sharp balls and their euclidean models.

A euclidean model of the dressed ball ``B(x, e**-rho)`` is the pointwise family
of real intervals ``[x_k - C_k eps_k**rho, x_k + C_k eps_k**rho]`` where the
scaling net ``C`` is positive, non-decreasing in ``k`` and of sharp norm 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .exact import ExactReal
from .nets import (
    AbsDiff,
    CNet,
    Const,
    Envelope,
    Max,
    Power,
    Prod,
    Scale,
    Sum,
    ceil_log2,
    eventual_positive,
    net_valuation,
)
from .scale import (
    INF,
    NormalForm,
    Representative,
    ValueNorm,
    distance,
    monomial,
    patch_real,
    valuation,
)

DEFAULT_WINDOW = 256


class PreconditionError(ValueError):
    """A mathematical precondition of an operation does not hold."""


class UnsupportedNet(ValueError):
    pass


@dataclass(frozen=True)
class DressedBall:
    center: NormalForm
    rho: Fraction

    def __post_init__(self):
        object.__setattr__(self, "rho", Fraction(self.rho))

    @property
    def radius(self) -> ValueNorm:
        return ValueNorm(self.rho)

    def contains(self, y: NormalForm) -> bool:
        return distance(y, self.center) <= self.radius


@dataclass(frozen=True)
class StrippedBall(DressedBall):
    def contains(self, y: NormalForm) -> bool:
        return distance(y, self.center) < self.radius


@dataclass(frozen=True)
class Sphere(DressedBall):
    def contains(self, y: NormalForm) -> bool:
        return distance(y, self.center) == self.radius


def ball_relation(b1: DressedBall, b2: DressedBall) -> str:
    d = distance(b1.center, b2.center)
    two_in_one = b2.rho >= b1.rho and d <= b1.radius
    one_in_two = b1.rho >= b2.rho and d <= b2.radius
    if two_in_one and one_in_two:
        return "equal"
    if two_in_one:
        return "b2_inside_b1"
    if one_in_two:
        return "b1_inside_b2"
    return "disjoint"


class ConditionEFailure(ValueError):
    def __init__(self, clause: str, witness):
        super().__init__(f"condition (E) fails: {clause} (witness {witness})")
        self.clause = clause
        self.witness = witness


@dataclass(frozen=True)
class ConditionECertificate:
    window: int
    monotonicity: str  # "structural" or "prefix-only"
    positivity: str  # "structural", "eventual" or "prefix-only"
    valuation: Fraction

    def lines(self) -> list[str]:
        return [
            f"window: {self.window}",
            f"monotonicity: {self.monotonicity}",
            f"positivity: {self.positivity}",
            f"valuation: {self.valuation}",
        ]


def check_condition_E(c: CNet, K: int = DEFAULT_WINDOW) -> ConditionECertificate:
    """Certify positivity, monotone growth as eps -> 0 and sharp norm 1.

    Raises :class:`ConditionEFailure` naming the first violated clause.
    """
    for k in range(1, K + 1):
        if c.value(k).sign() <= 0:
            raise ConditionEFailure("positivity", k)
    if c.direction in (0, 1):
        mono = "structural"
    else:
        prev = c.value(1)
        for k in range(2, K + 1):
            cur = c.value(k)
            if cur < prev:
                raise ConditionEFailure("monotonicity", k)
            prev = cur
        mono = "prefix-only"
    if mono == "structural":
        pos = "structural"
    else:
        s = eventual_positive(c)
        if s is None:
            pos = "prefix-only"
        else:
            for k in range(K + 1, s):
                if c.value(k).sign() <= 0:
                    raise ConditionEFailure("positivity", k)
            pos = "eventual"
    v = net_valuation(c)
    if v is None:
        raise ConditionEFailure("valuation", "undetermined")
    if v != 0:
        raise ConditionEFailure("valuation", v)
    return ConditionECertificate(K, mono, pos, Fraction(0))


def monotone_envelope(c: CNet) -> CNet:
    """Running maximum of ``max(1, c)``; idempotent."""
    if isinstance(c, Envelope) and isinstance(c.child, Max) and Const(1) in c.child.children:
        return c
    return Envelope(Max((Const(1), c)))


@dataclass(frozen=True)
class EuclideanModel:
    center: Representative
    rho: Fraction
    cnet: CNet

    def __post_init__(self):
        object.__setattr__(self, "rho", Fraction(self.rho))

    @property
    def ball(self) -> DressedBall:
        return DressedBall(self.center.base, self.rho)

    def radius(self, k: int) -> ExactReal:
        return self.cnet.value(k) * ExactReal.power2(k * self.rho)

    def certify(self, K: int = DEFAULT_WINDOW) -> ConditionECertificate:
        return check_condition_E(self.cnet, K)


def within(d: ExactReal, bound: ExactReal) -> bool:
    """``|d| <= bound`` decided exactly."""
    return d <= bound and -d <= bound


def default_model(b: DressedBall, rep: Representative | None = None) -> EuclideanModel:
    rep = rep or Representative(b.center)
    if rep.base != b.center:
        raise PreconditionError("representative is not of the ball's center class")
    return EuclideanModel(rep, b.rho, Const(1))


def model_member_at(m: EuclideanModel, r: Representative, k: int) -> bool:
    return within(r.value_at(k) - m.center.value_at(k), m.radius(k))


def member_margin(m: EuclideanModel, r: Representative, k: int) -> ExactReal:
    """Distance from ``r_k`` to the boundary of the k-th interval (negative outside)."""
    return m.radius(k) - abs(r.value_at(k) - m.center.value_at(k))


def _lower_at_one(c: CNet) -> Fraction:
    lo = c.value(1).bounds()[0]
    if lo <= 0:
        raise PreconditionError("scaling net is not positive at k = 1")
    return lo


def inside_from(d: NormalForm, rho: Fraction, c: CNet, factor: Fraction = Fraction(1)) -> int:
    """Index from which ``|d_k| <= factor * C_k * eps_k**rho`` is guaranteed.

    Needs ``valuation(d) > rho`` and ``C`` non-decreasing, so that
    ``C_k >= C_1`` bounds the right side from below.
    """
    v = valuation(d)
    if v == INF:
        return 1
    if v <= rho:
        raise PreconditionError("difference is not of higher order than the radius")
    total = sum(abs(t.coeff) for t in d.terms)
    ub = ceil_log2(total / (factor * _lower_at_one(c)))
    return max(1, math.ceil(Fraction(ub) / (v - rho)))


def capture_representative(m: EuclideanModel, y: NormalForm) -> Representative:
    """Representative of ``y`` lying in every interval of the model.

    ``y`` must be strictly inside the sharp ball.  Indices below the
    structural threshold are checked exactly and repaired by ``y_k := x_k``.
    """
    if not distance(y, m.center.base) < ValueNorm(m.rho):
        raise PreconditionError("point is not in the stripped ball")
    rep = Representative(y)
    top = max(m.center.stable_from, inside_from(y - m.center.base, m.rho, m.cnet))
    for k in range(1, top):
        if not model_member_at(m, rep, k):
            rep = patch_real(rep, k, m.center.value_at(k))
    return rep


def _eventual_or_raise(c: CNet):
    e = c.eventual
    if e is None or not e[0].is_real:
        raise UnsupportedNet(f"no eventual normal form for {c}")
    return e


def escaping_sphere_point(m: EuclideanModel) -> NormalForm:
    """Class of ``x + 2 C eps**rho``: on the sphere, outside every model interval."""
    form, _ = _eventual_or_raise(m.cnet)
    y = m.center.base + form * monomial(2, m.rho)
    if distance(y, m.center.base) != ValueNorm(m.rho):
        raise UnsupportedNet("scaling net does not have sharp norm 1")
    return y


def escaping_representative(m: EuclideanModel) -> Representative:
    """Representative of :func:`escaping_sphere_point` equal to ``x_k + 2 C_k eps_k**rho`` at every k."""
    y = escaping_sphere_point(m)
    _, s = _eventual_or_raise(m.cnet)
    rep = Representative(y)
    for k in range(1, max(s, m.center.stable_from)):
        want = m.center.value_at(k) + m.radius(k).scale(2)
        if rep.value_at(k) != want:
            rep = patch_real(rep, k, want)
    return rep


def blow_up_model(m: EuclideanModel, y: Representative) -> EuclideanModel:
    """Enlarge the model so that it holds ``y`` with margin ``C_hat_k / 2 * eps_k**rho``."""
    if not distance(y.base, m.center.base) <= ValueNorm(m.rho):
        raise PreconditionError("point is outside the dressed ball")
    ratio = Prod((AbsDiff(y, m.center), Power(-m.rho)))
    widened = Sum((monotone_envelope(ratio), m.cnet))
    return EuclideanModel(m.center, m.rho, Scale(2, widened))
