"""Norm-preserving one-step extension of functionals over the subfield L = Q(alpha).

Elements of L are fractions of mask-free expansions.  Leading coefficients of
mask-free expansions are non-zero rationals, so products never cancel at the
leading order and the sharp norm is multiplicative on L.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .geometry import PreconditionError
from .scale import NORM_ZERO, NormalForm, ValueNorm, ZERO, monomial, valuation

ONE = NormalForm.constant(1)


@dataclass(frozen=True, eq=False)
class GenFrac:
    """``num / den`` with ``den`` normalized to leading term ``1 * eps**0``."""

    num: NormalForm
    den: NormalForm = ONE

    def __post_init__(self):
        if not self.num.mask_free or not self.den.mask_free:
            raise ValueError("elements of L must be mask-free")
        if not self.den:
            raise ZeroDivisionError("zero denominator")
        lead = self.den.terms[0]
        if lead.exponent != 0 or lead.coeff != 1:
            unit = monomial(1 / Fraction(lead.coeff), -lead.exponent)
            object.__setattr__(self, "num", self.num * unit)
            object.__setattr__(self, "den", self.den * unit)

    @classmethod
    def of(cls, x) -> "GenFrac":
        if isinstance(x, GenFrac):
            return x
        if isinstance(x, NormalForm):
            return cls(x)
        return cls(NormalForm.constant(x))

    def __eq__(self, other) -> bool:
        if not isinstance(other, GenFrac):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        # the leading exponent of num is a class invariant once den is normalized
        return hash(valuation(self.num))

    def __bool__(self) -> bool:
        return bool(self.num)

    def __add__(self, other: "GenFrac") -> "GenFrac":
        return frac_ops("add", self, other)

    def __sub__(self, other: "GenFrac") -> "GenFrac":
        return frac_ops("add", self, frac_ops("neg", other))

    def __mul__(self, other: "GenFrac") -> "GenFrac":
        return frac_ops("mul", self, other)

    def __neg__(self) -> "GenFrac":
        return frac_ops("neg", self)

    def __str__(self) -> str:
        if self.den == ONE:
            return str(self.num)
        return f"({self.num})/({self.den})"


def frac_ops(kind: str, p: GenFrac, q: GenFrac | None = None) -> GenFrac:
    if kind == "add":
        return GenFrac(p.num * q.den + q.num * p.den, p.den * q.den)
    if kind == "mul":
        return GenFrac(p.num * q.num, p.den * q.den)
    if kind == "neg":
        return GenFrac(-p.num, p.den)
    if kind == "inv":
        if not p:
            raise ZeroDivisionError("inverse of zero")
        return GenFrac(p.den, p.num)
    raise ValueError(f"unknown operation {kind!r}")


def frac_norm(p: GenFrac) -> ValueNorm:
    if not p:
        return NORM_ZERO
    return ValueNorm(valuation(p.num) - valuation(p.den))


ALPHA = GenFrac(monomial(1, 1))


@dataclass(frozen=True)
class LVector:
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(GenFrac.of(c) for c in self.coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def _check(self, other: "LVector"):
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")

    def __add__(self, other: "LVector") -> "LVector":
        self._check(other)
        return LVector(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "LVector") -> "LVector":
        self._check(other)
        return LVector(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def scale(self, lam) -> "LVector":
        lam = GenFrac.of(lam)
        return LVector(tuple(lam * c for c in self.coords))

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.coords) + ")"


def vector_norm(x: LVector) -> ValueNorm:
    return max((frac_norm(c) for c in x.coords), default=NORM_ZERO)


@dataclass(frozen=True)
class LFunctional:
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(GenFrac.of(c) for c in self.coeffs))


def functional_apply(phi: LFunctional, x: LVector) -> GenFrac:
    if len(phi.coeffs) != x.dim:
        raise ValueError("dimension mismatch")
    out = GenFrac(ZERO)
    for lam, c in zip(phi.coeffs, x.coords):
        out = out + lam * c
    return out


@dataclass(frozen=True)
class HBBall:
    center: GenFrac
    radius: ValueNorm

    def contains(self, y: GenFrac) -> bool:
        return frac_norm(y - self.center) <= self.radius


@dataclass(frozen=True)
class BallFamily:
    balls: tuple
    order: tuple  # sample indices sorted from the smallest ball outwards
    pair_checks: int


def hb_ball_family(phi: LFunctional, norm_bound: ValueNorm, a: LVector,
                   samples: Sequence[LVector]) -> BallFamily:
    """Balls ``B(phi(x), |phi| * |x - a|)`` over the samples, checked pairwise comparable."""
    balls = []
    for idx, x in enumerate(samples):
        fx = functional_apply(phi, x)
        if not frac_norm(fx) <= norm_bound * vector_norm(x):
            raise PreconditionError(f"sample {idx} violates the asserted norm bound")
        gap = vector_norm(x - a)
        if gap.is_zero:
            raise PreconditionError(f"sample {idx} coincides with a")
        balls.append(HBBall(fx, norm_bound * gap))
    checks = 0
    for i in range(len(balls)):
        for j in range(i + 1, len(balls)):
            d = frac_norm(balls[i].center - balls[j].center)
            if not d <= max(balls[i].radius, balls[j].radius):
                raise PreconditionError(f"samples {i} and {j} give incomparable balls")
            checks += 1
    order = tuple(sorted(range(len(balls)), key=lambda i: (balls[i].radius, i)))
    return BallFamily(tuple(balls), order, checks)


@dataclass(frozen=True)
class ExtensionReport:
    alpha: GenFrac
    family: BallFamily
    membership_checks: int
    inequality_checks: int


def hb_extend(phi: LFunctional, norm_bound: ValueNorm, a: LVector, samples: Sequence[LVector],
              test_vectors: Sequence[tuple[LVector, GenFrac]]) -> tuple[GenFrac, ExtensionReport]:
    """Value ``psi(a) := alpha`` of a norm-preserving extension to ``V + L a``.

    ``alpha`` is the centre of the smallest ball; every test vector ``(z, lam)``
    with ``z`` in V is checked against ``|psi(z - lam a)| <= |phi| |z - lam a|``.
    """
    fam = hb_ball_family(phi, norm_bound, a, samples)
    if not fam.balls:
        raise PreconditionError("no samples")
    alpha = fam.balls[fam.order[0]].center
    for idx, b in enumerate(fam.balls):
        if not b.contains(alpha):
            raise PreconditionError(f"alpha is outside the ball of sample {idx}")
    count = 0
    for idx, (z, lam) in enumerate(test_vectors):
        lam = GenFrac.of(lam)
        value = functional_apply(phi, z) - lam * alpha
        if not frac_norm(value) <= norm_bound * vector_norm(z - a.scale(lam)):
            raise PreconditionError(f"extension inequality fails on test vector {idx}")
        count += 1
    return alpha, ExtensionReport(alpha, fam, len(fam.balls), count)


__all__ = [
    "GenFrac",
    "ALPHA",
    "frac_ops",
    "frac_norm",
    "LVector",
    "vector_norm",
    "LFunctional",
    "functional_apply",
    "HBBall",
    "BallFamily",
    "hb_ball_family",
    "ExtensionReport",
    "hb_extend",
]
