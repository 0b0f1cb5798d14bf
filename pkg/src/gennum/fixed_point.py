"""Contraction iteration on generalized numbers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .geometry import PreconditionError
from .scale import NORM_ONE, NORM_ZERO, NormalForm, ValueNorm, ZERO, distance, sharp_norm


@dataclass(frozen=True)
class AffineMap:
    """``x -> a*x + b``."""

    a: NormalForm
    b: NormalForm

    def __call__(self, x: NormalForm) -> NormalForm:
        return self.a * x + self.b

    @property
    def contraction(self) -> bool:
        return sharp_norm(self.a) < NORM_ONE


class ContractionError(PreconditionError):
    def __init__(self, message: str, step: int | None = None):
        super().__init__(message if step is None else f"{message} at step {step}")
        self.step = step


@dataclass(frozen=True)
class IterationTrace:
    iterates: tuple  # x_0 .. x_n
    residuals: tuple  # |f(x_j) - x_j| for j = 0 .. n

    def lines(self) -> list[str]:
        return [f"step {j}: residual {r}" for j, r in enumerate(self.residuals)]


def banach_iterate(f: Callable[[NormalForm], NormalForm], x0: NormalForm, n: int) -> IterationTrace:
    """Iterates ``x_{j+1} = f(x_j)`` for ``j < n`` with exact residual norms.

    Affine maps need ``|a| < 1``; other maps must show strictly decreasing
    residuals over the run.
    """
    if isinstance(f, AffineMap) and not f.contraction:
        raise ContractionError("affine map is not a contraction: |a| >= 1")
    xs = [x0]
    fx = f(x0)
    res = [distance(fx, x0)]
    for j in range(1, n + 1):
        x = fx
        fx = f(x)
        r = distance(fx, x)
        prev = res[-1]
        if not prev.is_zero and not r < prev:
            raise ContractionError("residual did not decrease", j)
        xs.append(x)
        res.append(r)
    return IterationTrace(tuple(xs), tuple(res))


def trace_distances(t1: IterationTrace, t2: IterationTrace) -> list[ValueNorm]:
    return [distance(x, y) for x, y in zip(t1.iterates, t2.iterates)]


def affine_fixed_point(f: AffineMap, order: int) -> tuple[NormalForm, ValueNorm]:
    """Truncated Neumann series ``sum_{j<order} a**j b`` and its exact residual."""
    if not f.contraction:
        raise ContractionError("affine map is not a contraction: |a| >= 1")
    xstar = ZERO
    term = f.b
    for _ in range(order):
        xstar = xstar + term
        term = f.a * term
    res = distance(f(xstar), xstar)
    # f(xstar) - xstar = a**order * b
    if res != (sharp_norm(term) if term else NORM_ZERO):
        raise AssertionError("residual does not match a**order * b")
    return xstar, res


__all__ = [
    "AffineMap",
    "ContractionError",
    "IterationTrace",
    "banach_iterate",
    "trace_distances",
    "affine_fixed_point",
]
