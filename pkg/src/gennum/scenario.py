"""JSON scenario files and deterministic verification reports.

All numbers in a scenario are strings: rationals as ``"p/q"``, generalized
numbers in the expression syntax, norm values as ``"e^-rho"``.  Kinds:

``intersect``
    ``balls``: list of ``{"center", "rho"}``, or ``rule``:
    ``{"coeff", "exponent", "rho", "mask"?}`` where ``exponent`` and ``rho``
    are ``{"affine": [slope, offset]}`` or ``{"harmonic": [limit, scale]}``.
    Optional ``depth``, ``window`` and ``certify``: ``{"balls", "k"}``.
``hb``
    ``phi``, ``a``: coordinate lists; ``norm_bound``; ``samples``: list of
    vectors; ``tests``: list of ``{"z", "lambda"}``.  A coordinate is an
    expression or ``{"num", "den"}``.
``fixpoint``
    ``a``, ``b``, ``seed``, ``steps``, optional ``order`` and ``second_seed``.
``check``
    ``cnet`` in the net call syntax, optional ``window``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .dsl import parse_cnet, parse_expression, parse_norm, parse_rational
from .fixed_point import AffineMap, affine_fixed_point, banach_iterate, trace_distances
from .geometry import DEFAULT_WINDOW, DressedBall, check_condition_E
from .hahn_banach import GenFrac, LFunctional, LVector, hb_extend
from .scale import ALL, valuation
from .solver import (
    NestedBallSequence,
    RationalFormula,
    build_proper_models,
    certify,
    check_nested,
    intersect_diagonal,
)

KINDS = ("intersect", "hb", "fixpoint", "check")


class ScenarioError(ValueError):
    """Malformed scenario content."""


@dataclass
class Report:
    lines: list = field(default_factory=list)
    verdict: str = "VERIFIED"

    def add(self, key: str, value: Any):
        self.lines.append((key, str(value)))

    def render(self) -> str:
        body = [f"{k}: {v}" for k, v in self.lines]
        body.append(f"verdict: {self.verdict}")
        return "\n".join(body) + "\n"


def load_scenario(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or data.get("kind") not in KINDS:
        raise ScenarioError(f"scenario kind must be one of {', '.join(KINDS)}")
    return data


def dump_scenario(data: dict) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def _formula(entry: dict) -> RationalFormula:
    if not isinstance(entry, dict) or len(entry) != 1:
        raise ScenarioError("formula must be {'affine': [..]} or {'harmonic': [..]}")
    (kind, args), = entry.items()
    if len(args) != 2:
        raise ScenarioError("formula takes two rationals")
    return RationalFormula(kind, parse_rational(args[0]), parse_rational(args[1]))


def _mask(text: str | None):
    if text is None:
        return ALL
    return parse_expression(f"1 @ {text}").terms[0].mask


def sequence_from(data: dict) -> NestedBallSequence:
    if "balls" in data:
        return NestedBallSequence.from_list(
            [DressedBall(parse_expression(b["center"]), parse_rational(b["rho"])) for b in data["balls"]]
        )
    rule = data.get("rule")
    if rule is None:
        raise ScenarioError("intersect scenario needs 'balls' or 'rule'")
    return NestedBallSequence.partial_sums(
        parse_rational(rule.get("coeff", "1")),
        _formula(rule["exponent"]),
        _formula(rule["rho"]),
        _mask(rule.get("mask")),
    )


def run_intersect(data: dict, report: Report, depth=None, window=None, certify_k=None):
    seq = sequence_from(data)
    n = depth or int(data.get("depth", 20))
    if seq.length is not None:
        n = min(n, seq.length)
    window = window or int(data.get("window", DEFAULT_WINDOW))
    report.add("kind", "intersect")
    report.add("depth", n)
    report.add("window", window)
    nest = check_nested(seq, n)
    if not nest.ok:
        report.add("nesting", "FAIL")
        report.add("failure", f"i={nest.failure}")
        report.add("reason", nest.reason)
        report.verdict = "PRECONDITION VIOLATED"
        return 1
    report.add("nesting", f"ok ({n - 1} pairs)")
    chain = build_proper_models(seq, n, window)
    report.add("models", len(chain.models))
    report.add("thresholds", " ".join(str(k) for k in chain.thresholds))
    x = chain.models[-1].center.base
    checks = 0
    for i in range(1, n + 1):
        b = seq.ball(i)
        if valuation(x - b.center) < b.rho:
            report.add("failure", f"i={i}")
            report.verdict = "FAILED"
            return 1
        checks += 1
    report.add("witness", x)
    report.add("valuation checks", checks)
    report.add("pointwise checks", 2 * window * max(0, len(chain.models) - 1))
    cert = data.get("certify")
    if cert is not None and seq.length is None:
        balls = int(cert.get("balls", 1))
        K = certify_k or int(cert.get("k", window))
        w = intersect_diagonal(seq, K)
        total = 0
        for i in range(1, balls + 1):
            total += certify(w, i, K).checked
        report.add("diagonal", f"balls 1..{balls}, k <= {K}, {total} memberships")
    return 0


def _frac(v) -> GenFrac:
    if isinstance(v, dict):
        return GenFrac(parse_expression(v["num"]), parse_expression(v.get("den", "1")))
    return GenFrac(parse_expression(str(v)))


def _vector(vs) -> LVector:
    return LVector(tuple(_frac(v) for v in vs))


def run_hb(data: dict, report: Report):
    phi = LFunctional(tuple(_frac(v) for v in data["phi"]))
    bound = parse_norm(data["norm_bound"])
    a = _vector(data["a"])
    samples = [_vector(s) for s in data["samples"]]
    tests = [(_vector(t["z"]), _frac(t["lambda"])) for t in data.get("tests", [])]
    report.add("kind", "hb")
    report.add("norm bound", bound)
    alpha, rep = hb_extend(phi, bound, a, samples, tests)
    report.add("balls", " ".join(f"[{b.center} ; {b.radius}]" for b in rep.family.balls))
    report.add("containment order", " ".join(str(i) for i in rep.family.order))
    report.add("pair checks", rep.family.pair_checks)
    report.add("alpha", alpha)
    report.add("membership checks", rep.membership_checks)
    report.add("inequality checks", rep.inequality_checks)
    return 0


def run_fixpoint(data: dict, report: Report, depth=None):
    f = AffineMap(parse_expression(data["a"]), parse_expression(data["b"]))
    steps = depth or int(data.get("steps", 20))
    seed = parse_expression(data.get("seed", "0"))
    report.add("kind", "fixpoint")
    report.add("map", f"({f.a})*x + ({f.b})")
    trace = banach_iterate(f, seed, steps)
    report.add("steps", steps)
    report.add("residuals", " ".join(str(r) for r in trace.residuals))
    if "second_seed" in data:
        other = banach_iterate(f, parse_expression(data["second_seed"]), steps)
        report.add("trace distances", " ".join(str(d) for d in trace_distances(trace, other)))
    if "order" in data:
        xstar, res = affine_fixed_point(f, int(data["order"]))
        report.add("order", data["order"])
        report.add("xstar", xstar)
        report.add("residual", res)
    return 0


def run_check(data: dict, report: Report, window=None):
    c = parse_cnet(data["cnet"])
    K = window or int(data.get("window", DEFAULT_WINDOW))
    report.add("kind", "check")
    report.add("cnet", data["cnet"])
    for line in check_condition_E(c, K).lines():
        report.add(*line.split(": ", 1))
    return 0


def run_scenario_data(data: dict, report: Report, depth=None, window=None, certify_k=None) -> int:
    kind = data.get("kind")
    try:
        if kind == "intersect":
            return run_intersect(data, report, depth, window, certify_k)
        if kind == "hb":
            return run_hb(data, report)
        if kind == "fixpoint":
            return run_fixpoint(data, report, depth)
        if kind == "check":
            return run_check(data, report, window)
    except (KeyError, TypeError) as exc:
        raise ScenarioError(f"missing or malformed field: {exc}") from exc
    raise ScenarioError(f"unknown scenario kind {kind!r}")


__all__ = [
    "Report",
    "ScenarioError",
    "load_scenario",
    "dump_scenario",
    "sequence_from",
    "run_scenario_data",
]
