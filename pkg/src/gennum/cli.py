"""Command line entry point.

Exit codes: 0 verified, 1 mathematical precondition violated, 2 parse or I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .dsl import DSLSyntaxError, format_expression, parse_cnet, parse_expression, parse_rational
from .geometry import (
    ConditionEFailure,
    DressedBall,
    EuclideanModel,
    PreconditionError,
    blow_up_model,
    capture_representative,
    check_condition_E,
    default_model,
)
from .scale import INF, Representative, distance, sharp_norm, valuation
from .scenario import Report, ScenarioError, load_scenario, run_scenario_data

VERIFIED, VIOLATED, BAD_INPUT = 0, 1, 2


def _eval(args, report: Report) -> int:
    x = parse_expression(args.expr)
    v = valuation(x)
    report.add("normal form", format_expression(x))
    report.add("v", "inf" if v == INF else v)
    report.add("norm", sharp_norm(x))
    return VERIFIED


def _dist(args, report: Report) -> int:
    report.add("distance", distance(parse_expression(args.x), parse_expression(args.y)))
    return VERIFIED


def _check_e(args, report: Report) -> int:
    c = parse_cnet(args.cnet)
    report.add("cnet", args.cnet)
    try:
        cert = check_condition_E(c, args.check_k)
    except ConditionEFailure as exc:
        report.add("clause", exc.clause)
        report.add("witness", exc.witness)
        report.verdict = "FAIL"
        return VIOLATED
    for line in cert.lines():
        report.add(*line.split(": ", 1))
    report.verdict = "PASS"
    return VERIFIED


def _model(args, report: Report) -> int:
    ball = DressedBall(parse_expression(args.center), parse_rational(args.rho))
    m = default_model(ball)
    if args.cnet:
        m = EuclideanModel(m.center, m.rho, parse_cnet(args.cnet))
    report.add("center", ball.center)
    report.add("rho", ball.rho)
    for line in check_condition_E(m.cnet, args.check_k).lines():
        report.add(*line.split(": ", 1))
    if args.point is None:
        return VERIFIED
    y = parse_expression(args.point)
    d = distance(y, ball.center)
    report.add("point", y)
    report.add("distance", d)
    if d < ball.radius:
        rep = capture_representative(m, y)
        patched = sorted(rep.patches)
        report.add("captured", "yes")
        report.add("patched", " ".join(map(str, patched)) or "none")
    elif d == ball.radius:
        big = blow_up_model(m, Representative(y))
        report.add("sphere point", "yes")
        report.add("blown-up cnet", big.cnet)
    else:
        report.add("outside", "yes")
        report.verdict = "OUTSIDE"
        return VIOLATED
    return VERIFIED


def _scenario(kind: str | None):
    def run(args, report: Report) -> int:
        data = load_scenario(args.scenario)
        if kind is not None and data["kind"] != kind:
            raise ScenarioError(f"expected a {kind} scenario, got {data['kind']}")
        return run_scenario_data(data, report, args.depth, args.check_k, args.certify)

    return run


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gennum", description="Exact sharp-topology computations.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("eval", help="normal form, valuation and sharp norm")
    s.add_argument("expr")
    s.set_defaults(func=_eval)

    s = sub.add_parser("dist", help="sharp distance of two expressions")
    s.add_argument("x")
    s.add_argument("y")
    s.set_defaults(func=_dist)

    s = sub.add_parser("check-e", help="certify condition (E) for a scaling net")
    s.add_argument("cnet")
    s.add_argument("--check-k", type=int, default=256)
    s.set_defaults(func=_check_e)

    s = sub.add_parser("model", help="euclidean model of a dressed ball")
    s.add_argument("center")
    s.add_argument("rho")
    s.add_argument("--cnet")
    s.add_argument("--point")
    s.add_argument("--check-k", type=int, default=256)
    s.set_defaults(func=_model)

    for name, kind in (("intersect", "intersect"), ("hb", "hb"), ("fixpoint", "fixpoint"), ("run", None)):
        s = sub.add_parser(name, help=f"run a {kind or 'any'} scenario file")
        s.add_argument("scenario")
        s.add_argument("--depth", type=int)
        s.add_argument("--check-k", type=int)
        s.add_argument("--certify", type=int, help="grid bound K for diagonal certification")
        s.set_defaults(func=_scenario(kind))
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    report = Report()
    try:
        code = args.func(args, report)
    except (DSLSyntaxError, ScenarioError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT
    except (PreconditionError, ConditionEFailure, AssertionError) as exc:
        report.add("error", exc)
        report.verdict = "PRECONDITION VIOLATED"
        code = VIOLATED
    except (ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT
    sys.stdout.write(report.render())
    return code


if __name__ == "__main__":
    sys.exit(main())
