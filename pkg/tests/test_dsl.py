from fractions import Fraction as F

import pytest
from hypothesis import given, settings

from conftest import raw_terms, to_form
from gennum.dsl import (
    DSLSyntaxError,
    format_expression,
    format_norm,
    parse_cnet,
    parse_expression,
    parse_norm,
    parse_rational,
)
from gennum.exact import ExactReal
from gennum.scale import NORM_ZERO, ValueNorm, ZERO


def test_parse_examples():
    x = parse_expression("3*e^(1/2) + 2*e^(3)")
    assert len(x.terms) == 2
    even = parse_expression("1 @ mod(2,0)")
    assert even.terms[0].mask.residues == frozenset({0})
    assert parse_expression("e^(1) + -1*e^(1)") == ZERO


@pytest.mark.parametrize("text", ["", "1 +", "e^(1", "1/0", "1 @ mod(0,0)", "1 @ mod(2,2)", "2*x"])
def test_syntax_errors(text):
    with pytest.raises(DSLSyntaxError):
        parse_expression(text)


def test_error_position():
    with pytest.raises(DSLSyntaxError) as err:
        parse_expression("1 + 2*e^(1) $")
    assert err.value.pos == 12


@settings(max_examples=300, deadline=None)
@given(raw_terms())
def test_round_trip(raw):
    x = to_form(raw)
    text = format_expression(x)
    assert parse_expression(text) == x
    assert format_expression(parse_expression(text)) == text


def test_norms():
    for v in (NORM_ZERO, ValueNorm(0), ValueNorm(F(5, 3)), ValueNorm(-2)):
        assert parse_norm(format_norm(v)) == v
    with pytest.raises(DSLSyntaxError):
        parse_norm("e^-x")


def test_rational():
    assert parse_rational("-3/4") == F(-3, 4)
    with pytest.raises(DSLSyntaxError):
        parse_rational("3/0")


def test_parse_cnet():
    c = parse_cnet('scale(2, env(max(const(1), absdiff("e^(1)", "0"))))')
    assert c.value(3) == ExactReal.rational(2)
    c = parse_cnet("switch(3, const(1/2), sum(const(2), power(1)))")
    assert c.value(2) == ExactReal.rational(F(1, 2))
    assert c.value(3) == ExactReal.rational(F(17, 8))
    with pytest.raises(DSLSyntaxError):
        parse_cnet("foo(1)")
