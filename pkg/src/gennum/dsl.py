"""Text syntax for generalized numbers, scaling nets and norm values.

Expressions::

    expr     := term (('+' | '-') term)*
    term     := ['-'] (rational ['*' power] | power) [mask]
    power    := 'e^(' rational ')'          # eps to a rational power
    mask     := '@' 'mod(' int ',' int (',' int)* ')'
    rational := int ['/' int]

Scaling nets use a call syntax: ``const(q)``, ``power(a)``,
``absdiff("expr", "expr")``, ``sum(...)``, ``prod(...)``, ``min(...)``,
``max(...)``, ``scale(q, net)``, ``env(net)``, ``switch(k0, net, net)``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .scale import ALL, NORM_ZERO, Mask, NormalForm, Term, ValueNorm, canonicalize


class DSLSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos}: {text!r}")
        self.pos = pos


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def startswith(self, s: str) -> bool:
        self.skip()
        return self.text.startswith(s, self.pos)

    def expect(self, s: str):
        if not self.startswith(s):
            self.fail(f"expected {s!r}")
        self.pos += len(s)

    def accept(self, s: str) -> bool:
        if self.startswith(s):
            self.pos += len(s)
            return True
        return False

    def fail(self, message: str):
        raise DSLSyntaxError(message, self.text, self.pos)

    def integer(self) -> int:
        self.skip()
        m = re.compile(r"\d+").match(self.text, self.pos)
        if not m:
            self.fail("expected integer")
        self.pos = m.end()
        return int(m.group())

    def rational(self) -> Fraction:
        neg = self.accept("-")
        start = self.pos
        num = self.integer()
        den = 1
        if self.accept("/"):
            den = self.integer()
            if den == 0:
                raise DSLSyntaxError("zero denominator", self.text, start)
        q = Fraction(num, den)
        return -q if neg else q

    def at_end(self) -> bool:
        return self.peek() == ""


def _power(cur: _Cursor) -> Fraction:
    cur.expect("e^(")
    a = cur.rational()
    cur.expect(")")
    return a


def _term(cur: _Cursor) -> Term | None:
    neg = cur.accept("-")
    if cur.startswith("e^("):
        coeff, a = Fraction(1), _power(cur)
    else:
        coeff = cur.rational()
        a = _power(cur) if cur.accept("*") else Fraction(0)
    mask = ALL
    if cur.accept("@"):
        cur.expect("mod(")
        start = cur.pos
        m = cur.integer()
        if m == 0:
            raise DSLSyntaxError("zero modulus", cur.text, start)
        res = []
        while cur.accept(","):
            res.append(cur.integer())
        cur.expect(")")
        if not res:
            cur.fail("mask needs at least one residue")
        if any(r >= m for r in res):
            raise DSLSyntaxError("residue out of range", cur.text, start)
        mask = Mask(m, frozenset(res))
    if neg:
        coeff = -coeff
    return Term(coeff, a, mask) if coeff != 0 else None


def _expression(cur: _Cursor) -> NormalForm:
    terms = []
    t = _term(cur)
    if t:
        terms.append(t)
    while True:
        if cur.accept("+"):
            t = _term(cur)
        elif cur.accept("-"):
            t = _term(cur)
            if t:
                t = Term(-t.coeff, t.exponent, t.mask)
        else:
            break
        if t:
            terms.append(t)
    return canonicalize(terms)


def parse_expression(text: str) -> NormalForm:
    cur = _Cursor(text)
    if cur.at_end():
        cur.fail("empty expression")
    x = _expression(cur)
    if not cur.at_end():
        cur.fail("unexpected character")
    return x


def _format_term(t: Term, first: bool) -> str:
    c = t.coeff
    neg = not first and not hasattr(c, "im") and c < 0
    c = -c if neg else c
    if t.exponent == 0:
        body = str(c)
    elif c == 1:
        body = f"e^({t.exponent})"
    else:
        body = f"{c}*e^({t.exponent})"
    if not t.mask.is_all:
        body += f" @ {t.mask}"
    if first:
        return body
    return (" - " if neg else " + ") + body


def format_expression(x: NormalForm) -> str:
    if not x.terms:
        return "0"
    return "".join(_format_term(t, i == 0) for i, t in enumerate(x.terms))


def parse_norm(text: str) -> ValueNorm:
    """``0``, ``e^0``, ``e^-rho`` or ``e^rho``."""
    s = text.strip()
    if s == "0":
        return NORM_ZERO
    m = re.fullmatch(r"e\^(-?)(\d+(?:/\d+)?)", s)
    if not m:
        raise DSLSyntaxError("expected a norm value like e^-1/2", text, 0)
    q = Fraction(m.group(2))
    return ValueNorm(q if m.group(1) else -q)


def format_norm(v: ValueNorm) -> str:
    return str(v)


def parse_rational(text) -> Fraction:
    cur = _Cursor(str(text))
    q = cur.rational()
    if not cur.at_end():
        cur.fail("unexpected character")
    return q


def parse_cnet(text: str):
    from . import nets
    from .scale import Representative

    cur = _Cursor(text)

    def string() -> str:
        cur.expect('"')
        end = cur.text.find('"', cur.pos)
        if end < 0:
            cur.fail("unterminated string")
        s = cur.text[cur.pos:end]
        cur.pos = end + 1
        return s

    def node():
        cur.skip()
        m = re.compile(r"[a-z]+").match(cur.text, cur.pos)
        if not m:
            cur.fail("expected net constructor")
        name = m.group()
        cur.pos = m.end()
        cur.expect("(")
        if name == "const":
            out = nets.Const(cur.rational())
        elif name == "power":
            out = nets.Power(cur.rational())
        elif name == "absdiff":
            a = string()
            cur.expect(",")
            b = string()
            out = nets.AbsDiff(
                Representative(parse_expression(a)), Representative(parse_expression(b))
            )
        elif name in ("sum", "prod", "min", "max"):
            kids = [node()]
            while cur.accept(","):
                kids.append(node())
            cls = {"sum": nets.Sum, "prod": nets.Prod, "min": nets.Min, "max": nets.Max}[name]
            out = cls(tuple(kids))
        elif name == "scale":
            q = cur.rational()
            cur.expect(",")
            out = nets.Scale(q, node())
        elif name == "env":
            out = nets.Envelope(node())
        elif name == "switch":
            k0 = cur.integer()
            cur.expect(",")
            before = node()
            cur.expect(",")
            out = nets.Switch(k0, before, node())
        else:
            cur.pos = m.start()
            cur.fail(f"unknown net constructor {name!r}")
        cur.expect(")")
        return out

    out = node()
    if not cur.at_end():
        cur.fail("unexpected character")
    return out
