from fractions import Fraction

import pytest
from hypothesis import strategies as st

from gennum.scale import Mask, Term, canonicalize

RESULTS = {}


@st.composite
def raw_terms(draw, max_terms=4, max_den=4, max_mod=4, masks=True):
    n = draw(st.integers(0, max_terms))
    out = []
    for _ in range(n):
        c = Fraction(draw(st.integers(-9, 9).filter(bool)), draw(st.integers(1, 5)))
        a = Fraction(draw(st.integers(-4, 12)), draw(st.integers(1, max_den)))
        m = draw(st.integers(1, max_mod)) if masks else 1
        res = frozenset(draw(st.sets(st.integers(0, m - 1), min_size=1)))
        out.append((c, a, m, res))
    return out


def to_form(raw):
    return canonicalize([Term(c, a, Mask.of(m, r)) for c, a, m, r in raw])


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark and rep.when == "call":
        RESULTS[mark.args[0]] = rep.passed


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if RESULTS[n] else 'FAIL'}")
