from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import settings, strategies as st

from sawitness.poly import Polynomial

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# criterion name -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in ACCEPTANCE.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


def rationals(limit=4, max_den=4):
    return st.builds(Fraction, st.integers(-limit * max_den, limit * max_den), st.integers(1, max_den))


def points(n, limit=2, max_den=8):
    return st.tuples(*[rationals(limit, max_den) for _ in range(n)])


def polynomials(n, max_terms=4, max_exp=2):
    exps = st.tuples(*[st.integers(0, max_exp) for _ in range(n)])
    return st.dictionaries(exps, rationals(3, 3), max_size=max_terms).map(lambda t: Polynomial(n, t))


@pytest.fixture(scope="session")
def corpus():
    return CORPUS




# -- shared helpers for normal-form checks --------------------------------------------

def finite_set(pts, n):
    """The finite set ``pts`` as a union of point disjuncts."""
    from sawitness.poly import Polynomial
    from sawitness.sets import BasicSet, SemiAlgebraicSet

    ds = []
    for p in pts:
        eqs = [Polynomial.variable(n, i) - Fraction(c) for i, c in enumerate(p)]
        ds.append(BasicSet.make(n, eqs, []))
    return SemiAlgebraicSet(n, tuple(ds))


def form_expression(kind, gamma, n, name):
    """Expression of one of the four normal-form shapes with constant ``gamma``."""
    from sawitness.rae import Constant, Difference, InputS, Union
    from sawitness.rewrite import Kind

    s, g = InputS(n), Constant(name, gamma)
    return {Kind.INPUT: s, Kind.CONST: g, Kind.INPUT_UNION_CONST: Union(s, g),
            Kind.CONST_MINUS_INPUT: Difference(g, s)}[kind]


def brute_member(e, S_member, p):
    """Pointwise evaluation of a projection-free expression given input membership."""
    from sawitness.rae import Constant, Difference, InputS, Intersection, Union

    if isinstance(e, InputS):
        return S_member(p)
    if isinstance(e, Constant):
        return e.value.member(p)
    a, b = brute_member(e.left, S_member, p), brute_member(e.right, S_member, p)
    return {Union: a or b, Intersection: a and b, Difference: a and not b}[type(e)]
