from dataclasses import replace
from fractions import Fraction as F

import pytest
from hypothesis import assume, given, strategies as st

from sawitness.fileformat import load_sets
from sawitness.poly import parse_polynomial
from sawitness.rae import (
    ArityError,
    Constant,
    Difference,
    InputS,
    Intersection,
    Product,
    Projection,
    RAESyntaxError,
    Union,
    UnknownConstant,
    classify,
    eval_closed,
    input_arity,
    parse_rae,
    pretty,
    substitute_input,
)
from sawitness.sets import AffineMap, Box, DisjunctBudgetExceeded, basic, box_set, full_space, sphere_of

from conftest import CORPUS, points

ENV = load_sets([CORPUS / "sets3.sets"])
UNIT = sphere_of(AffineMap.identity(3), 3)
# unclipped constants keep nested differences within the disjunct budget
FREE = {name: basic(3, [parse_polynomial(f, 3) for f in eqs], [parse_polynomial(g, 3) for g in gts])
        for name, eqs, gts in [("G1", [], ["x1"]), ("G2", [], ["x2"]), ("H", [], ["x1 + x2 - x3 - 1/3"]),
                               ("Q", [], ["1 - x1^2 - x2^2 - x3^2"]), ("E", ["x1 + x2 + x3"], [])]}


def c(name):
    return Constant(name, ENV[name])


def test_parse_worked_example():
    e = parse_rae(r"proj[1,2]((S & G1) | (G2 \ S)) \ proj[1,3](S | G3)", ENV, 3)
    S = InputS(3)
    want = Difference(
        Projection((1, 2), Union(Intersection(S, c("G1")), Difference(c("G2"), S))),
        Projection((1, 3), Union(S, c("G3"))))
    assert e == want
    assert e.arity == 2 and input_arity(e) == 3


def test_parse_simple_and_errors():
    assert parse_rae("S", ENV, 3) == InputS(3)
    with pytest.raises(ArityError):
        parse_rae("proj[4](S)", ENV, 3)
    with pytest.raises(ArityError, match="Union"):
        parse_rae("S | D", ENV, 3)
    with pytest.raises(UnknownConstant):
        parse_rae("S | NOPE", ENV, 3)
    with pytest.raises(RAESyntaxError) as err:
        parse_rae("S | ", ENV, 3)
    assert err.value.position >= 3
    with pytest.raises(RAESyntaxError):
        parse_rae("(S | G1", ENV, 3)


def test_product_arity():
    e = parse_rae("S x R2", ENV, 3)
    assert isinstance(e, Product) and e.arity == 5


def test_classify_examples():
    ex = classify(parse_rae(r"proj[1,2]((S & G1) | (G2 \ S)) \ proj[1,3](S | G3)", ENV, 3))
    assert ex.cartesian_product_free and not ex.positive_one_pass and ex.s_occurrences == 3
    one = classify(parse_rae("proj[3,5](L1 | (L2 & (S x R2)))", ENV, 3))
    assert one.positive_one_pass and not one.cartesian_product_free
    assert classify(parse_rae("G1 | G2", ENV, 3)).s_occurrences == 0


def test_substitute_input():
    e = parse_rae("S | G1", ENV, 3)
    assert substitute_input(e, c("G2")) == Union(c("G2"), c("G1"))


@st.composite
def expressions(draw, depth=3):
    if depth == 0 or draw(st.integers(0, 3)) == 0:
        name = draw(st.sampled_from(["S", *FREE]))
        return InputS(3) if name == "S" else Constant(name, FREE[name])
    op = draw(st.sampled_from([Union, Intersection, Difference]))
    return op(draw(expressions(depth - 1)), draw(expressions(depth - 1)))


def brute(e, S, p):
    if isinstance(e, InputS):
        return S.member(p)
    if isinstance(e, Constant):
        return e.value.member(p)
    a, b = brute(e.left, S, p), brute(e.right, S, p)
    return {Union: a or b, Intersection: a and b, Difference: a and not b}[type(e)]


@given(expressions())
def test_pretty_round_trip(e):
    assert parse_rae(pretty(e), FREE, 3) == e


@given(expressions(), st.lists(points(3), min_size=20, max_size=20))
def test_eval_closed_matches_brute_force(e, pts):
    try:
        X = eval_closed(e, UNIT)
    except DisjunctBudgetExceeded:
        assume(False)
    for p in pts:
        assert X.member(p) == brute(e, UNIT, p)


def test_eval_closed_examples():
    assert eval_closed(InputS(3), UNIT) is UNIT
    empty = eval_closed(Difference(InputS(3), InputS(3)), UNIT)
    assert not any(empty.member(p) for p in [(1, 0, 0), (0, 0, 0), (F(1, 3), F(2, 3), F(2, 3))])
    g1 = basic(3, [], [parse_polynomial("x1", 3)])
    e = Union(Difference(Constant("G", g1), InputS(3)), InputS(3))
    X = eval_closed(e, UNIT)
    for p in [(1, 0, 0), (-1, 0, 0), (F(1, 2), 5, 5), (-1, 1, 1), (0, 0, 0)]:
        assert X.member(p) == (g1.member(p) or UNIT.member(p))
    with pytest.raises(ValueError):
        eval_closed(Projection((1,), InputS(3)), UNIT)
    with pytest.raises(ArityError):
        eval_closed(InputS(3), full_space(2))


@given(points(3))
def test_relabeling_is_closed_form(p):
    G = FREE["H"]
    e = Projection((2, 3, 1), Intersection(InputS(3), Constant("H", G)))
    x = (p[2], p[0], p[1])
    assert eval_closed(e, UNIT).member(p) == (UNIT.member(x) and G.member(x))


def test_relabeling_permutes_bound_and_points():
    B = Box([(0, 1), (2, 3), (4, 5)])
    X = replace(box_set(B), declared_bound=B, distinguished_points=((F(1, 2), F(5, 2), F(9, 2)),))
    Y = eval_closed(Projection((3, 1, 2), Constant("X", X)), UNIT)
    assert Y.distinguished_points == ((F(9, 2), F(1, 2), F(5, 2)),)
    assert Y.declared_bound == Box([(4, 5), (0, 1), (2, 3)])
    assert Y.member((F(9, 2), F(1, 2), F(5, 2))) and not X.member((F(9, 2), F(1, 2), F(5, 2)))
