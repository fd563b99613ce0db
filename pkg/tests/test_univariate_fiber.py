import functools
import math
from fractions import Fraction as F

from hypothesis import assume, given, strategies as st

from sawitness.fiber import TreeFiber, Verdict, decide_basic, decide_fiber, set_formula
from sawitness.poly import Polynomial, parse_polynomial
from sawitness.sets import AffineMap, BasicSet, Box, SemiAlgebraicSet, basic, sa_union, sphere_of
from sawitness.univariate import (
    Surd,
    compare,
    decide,
    decide_fast,
    int_between,
    int_compare,
    int_roots,
    rational_between,
    sign_at,
    surd_sign,
)

from conftest import polynomials, rationals


def u(text):
    return parse_polynomial(text, 1)


def quad_coeffs():
    return st.lists(st.integers(-6, 6), min_size=2, max_size=3).filter(lambda cs: cs[-1] != 0)


def test_decide_examples():
    ok, w = decide([u("x1^2 - 2")], [], F(0), F(2))
    assert ok and w == Surd(0, 1, 2)
    assert decide([u("x1^2 - 2")], [], F(2), F(3)) == (False, None)
    ok, w = decide([], [u("x1^2 - 2"), u("3 - x1")], F(-5), F(5))
    assert ok and w ** 2 > 2 and w < 3
    assert decide([], [u("-x1^2")], F(-1), F(1)) == (False, None)
    assert decide([u("x1^3")], [], F(-1), F(1)) == (None, None)
    assert decide([u("1")], [], F(-1), F(1)) == (False, None)


def test_surd_arithmetic():
    assert Surd(0, 1, 4) == Surd(2)
    assert compare(Surd(0, 1, 2), F(141, 100)) > 0
    assert compare(Surd(0, 1, 2), Surd(0, 1, 3)) < 0
    assert compare(Surd(1, 1, 2), Surd(0, 1, 5)) > 0
    lo, hi = Surd(0, 1, 2), Surd(0, 1, 3)
    t = rational_between(lo, hi)
    assert compare(lo, t) < 0 < compare(hi, t)


@given(st.integers(-50, 50), st.integers(-50, 50), st.integers(0, 60))
def test_surd_sign_matches_float(a, b, d):
    exact = surd_sign(a, b, d)
    value = a + b * math.sqrt(d)
    if abs(value) > 1e-9:
        assert exact == (1 if value > 0 else -1)
    if exact == 0:
        assert abs(value) < 1e-9


@given(quad_coeffs(), quad_coeffs())
def test_int_roots_sorted_and_between(f, g):
    roots = sorted(int_roots(f) + int_roots(g), key=functools.cmp_to_key(int_compare))
    for r in int_roots(f):
        assert r[3] > 0
        assert sign_at([F(c) for c in f], Surd(F(r[0], r[3]), F(r[1], r[3]), r[2])) == 0
    for a, b in zip(roots, roots[1:]):
        if int_compare(a, b) < 0:
            m = int_between(a, b)
            assert int_compare(a, m) < 0 < int_compare(b, m)


@given(st.lists(quad_coeffs(), max_size=1), st.lists(quad_coeffs(), max_size=3),
       rationals(3, 4), rationals(3, 4))
def test_integer_kernel_agrees_with_surd_route(eqs, gts, a, b):
    assume(a < b)
    E = [Polynomial(1, {(i,): c for i, c in enumerate(cs)}) for cs in eqs]
    G = [Polynomial(1, {(i,): c for i, c in enumerate(cs)}) for cs in gts]
    ok, w = decide(E, G, a, b)
    assert decide_fast(E, G, a, b) == ok
    if ok:
        assert compare(w, a) > 0 and compare(w, b) < 0
        assert all(sign_at(f, w) == 0 for f in E) and all(sign_at(g, w) > 0 for g in G)
    elif not E:
        # independent check: no grid point satisfies the strict system
        for k in range(1, 200):
            t = a + (b - a) * F(k, 200)
            assert not all(sign_at(g, t) > 0 for g in G)


def test_decide_basic_linear_systems():
    two = Box.cube(-2, 2, 2)
    mk = lambda eqs, gts: BasicSet.make(2, [parse_polynomial(e, 2) for e in eqs],
                                        [parse_polynomial(g, 2) for g in gts])
    assert decide_basic(mk(["x1 + x2 - 1"], ["x1", "x2"]), two) is Verdict.IN
    assert decide_basic(mk(["x1 + x2 - 1"], ["x1 - 1", "x2 - 1"]), two) is Verdict.OUT
    assert decide_basic(mk([], ["1 - x1^2 - x2^2", "x2 - x1 - 1"]), two) is Verdict.IN
    assert decide_basic(mk([], ["1 - x1^2 - x2^2", "x2 - x1 - 2"]), two) is Verdict.OUT


def test_sphere_fibers():
    sphere = sphere_of(AffineMap.identity(3), 3)
    free = Box([(-2, 2)])
    assert decide_fiber(sphere, {0: F(0), 1: F(0)}, free) is Verdict.IN
    assert decide_fiber(sphere, {0: F(2), 1: F(0)}, free) is Verdict.OUT
    assert decide_fiber(sphere, {0: F(1), 1: F(0)}, free) is Verdict.IN
    assert decide_fiber(sphere, {0: F(0)}, Box.cube(-2, 2, 2)) is Verdict.IN
    assert decide_fiber(sphere, {0: F(0), 1: F(0), 2: F(1)}, None) is Verdict.IN


@st.composite
def quadric_sets(draw):
    X = SemiAlgebraicSet(3, ())
    for _ in range(draw(st.integers(1, 3))):
        eqs = draw(st.lists(polynomials(3, 3, 2), max_size=1))
        gts = draw(st.lists(polynomials(3, 3, 2), max_size=2))
        X = sa_union(X, basic(3, eqs, gts))
    return X


@given(quadric_sets(), rationals(2, 4), rationals(2, 4))
def test_tree_fiber_matches_closed_route(X, x, y):
    atoms, seen = [], {}
    tree = TreeFiber(set_formula(X, atoms, seen), atoms, (0, 1), 2, (-2, 2))
    fast = tree((x, y))
    if fast is None:
        return
    slow = decide_fiber(X, {0: x, 1: y}, Box([(-2, 2)]))
    if slow is not Verdict.UNKNOWN:
        assert fast is slow
