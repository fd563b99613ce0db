from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from sawitness.interval import (
    CONSTANT,
    DECREASING,
    INCREASING,
    Cert,
    Interval,
    Status,
    certify_out,
    certify_regular,
    certify_set_status,
    certify_sign,
    enclosure,
    poly_range,
    track_usage,
)
from sawitness.poly import Polynomial, parse_polynomial, poly_eval
from sawitness.sampling import sample_points
from sawitness.sets import Box, basic, empty_set, sa_union, sphere_of, AffineMap

from conftest import polynomials, rationals

CUBE = Box.cube(F(-1, 4), F(1, 4), 3)
SPHERE = parse_polynomial("x1^2 + x2^2 + x3^2 - 1", 3)


@st.composite
def boxes(draw, n):
    pairs = []
    for _ in range(n):
        lo = draw(rationals(2, 4))
        pairs.append((lo, lo + draw(rationals(2, 4).filter(lambda w: w > 0))))
    return Box(pairs)


def test_interval_arithmetic():
    a, b = Interval(-1, 2), Interval(3, 4)
    assert a + b == Interval(2, 6)
    assert a - b == Interval(-5, -1)
    assert a * b == Interval(-4, 8)
    assert a ** 2 == Interval(0, 4)
    assert Interval(-3, -2) ** 2 == Interval(4, 9)
    assert 0 in a and 3 not in a
    with pytest.raises(ValueError):
        Interval(1, 0)


def test_constant_range():
    assert poly_range(Polynomial.constant(3, 5), CUBE) == Interval(5, 5)


def test_linear_range_covers_closure():
    r = poly_range(parse_polynomial("x1", 1), Box([(0, 1)]))
    assert r.lo <= 0 and r.hi >= 1


def test_sphere_range_example():
    assert poly_range(SPHERE, CUBE).within(Interval(-1, F(-13, 16)))


def test_sign_examples():
    assert certify_sign(SPHERE, CUBE, ">0") is Cert.FALSE
    assert certify_sign(SPHERE, Box.cube(2, 3, 3), ">0") is Cert.TRUE
    assert certify_sign(parse_polynomial("x1", 1), Box([(-1, 1)]), ">0", budget=64) is Cert.UNKNOWN
    assert certify_sign(SPHERE, CUBE, "!=0") is Cert.TRUE
    assert certify_sign(SPHERE, CUBE, "=0") is Cert.FALSE


def test_sign_needs_subdivision():
    # x(1-x) > 0 on (0,1) fails a single natural enclosure but holds after splitting
    p = parse_polynomial("x1 - x1^2", 1)
    b = Box([(F(1, 8), F(7, 8))])
    assert certify_sign(p, b, ">0") is Cert.TRUE


def test_set_status_examples():
    right = basic(3, [], [parse_polynomial("x1", 3)])
    slab = Box([(F(1, 4), F(3, 4)), (-1, 1), (-1, 1)])
    assert certify_set_status(right, slab).status is Status.FULLY_IN
    sphere = sphere_of(AffineMap.identity(3), 3)
    assert certify_set_status(sphere, CUBE).status is Status.FULLY_OUT
    assert certify_set_status(empty_set(3), CUBE).status is Status.FULLY_OUT


def test_mixed_status_reports_both_points():
    right = basic(3, [], [parse_polynomial("x1", 3)])
    st_ = certify_set_status(right, Box.cube(-1, 1, 3))
    assert st_.status is Status.MIXED
    assert right.member(st_.member) and not right.member(st_.nonmember)


def test_equation_disjunct_never_fully_in():
    plane = basic(3, [parse_polynomial("x3", 3)], [])
    assert certify_set_status(plane, CUBE, budget=64).status is not Status.FULLY_IN


def test_union_covering_certifies_in():
    halves = sa_union(basic(1, [], [parse_polynomial("x1", 1)]), basic(1, [], [parse_polynomial("1 - x1", 1)]))
    assert certify_set_status(halves, Box([(-1, 2)])).status is Status.FULLY_IN


def test_certify_out():
    sphere = sphere_of(AffineMap.identity(3), 3)
    assert certify_out(sphere, CUBE)
    assert not certify_out(sphere, Box.cube(-2, 2, 3))


def test_regular_examples():
    f = parse_polynomial("x1^2", 3)
    assert certify_regular(f, Box([(1, 2), (0, 1), (0, 1)])).profile == (INCREASING, CONSTANT, CONSTANT)
    assert certify_regular(f, Box.cube(-1, 1, 3)) is None
    g = parse_polynomial("-x1 + x2^3", 2)
    assert certify_regular(g, Box([(0, 1), (1, 2)])).profile == (DECREASING, INCREASING)


def test_usage_counts_boxes():
    with track_usage() as usage:
        certify_sign(parse_polynomial("x1", 1), Box([(-1, 1)]), ">0", budget=64)
    assert 1 < usage.boxes <= 64


@given(polynomials(2, 4, 3), boxes(2))
def test_enclosure_contains_samples(p, b):
    r = enclosure(p, b)
    for x in sample_points(b, 50, 0) + [b.lows, b.highs]:
        assert poly_eval(p, x) in r


@given(polynomials(2, 4, 2), boxes(2), st.sampled_from([">0", "<0", "!=0", "=0"]))
def test_sign_certificates_are_sound(p, b, relation):
    verdict = certify_sign(p, b, relation, budget=64)
    if verdict is Cert.UNKNOWN:
        return
    test = {">0": lambda v: v > 0, "<0": lambda v: v < 0, "!=0": lambda v: v != 0, "=0": lambda v: v == 0}[relation]
    want = verdict is Cert.TRUE
    assert all(test(poly_eval(p, x)) == want for x in sample_points(b, 100, 1))


@given(st.lists(st.tuples(polynomials(2, 3, 2), polynomials(2, 3, 2)), min_size=1, max_size=2), boxes(2))
def test_status_implies_membership(parts, b):
    X = empty_set(2)
    for f, g in parts:
        X = sa_union(X, basic(2, [], [f, g]))
    s = certify_set_status(X, b, budget=64)
    pts = sample_points(b, 100, 2)
    if s.status is Status.FULLY_IN:
        assert all(X.member(x) for x in pts)
    elif s.status is Status.FULLY_OUT:
        assert not any(X.member(x) for x in pts)
    elif s.status is Status.MIXED:
        assert X.member(s.member) and not X.member(s.nonmember)
