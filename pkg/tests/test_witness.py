from fractions import Fraction as F

import pytest
from hypothesis import given

from conftest import CORPUS, points
from sawitness.fileformat import load_sets, parse_expressions
from sawitness.harness import grid_connectivity
from sawitness.interval import Status, certify_set_status
from sawitness.rae import parse_rae
from sawitness.rewrite import MalformedExpression
from sawitness.sets import (
    AffineMap,
    Box,
    ball_of,
    box_set,
    sa_complement,
    sa_intersect,
    shape_bound,
    sphere_of,
)
from sawitness.witness import choose_tau, make_pair_sets, witness_cpfree, witness_onepass

ENV = load_sets([CORPUS / "sets3.sets"])
TAU = AffineMap(F(1, 4), (F(1, 2), F(-1, 4), F(1, 8)))
A, B = make_pair_sets(TAU)
UNIT = sphere_of(AffineMap.identity(3), 3)


def exprs(*texts):
    return [parse_rae(t, ENV, 3) for t in texts]


def test_choose_tau_examples():
    tau = choose_tau(Box.cube(0, 1, 3), F(1, 2))
    assert tau.translation == (F(1, 2),) * 3 and tau.scale == F(1, 4)
    tau = choose_tau(Box([(0, 1), (0, 2), (0, 4)]), F(1, 2))
    assert tau.scale == F(1, 4) and tau.translation == (F(1, 2), 1, 2)
    with pytest.raises(ValueError):
        choose_tau(Box.cube(0, 1, 3), 1)


@pytest.mark.parametrize("V", [Box.cube(0, 1, 3), Box([(0, 1), (0, 2), (0, 4)]),
                               Box([(F(-1, 3), F(1, 5)), (2, 3), (-7, 1)])])
def test_ball_certified_inside_box(V):
    tau = choose_tau(V, F(9, 10))
    outside = sa_complement(box_set(V))
    status = certify_set_status(sa_intersect(ball_of(tau, 3), outside), shape_bound(tau))
    assert status.status is Status.FULLY_OUT


@given(points(3))
def test_A_is_the_image_of_the_unit_sphere(q):
    image = tuple(TAU.scale * c + t for c, t in zip(q, TAU.translation))
    assert A.member(image) == UNIT.member(q)


@given(points(3, 1, 16))
def test_B_is_A_plus_the_center(p):
    if p == TAU.translation:
        assert B.member(p) and not A.member(p)
    else:
        assert B.member(p) == A.member(p)
    assert B.distinguished_points == (TAU.translation,)
    assert A.distinguished_points == ()


def test_empty_list_is_vacuous():
    pair = witness_cpfree([], 3)
    assert pair.verdicts == () and pair.all_equal
    region = shape_bound(pair.tau)
    res = pair.tau.scale / 4
    assert grid_connectivity(pair.A, region, res).count == 1
    assert grid_connectivity(pair.B, region, res, seeds=pair.B.distinguished_points).count == 2


def test_plain_projection_is_structurally_equal():
    pair = witness_cpfree(exprs("proj[1,2](S)"), 3, samples=500)
    methods = {v.method: v for v in pair.verdicts}
    assert methods["structural"].verdict.kind == "Equal"
    assert "same disk" in methods["structural"].detail
    assert methods["sampled"].verdict.kind == "Equal"


def test_worked_example_all_equal():
    e = exprs(r"proj[1,2]((S & G1) | (G2 \ S)) \ proj[1,3](S | G3)")
    pair = witness_cpfree(e, 3, samples=1000)
    assert pair.all_equal and len(pair.verdicts) == 2
    assert pair.V.within(Box.cube(-1, 1, 3))


def test_cpfree_rejects_other_fragments():
    with pytest.raises(MalformedExpression):
        witness_cpfree(exprs("proj[1,2](S x T)"), 3)
    with pytest.raises(MalformedExpression):
        witness_cpfree(exprs("proj[1](S)"), 3)
    with pytest.raises(ValueError):
        witness_cpfree([], 5)


def test_onepass_first_candidate_for_plain_projection():
    pair = witness_onepass(exprs("proj[1,2](S)"), samples=500, workers=1)
    assert pair.rejected == () and pair.all_equal
    assert [v.method for v in pair.verdicts] == ["nf-equality", "squeeze"]


def test_onepass_with_full_cylinder():
    pair = witness_onepass(exprs("proj[3,5](S x R2)"), samples=500, workers=1)
    assert pair.rejected == () and pair.all_equal


def test_onepass_crafted_instance_shrinks_past_the_locus():
    lines = parse_expressions((CORPUS / "onepass" / "list05.rae").read_text(), ENV, 3)
    pair = witness_onepass([e for _, e in lines], samples=1000, workers=2)
    assert [t.scale for t in pair.rejected] == [F(1, 2), F(1, 4), F(1, 8)]
    assert pair.tau.scale == F(1, 16) and pair.tau.translation == (0, 0, 0)
    assert pair.all_equal


def test_onepass_rejects_non_positive():
    with pytest.raises(MalformedExpression):
        witness_onepass(exprs(r"proj[1,2](S \ G1)"))
