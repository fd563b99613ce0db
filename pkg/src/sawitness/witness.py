"""Counterexample witnesses: a sphere ``A`` and a dotted sphere ``B`` no query separates.

``A = τ(□)`` is connected and ``B = τ(⊡)`` (the same sphere plus its center)
is not, yet every expression of the list returns the same set on both.  For
product-free lists the equality follows from normal forms on a uniform box;
for positive one-pass lists a placement ``τ`` is searched until the sphere and
the solid ball give the same answers, and monotonicity squeezes ``B`` between.
"""
from __future__ import annotations

import contextvars
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .fiber import DEFAULT_FIBER_BUDGET, Verdict
from .findset import DEFAULT_SEARCH_BUDGET
from .harness import DEFAULT_SAMPLES, DEFAULT_UNKNOWN_CEILING, Differ, Equal, Unknown, sets_equal
from .interval import DEFAULT_CERT_BUDGET
from .oracle import MembershipOracle, eval_oracle
from .rae import RAE, Constant, Projection, classify, input_arity
from .rewrite import (
    FREE,
    Kind,
    MalformedExpression,
    NormalForm,
    OnePassNF,
    eliminate_intersection,
    extract_components,
    normalize_cpfree,
    normalize_onepass,
)
from .sampling import sample_points
from .sets import AffineMap, Box, SemiAlgebraicSet, ball_inside_box, ball_of, dotted_sphere_of, sphere_of

DEFAULT_MARGIN = Fraction(1, 2)
DEFAULT_SCALES = tuple(Fraction(1, 2 ** m) for m in range(1, 13))


@dataclass(frozen=True)
class ExprVerdict:
    """One check on one expression; ``expr_id`` is the 0-based position in the list."""
    expr_id: int
    method: str  # "structural", "sampled", "nf-equality" or "squeeze"
    verdict: Equal | Differ | Unknown
    detail: str = ""


@dataclass(frozen=True)
class WitnessPair:
    tau: AffineMap
    A: SemiAlgebraicSet
    B: SemiAlgebraicSet
    verdicts: tuple[ExprVerdict, ...]
    V: Box | None = None
    rejected: tuple[AffineMap, ...] = ()
    normal_forms: tuple[str, ...] = field(default=(), repr=False)

    @property
    def all_equal(self) -> bool:
        return all(v.verdict.kind == "Equal" for v in self.verdicts)

    @property
    def any_differ(self) -> bool:
        return any(v.verdict.kind == "Differ" for v in self.verdicts)


def choose_tau(V: Box, margin=DEFAULT_MARGIN) -> AffineMap:
    """Center ``τ`` in ``V`` with scale ``margin`` times half the smallest width."""
    margin = Fraction(margin)
    if not 0 < margin < 1:
        raise ValueError(f"margin {margin} is not in (0, 1)")
    scale = margin * min(V.widths()) / 2
    tau = AffineMap(scale, V.center())
    if not ball_inside_box(tau, V):
        raise AssertionError("closed ball escaped its box")
    return tau


def make_pair_sets(tau: AffineMap) -> tuple[SemiAlgebraicSet, SemiAlgebraicSet]:
    n = tau.dim
    return sphere_of(tau, n), dotted_sphere_of(tau, n)


def _hull_cube(box: Box, dim: int) -> Box:
    return Box.cube(min(box.lows), max(box.highs), dim)


def _focus(tau: AffineMap, dim: int) -> Box:
    """Box around every coordinate of ``τ``'s ball, widened by half its radius."""
    r = tau.scale * Fraction(3, 2)
    return Box.cube(min(tau.translation) - r, max(tau.translation) + r, dim)


# -- product-free lists ------------------------------------------------------------

def _component_claim(nf: NormalForm) -> str:
    if nf.kind is Kind.CONST_MINUS_INPUT:
        return f"{nf}: the projection of Γ−S is that of Γ, since V lies inside Γ"
    if nf.kind is Kind.CONST:
        return f"{nf}: independent of the input"
    return f"{nf}: the projected sphere and dotted sphere are the same disk"


def witness_cpfree(exprs: Sequence[RAE], n: int, U: Box | None = None,
                   budget: int = DEFAULT_SEARCH_BUDGET, cert_budget: int = DEFAULT_CERT_BUDGET,
                   samples: int = DEFAULT_SAMPLES, seed: int = 0, margin=DEFAULT_MARGIN,
                   fiber_budget: int = DEFAULT_FIBER_BUDGET) -> WitnessPair:
    """Witness pair for product-free expressions of arity ``n - 1`` over an input in ``R^n``.

    Components of all expressions are normalized left to right, each on the
    box left by the previous one, starting from ``U`` (default ``(-1, 1)^n``).
    """
    if n not in (3, 4):
        raise ValueError(f"dimension {n} is not 3 or 4")
    U = U if U is not None else Box.cube(Fraction(-1), Fraction(1), n)
    plans = []
    for i, e in enumerate(exprs):
        if not classify(e).cartesian_product_free:
            raise MalformedExpression(f"expression {i} uses a cartesian product")
        if e.arity != n - 1:
            raise MalformedExpression(f"expression {i} has arity {e.arity}, expected {n - 1}")
        m = input_arity(e)
        if m is not None and m != n:
            raise MalformedExpression(f"expression {i} reads an input of arity {m}, expected {n}")
        plans.append(extract_components(eliminate_intersection(e)))
    V = U
    forms: list[list[tuple]] = []
    for plan in plans:
        mine = []
        for comp in plan.components:
            nf, V = normalize_cpfree(comp.expr, V, budget, cert_budget)
            mine.append((comp, nf))
        forms.append(mine)
    tau = choose_tau(V, margin)
    A, B = make_pair_sets(tau)
    region = _hull_cube(U, n - 1)
    focus = _focus(tau, n - 1)
    search = Box([region.intervals[0]])
    verdicts, labels = [], []
    for i, (e, mine) in enumerate(zip(exprs, forms)):
        claims = [f"proj[{','.join(map(str, c.indices))}] {_component_claim(nf)}" for c, nf in mine]
        labels.extend(str(nf) for _, nf in mine)
        verdicts.append(ExprVerdict(i, "structural", Equal(True, 0), "; ".join(claims) or "input-free"))
        extra = [tuple(tau.translation[j - 1] for j in c.indices) for c, _ in mine]
        left = eval_oracle(e, A, search, fiber_budget, seed)
        right = eval_oracle(e, B, search, fiber_budget, seed)
        verdicts.append(ExprVerdict(i, "sampled", sets_equal(left, right, region, samples, seed + i,
                                                               focus=focus, extra_points=extra)))
    return WitnessPair(tau, A, B, tuple(verdicts), V, (), tuple(labels))


# -- positive one-pass lists ----------------------------------------------------------

def onepass_oracle(nf: OnePassNF, S: SemiAlgebraicSet, search_bound: Box,
                   budget: int = DEFAULT_FIBER_BUDGET, seed: int = 0) -> MembershipOracle:
    """Oracle for the normal form at input ``S`` without rebuilding the original tree.

    Coordinates that occur in no atom get an arbitrary interval; unknown bounds
    fall back to ``search_bound``'s first interval.
    """
    body = nf.body(S)
    intervals = []
    for b in nf.body_bounds(S):
        if b is FREE:
            intervals.append((Fraction(-1), Fraction(1)))
        elif b is None:
            intervals.append(search_bound.intervals[0])
        else:
            intervals.append(b)
    body = body.with_bound(Box(intervals))
    e = Projection(nf.indices, Constant("body", body))
    return eval_oracle(e, S, search_bound, budget, seed)


def squeeze_check(e: RAE, tau: AffineMap, region: Box, samples: int, seed: int,
                  search_bound: Box, budget: int = DEFAULT_FIBER_BUDGET,
                  focus: Box | None = None,
                  unknown_ceiling: float = DEFAULT_UNKNOWN_CEILING) -> Equal | Differ | Unknown:
    """Sampled ``e(τ□) ⊆ e(τ⊡) ⊆ e(τ■)``: a point In on a smaller input and Out on a larger one is a violation."""
    n = tau.dim
    chain = [eval_oracle(e, X, search_bound, budget, seed)
             for X in (sphere_of(tau, n), dotted_sphere_of(tau, n), ball_of(tau, n))]
    if focus is not None:
        half = samples // 2
        points = sample_points(focus, half, seed) + sample_points(region, samples - half, seed + 1)
    else:
        points = sample_points(region, samples, seed)
    points = list(dict.fromkeys([*(h for o in chain for h in o.hints), *points]))
    unknown = 0
    for p in points:
        answers = [o(p) for o in chain]
        if Verdict.UNKNOWN in answers:
            unknown += 1
        for small, big in zip(answers, answers[1:]):
            if small is Verdict.IN and big is Verdict.OUT:
                return Differ(p, str(small), str(big))
    rate = unknown / len(points) if points else 0.0
    if unknown and rate >= unknown_ceiling:
        return Unknown(rate, len(points))
    return Equal(False, len(points), rate)


def default_centers(U: Box) -> list[tuple[Fraction, ...]]:
    """``U``'s center first, then the 3^n grid of quarter points (lexicographic)."""
    center = U.center()
    grid = [()]
    for lo, hi in U.intervals:
        w = hi - lo
        grid = [g + (lo + w * q,) for g in grid for q in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))]
    return [center] + [g for g in grid if g != center]


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("SA_WITNESS_THREADS", "1")))
    except ValueError:
        return 1


def witness_onepass(exprs: Sequence[RAE], n: int = 3, U: Box | None = None,
                    centers: Sequence | None = None, scales: Sequence = DEFAULT_SCALES,
                    samples: int = DEFAULT_SAMPLES, seed: int = 0,
                    unknown_ceiling: float = DEFAULT_UNKNOWN_CEILING,
                    fiber_budget: int = DEFAULT_FIBER_BUDGET,
                    workers: int | None = None) -> WitnessPair:
    """Search placements ``τ`` until every normal form agrees on the sphere and the ball.

    Candidates are tried center by center, scales shrinking, and must keep the
    closed ball inside ``U`` (default ``(-2, 2)^n``).  The schedule-earliest
    accepted ``τ`` wins; candidates before it are listed as rejected.
    """
    U = U if U is not None else Box.cube(Fraction(-2), Fraction(2), n)
    nfs = []
    for i, e in enumerate(exprs):
        if not classify(e).positive_one_pass:
            raise MalformedExpression(f"expression {i} is not positive one-pass")
        if input_arity(e) != n:
            raise MalformedExpression(f"expression {i} reads an input of arity {input_arity(e)}, expected {n}")
        nfs.append(normalize_onepass(e))
    centers = default_centers(U) if centers is None else [tuple(Fraction(c) for c in p) for p in centers]
    candidates = [AffineMap(Fraction(s), c) for c in centers for s in scales]
    candidates = [t for t in candidates if ball_inside_box(t, U)]
    if not candidates:
        raise ValueError("no candidate placement fits inside the search box")
    search = Box([(min(U.lows), max(U.highs))])

    def evaluate(tau):
        results = []
        for i, (e, nf) in enumerate(zip(exprs, nfs)):
            region = _hull_cube(U, e.arity)
            focus = _focus(tau, e.arity)
            left = onepass_oracle(nf, sphere_of(tau, n), search, fiber_budget, seed)
            right = onepass_oracle(nf, ball_of(tau, n), search, fiber_budget, seed)
            v = sets_equal(left, right, region, samples, seed + i, focus=focus,
                           unknown_ceiling=unknown_ceiling)
            results.append(v)
            if v.kind != "Equal":
                break
        return results

    workers = workers or _workers()
    rejected, accepted = [], None
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        for start in range(0, len(candidates), workers):
            batch = candidates[start:start + workers]
            if pool is None:
                outcomes = [evaluate(t) for t in batch]
            else:
                futures = [pool.submit(contextvars.copy_context().run, evaluate, t) for t in batch]
                outcomes = [f.result() for f in futures]
            for tau, res in zip(batch, outcomes):
                if len(res) == len(exprs) and all(v.kind == "Equal" for v in res):
                    accepted = (tau, res)
                    break
                rejected.append(tau)
            if accepted:
                break
    finally:
        if pool is not None:
            pool.shutdown()
    if accepted is None:
        tau = candidates[-1]
        A, B = make_pair_sets(tau)
        verdicts = tuple(ExprVerdict(i, "nf-equality", Unknown(1.0, 0), "no placement accepted")
                         for i in range(len(exprs)))
        return WitnessPair(tau, A, B, verdicts, None, tuple(rejected[:-1]), tuple(map(str, nfs)))
    tau, res = accepted
    A, B = make_pair_sets(tau)
    verdicts = []
    for i, (e, v) in enumerate(zip(exprs, res)):
        verdicts.append(ExprVerdict(i, "nf-equality", v, "sphere and ball agree on the normal form"))
        region = _hull_cube(U, e.arity)
        sq = squeeze_check(e, tau, region, samples, seed + i, search, fiber_budget,
                           _focus(tau, e.arity), unknown_ceiling)
        verdicts.append(ExprVerdict(i, "squeeze", sq, "sphere ⊆ dotted sphere ⊆ ball, pointwise on samples"))
    return WitnessPair(tau, A, B, tuple(verdicts), None, tuple(rejected), tuple(map(str, nfs)))
