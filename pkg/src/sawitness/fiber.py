"""Deciding whether a basic set has a point inside a box.

This is the existential step behind projection: after the output coordinates
are fixed, the remaining (projected-away) coordinates range over a bounded
box and we ask whether the fiber is empty.  One free variable is decided
exactly (degree <= 2); linear equations are eliminated; everything else goes
through branch and bound, with interval certificates for emptiness and exact
one-variable solves at box centers for nonemptiness.
"""
from __future__ import annotations

import enum
import functools
from collections import deque
from fractions import Fraction
from typing import Mapping, Sequence

from . import univariate
from .interval import _count_box, basic_status
from .poly import Polynomial, int_point
from .sets import BasicSet, Box, SemiAlgebraicSet

DEFAULT_FIBER_BUDGET = 256


class Verdict(enum.Enum):
    IN = "In"
    OUT = "Out"
    UNKNOWN = "Unknown"

    def __str__(self):
        return self.value


def _drop_unused(d: BasicSet, box: Box):
    used = sorted({i for p in d.atoms() for i in p.variables()})
    if len(used) == d.num_vars:
        return d, box
    mapping = [0] * d.num_vars
    for k, i in enumerate(used):
        mapping[i] = k
    if not used:
        return BasicSet(0, d.equations, d.strict_positives), None
    return d.reindexed(mapping, len(used)), box.select(used)


def _linear_pivot(d: BasicSet):
    """An equation ``a*x_j + r = 0`` with constant ``a`` and ``r`` free of ``x_j``."""
    for f in d.equations:
        for j in f.variables():
            if f.degree_in(j) != 1:
                continue
            unit = tuple(1 if i == j else 0 for i in range(f.num_vars))
            if all(e == unit or e[j] == 0 for e in f.terms):
                return f, j, f.terms[unit]
    return None


def _lone_linear(d: BasicSet):
    """A variable occurring in a single atom, a strict inequality linear in it with constant slope."""
    count: dict[int, int] = {}
    for p in d.atoms():
        for j in p.variables():
            count[j] = count.get(j, 0) + 1
    for g in d.strict_positives:
        for j in g.variables():
            if count[j] != 1 or g.degree_in(j) != 1:
                continue
            unit = tuple(1 if i == j else 0 for i in range(g.num_vars))
            if all(e == unit or e[j] == 0 for e in g.terms):
                return g, j, g.terms[unit]
    return None


def _drop_lone(d: BasicSet, box: Box, g: Polynomial, j: int, a: Fraction):
    """``a*x_j + r > 0`` for some ``x_j`` in the open interval iff it holds at the favorable end."""
    lo, hi = box.intervals[j]
    end = {j: hi if a > 0 else lo}
    gts = [h.substitute(end) if h is g else h for h in d.strict_positives]
    n = d.num_vars
    keep = [i for i in range(n) if i != j]
    mapping = [0] * n
    for k, i in enumerate(keep):
        mapping[i] = k
    reduced = BasicSet.make(n - 1, [f.reindex(mapping, n - 1) for f in d.equations],
                            [h.reindex(mapping, n - 1) for h in gts])
    return reduced, box.select(keep)


def _eliminate(d: BasicSet, box: Box, f: Polynomial, j: int, a: Fraction):
    n = d.num_vars
    x = Polynomial.variable(n, j)
    value = x - f * (1 / a)  # equals -r/a, free of x_j
    images = [value if i == j else Polynomial.variable(n, i) for i in range(n)]
    lo, hi = box.intervals[j]
    eqs = [h.compose(images) for h in d.equations if h is not f]
    gts = [g.compose(images) for g in d.strict_positives] + [value - lo, hi - value]
    keep = [i for i in range(n) if i != j]
    mapping = [0] * n
    for k, i in enumerate(keep):
        mapping[i] = k
    reduced = BasicSet.make(n - 1, [h.reindex(mapping, n - 1) for h in eqs],
                            [g.reindex(mapping, n - 1) for g in gts])
    return reduced, box.select(keep)


def _solve_one(d: BasicSet, box: Box, point, j: int):
    """Fix every variable except ``j`` at ``point`` and decide the line exactly."""
    values = {i: point[i] for i in range(d.num_vars) if i != j}
    eqs = [f.substitute(values) for f in d.equations]
    gts = [g.substitute(values) for g in d.strict_positives]
    lo, hi = box.intervals[j]
    return univariate.decide_fast(eqs, gts, lo, hi) is True


def _branch_and_bound(d: BasicSet, box: Box, budget: int) -> Verdict:
    eq_vars = sorted({i for f in d.equations for i in f.variables()})
    solve_vars = (eq_vars or list(range(d.num_vars)))[:2]
    queue = deque([box])
    examined = 0
    undecided = False
    try:
        while queue:
            b = queue.popleft()
            examined += 1
            status = basic_status(d, b)
            if status is True:
                return Verdict.IN
            if status is False:
                continue
            c = b.center()
            if not d.equations and d.member(c):
                return Verdict.IN
            if any(_solve_one(d, b, c, j) for j in solve_vars):
                return Verdict.IN
            if examined + len(queue) < budget:
                queue.extend(b.bisect())
            else:
                undecided = True
    finally:
        _count_box(examined)
    return Verdict.UNKNOWN if undecided else Verdict.OUT


def decide_basic(d: BasicSet | None, box: Box | None, budget: int = DEFAULT_FIBER_BUDGET) -> Verdict:
    """Does ``d`` meet the open box?  ``box`` is ``None`` for zero variables."""
    while True:
        if d is None:
            return Verdict.OUT
        d, box = _drop_unused(d, box)
        if d.num_vars == 0:
            return Verdict.IN if not d.atoms() else _constant_verdict(d)
        if d.num_vars == 1:
            lo, hi = box.intervals[0]
            ok = univariate.decide_fast(d.equations, d.strict_positives, lo, hi)
            if ok is not None:
                return Verdict.IN if ok else Verdict.OUT
            return _branch_and_bound(d, box, budget)
        lone = _lone_linear(d)
        if lone is not None:
            d, box = _drop_lone(d, box, *lone)
            continue
        pivot = _linear_pivot(d)
        if pivot is None:
            return _branch_and_bound(d, box, budget)
        d, box = _eliminate(d, box, *pivot)


def _constant_verdict(d: BasicSet) -> Verdict:
    ok = all(f.constant_value() == 0 for f in d.equations) and all(
        g.constant_value() > 0 for g in d.strict_positives)
    return Verdict.IN if ok else Verdict.OUT


def decide_fiber(X: SemiAlgebraicSet, fixed: Mapping[int, Fraction], free_box: Box | None,
                 budget: int = DEFAULT_FIBER_BUDGET) -> Verdict:
    """Is there a point of ``X`` with coordinates ``fixed`` and the rest in ``free_box``?

    Free coordinates keep their relative order; ``free_box`` is ``None`` when
    every coordinate is fixed.
    """
    if free_box is None:
        point = [fixed[i] for i in range(X.num_vars)]
        return Verdict.IN if X.member(point) else Verdict.OUT
    m = X.num_vars - len(fixed)
    verdict = Verdict.OUT
    for d in X.disjuncts:
        reduced = BasicSet.make(m, [f.substitute(fixed) for f in d.equations],
                                [g.substitute(fixed) for g in d.strict_positives])
        v = decide_basic(reduced, free_box, budget)
        if v is Verdict.IN:
            return v
        if v is Verdict.UNKNOWN:
            verdict = v
    return verdict


# -- one free coordinate, decided on a formula tree --------------------------------
#
# Formulas are nested tuples: ("atom", index, "eq" | "gt"), ("and", parts),
# ("or", parts), ("not", part).  Atoms index into a list of polynomials.

def set_formula(X: SemiAlgebraicSet, atoms: list, seen: dict):
    """Formula of ``X``'s disjunctive form, registering its atoms."""
    def atom(p, kind):
        key = (p.num_vars, tuple(sorted(p.terms.items())))
        if key not in seen:
            seen[key] = len(atoms)
            atoms.append(p)
        return ("atom", seen[key], kind)

    return ("or", tuple(("and", tuple([atom(f, "eq") for f in d.equations]
                                      + [atom(g, "gt") for g in d.strict_positives]))
                        for d in X.disjuncts))


def _holds(formula, signs) -> bool:
    tag = formula[0]
    if tag == "atom":
        s = signs[formula[1]]
        return s == 0 if formula[2] == "eq" else s > 0
    if tag == "and":
        return all(_holds(f, signs) for f in formula[1])
    if tag == "or":
        return any(_holds(f, signs) for f in formula[1])
    return not _holds(formula[1], signs)


def _compile_atom(p: Polynomial, pos, free):
    """Integer plan turning fixed coordinates into coefficients in the free variable."""
    _, terms = p.int_form()
    plan, top, width = [], 0, 1
    for c, exps, _ in terms:
        fixed = tuple((pos[i], e) for i, e in exps if i != free)
        fe = next((e for i, e in exps if i == free), 0)
        fdeg = sum(e for _, e in fixed)
        top = max(top, fdeg)
        width = max(width, fe + 1)
        plan.append((c, fixed, fe, fdeg))
    return top, width, tuple(plan)


def _coefficients(compiled, nums, den, powers):
    top, width, plan = compiled
    out = [0] * width
    for c, fixed, fe, fdeg in plan:
        v = c
        for key in fixed:
            pw = powers.get(key)
            if pw is None:
                pw = powers[key] = nums[key[0]] ** key[1]
            v *= pw
        if fdeg != top:
            v *= den ** (top - fdeg)
        out[fe] += v
    return out


class TreeFiber:
    """Exact fiber test when one coordinate is free and atoms have degree <= 2 in it.

    Every atom is sign-invariant between consecutive roots, so the formula is
    evaluated at each root and at one rational inside each gap.  Returns
    ``None`` when some atom has higher degree at the query.
    """

    def __init__(self, formula, atoms: Sequence[Polynomial], fixed: Sequence[int], free: int, bound):
        self.formula = formula
        pos = {i: k for k, i in enumerate(fixed)}
        self.plans = [_compile_atom(p, pos, free) for p in atoms]
        self.exact = all(p.degree_in(free) <= univariate.MAX_EXACT_DEGREE for p in atoms)
        lo, hi = Fraction(bound[0]), Fraction(bound[1])
        self.lo = (lo.numerator, 0, 0, lo.denominator)
        self.hi = (hi.numerator, 0, 0, hi.denominator)

    def __call__(self, values: Sequence[Fraction]) -> Verdict | None:
        """``values`` are the fixed coordinates, in increasing coordinate order."""
        if not self.exact:
            return None
        nums, den = int_point(values)
        powers: dict = {}
        polys = [univariate.trim(_coefficients(c, nums, den, powers)) for c in self.plans]
        roots = []
        for cs in polys:
            if len(cs) >= 2:
                roots += [r for r in univariate.int_roots(cs)
                          if univariate.int_compare(r, self.lo) > 0 and univariate.int_compare(r, self.hi) < 0]
        roots.sort(key=functools.cmp_to_key(univariate.int_compare))
        marks = [self.lo]
        for r in roots:
            if univariate.int_compare(r, marks[-1]) != 0:
                marks.append(r)
        marks.append(self.hi)
        points = marks[1:-1] + [univariate.int_between(a, b) for a, b in zip(marks, marks[1:])]
        for pt in points:
            signs = [univariate.int_sign_at(cs, pt) if cs else 0 for cs in polys]
            if _holds(self.formula, signs):
                return Verdict.IN
        return Verdict.OUT
