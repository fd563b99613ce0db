"""Semi-algebraic sets in disjunctive form, open boxes and affine maps.

A set is a finite union of basic sets; a basic set is a conjunction of
polynomial equations ``f = 0`` and strict inequalities ``g > 0``.  Atoms are
stored in primitive integer form (a positive rescaling never changes a sign
condition), which makes duplicate and contradiction detection syntactic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Iterable, Sequence

from .poly import DimensionError, Point, Polynomial, as_fraction, int_point, linear

DEFAULT_DISJUNCT_BUDGET = 4096


class DisjunctBudgetExceeded(RuntimeError):
    """Complement or intersection would produce more disjuncts than allowed."""


# -- boxes -------------------------------------------------------------------

class Box:
    """Open axis-aligned box with rational endpoints."""

    __slots__ = ("intervals", "_int")

    def __init__(self, intervals: Iterable[tuple]):
        ivs = tuple((as_fraction(lo), as_fraction(hi)) for lo, hi in intervals)
        for lo, hi in ivs:
            if not lo < hi:
                raise ValueError(f"empty interval ({lo}, {hi})")
        self.intervals = ivs
        self._int = None

    @classmethod
    def cube(cls, lo, hi, dim: int) -> Box:
        return cls([(lo, hi)] * dim)

    @classmethod
    def around(cls, center: Point, radius) -> Box:
        r = as_fraction(radius)
        return cls([(c - r, c + r) for c in center])

    @property
    def dim(self) -> int:
        return len(self.intervals)

    @property
    def lows(self) -> tuple[Fraction, ...]:
        return tuple(lo for lo, _ in self.intervals)

    @property
    def highs(self) -> tuple[Fraction, ...]:
        return tuple(hi for _, hi in self.intervals)

    def center(self) -> tuple[Fraction, ...]:
        return tuple((lo + hi) / 2 for lo, hi in self.intervals)

    def widths(self) -> tuple[Fraction, ...]:
        return tuple(hi - lo for lo, hi in self.intervals)

    def widest_axis(self) -> int:
        widths = self.widths()
        return max(range(len(widths)), key=lambda i: (widths[i], -i))

    def bisect(self, axis: int | None = None) -> tuple[Box, Box]:
        if axis is None:
            axis = self.widest_axis()
        lo, hi = self.intervals[axis]
        mid = (lo + hi) / 2
        left = list(self.intervals)
        right = list(self.intervals)
        left[axis] = (lo, mid)
        right[axis] = (mid, hi)
        return Box(left), Box(right)

    def contains(self, point: Point) -> bool:
        return all(lo < c < hi for c, (lo, hi) in zip(point, self.intervals))

    def contains_closed(self, point: Point) -> bool:
        return all(lo <= c <= hi for c, (lo, hi) in zip(point, self.intervals))

    def within(self, other: Box) -> bool:
        """Closed containment ``self ⊆ other``."""
        return all(olo <= lo and hi <= ohi
                   for (lo, hi), (olo, ohi) in zip(self.intervals, other.intervals))

    def intersection(self, other: Box) -> Box | None:
        ivs = [(max(a, c), min(b, d)) for (a, b), (c, d) in zip(self.intervals, other.intervals)]
        if any(lo >= hi for lo, hi in ivs):
            return None
        return Box(ivs)

    def hull(self, other: Box) -> Box:
        return Box([(min(a, c), max(b, d)) for (a, b), (c, d) in zip(self.intervals, other.intervals)])

    def select(self, axes: Sequence[int]) -> Box:
        return Box([self.intervals[i] for i in axes])

    def int_form(self):
        """``(q, lows, highs)``: integer endpoints over the common denominator ``q``."""
        if self._int is None:
            q = 1
            for lo, hi in self.intervals:
                q = lcm(q, lo.denominator, hi.denominator)
            self._int = (q,
                         tuple(lo.numerator * (q // lo.denominator) for lo, _ in self.intervals),
                         tuple(hi.numerator * (q // hi.denominator) for _, hi in self.intervals))
        return self._int

    def __eq__(self, other):
        return isinstance(other, Box) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __repr__(self):
        body = " x ".join(f"({lo}, {hi})" for lo, hi in self.intervals)
        return f"Box[{body}]"


# -- affine maps -------------------------------------------------------------

@dataclass(frozen=True)
class AffineMap:
    """``x -> scale * x + translation`` with a uniform positive scale."""

    scale: Fraction
    translation: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "scale", as_fraction(self.scale))
        object.__setattr__(self, "translation", tuple(as_fraction(t) for t in self.translation))
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    @classmethod
    def identity(cls, dim: int) -> AffineMap:
        return cls(Fraction(1), (Fraction(0),) * dim)

    @property
    def dim(self) -> int:
        return len(self.translation)

    def apply(self, point: Point) -> tuple[Fraction, ...]:
        return tuple(self.scale * as_fraction(c) + t for c, t in zip(point, self.translation))

    def inverse_apply(self, point: Point) -> tuple[Fraction, ...]:
        return tuple((as_fraction(c) - t) / self.scale for c, t in zip(point, self.translation))


def poly_compose_affine(p: Polynomial, tau: AffineMap) -> Polynomial:
    """Polynomial whose zero/sign pattern is that of ``p`` pulled through ``tau``.

    Returns ``scale**deg * p((x - t) / scale)``, so its sign at ``tau(q)``
    equals the sign of ``p`` at ``q``.
    """
    n = p.num_vars
    if tau.dim != n:
        raise DimensionError(f"map of dimension {tau.dim} for {n} variables")
    images = [linear(n, [1 if j == i else 0 for j in range(n)], -tau.translation[i]) * (1 / tau.scale)
              for i in range(n)]
    return p.compose(images) * (tau.scale ** p.degree)


# -- basic and semi-algebraic sets ------------------------------------------

def _canonical_eq(p: Polynomial) -> Polynomial:
    p = p.primitive()
    if p.terms[p.leading_exponent()] < 0:
        p = -p
    return p


class _Infeasible(Exception):
    pass


@dataclass(frozen=True)
class BasicSet:
    """``{x : f(x) = 0 for f in equations, g(x) > 0 for g in strict_positives}``."""

    num_vars: int
    equations: tuple[Polynomial, ...] = ()
    strict_positives: tuple[Polynomial, ...] = ()

    @classmethod
    def make(cls, num_vars: int, equations: Iterable[Polynomial] = (),
             strict_positives: Iterable[Polynomial] = ()) -> BasicSet | None:
        """Normalized basic set, or ``None`` when syntactically unsatisfiable."""
        try:
            eqs: dict[Polynomial, None] = {}
            for f in equations:
                _check_vars(f, num_vars)
                if f.is_constant():
                    if f.constant_value() != 0:
                        raise _Infeasible
                    continue
                eqs[_canonical_eq(f)] = None
            gts: dict[Polynomial, None] = {}
            for g in strict_positives:
                _check_vars(g, num_vars)
                if g.is_constant():
                    if g.constant_value() <= 0:
                        raise _Infeasible
                    continue
                gts[g.primitive()] = None
            for g in gts:
                if -g in gts:
                    raise _Infeasible
            for f in eqs:
                if f in gts or -f in gts:
                    raise _Infeasible
        except _Infeasible:
            return None
        return cls(num_vars, tuple(eqs), tuple(gts))

    def atoms(self) -> tuple[Polynomial, ...]:
        return self.equations + self.strict_positives

    def member(self, point: Point) -> bool:
        nums, den = int_point(point)
        return self._member_int(nums, den)

    def _member_int(self, nums, den) -> bool:
        for f in self.equations:
            if f.scaled_value(nums, den) != 0:
                return False
        for g in self.strict_positives:
            if g.scaled_value(nums, den) <= 0:
                return False
        return True

    def conjoin(self, other: BasicSet) -> BasicSet | None:
        return BasicSet.make(self.num_vars, self.equations + other.equations,
                             self.strict_positives + other.strict_positives)

    def reindexed(self, mapping: Sequence[int], num_vars: int) -> BasicSet:
        return BasicSet(num_vars, tuple(_canonical_eq(f.reindex(mapping, num_vars)) for f in self.equations),
                        tuple(g.reindex(mapping, num_vars) for g in self.strict_positives))


def _check_vars(p: Polynomial, n: int):
    if p.num_vars != n:
        raise DimensionError(f"polynomial in {p.num_vars} variables inside a set in R^{n}")


@dataclass(frozen=True)
class SemiAlgebraicSet:
    """Finite union of :class:`BasicSet` disjuncts.

    ``declared_bound`` is an open box claimed to contain the set; it is only
    used by sampling and fiber search.  ``distinguished_points`` are rational
    points known to lie in the set (checked on construction).
    """

    num_vars: int
    disjuncts: tuple[BasicSet, ...] = ()
    declared_bound: Box | None = None
    distinguished_points: tuple[tuple[Fraction, ...], ...] = field(default=())

    def __post_init__(self):
        seen = {}
        for d in self.disjuncts:
            if d.num_vars != self.num_vars:
                raise DimensionError("disjunct dimension mismatch")
            seen.setdefault(d, None)
        object.__setattr__(self, "disjuncts", tuple(seen))
        if self.declared_bound is not None and self.declared_bound.dim != self.num_vars:
            raise DimensionError("declared bound dimension mismatch")
        pts = tuple(dict.fromkeys(tuple(as_fraction(c) for c in p) for p in self.distinguished_points))
        object.__setattr__(self, "distinguished_points", pts)
        for p in pts:
            if len(p) != self.num_vars or not self.member(p):
                raise ValueError(f"distinguished point {p} is not a member")

    def member(self, point: Point) -> bool:
        if len(point) != self.num_vars:
            raise DimensionError(f"point of length {len(point)} for a set in R^{self.num_vars}")
        nums, den = int_point([as_fraction(c) for c in point])
        return any(d._member_int(nums, den) for d in self.disjuncts)

    def member_many(self, points: Iterable[Point]) -> list[bool]:
        """Membership of many points, evaluating each distinct atom once per point."""
        atoms = list(dict.fromkeys(a for d in self.disjuncts for a in d.atoms()))
        index = {a: k for k, a in enumerate(atoms)}
        plan = [([index[f] for f in d.equations], [index[g] for g in d.strict_positives])
                for d in self.disjuncts]
        out = []
        for point in points:
            nums, den = int_point(point)
            values = [a.scaled_value(nums, den) for a in atoms]
            out.append(any(all(values[i] == 0 for i in eq) and all(values[i] > 0 for i in gt)
                           for eq, gt in plan))
        return out

    def is_empty_syntactic(self) -> bool:
        return not self.disjuncts

    @cached_property
    def atoms(self) -> tuple[Polynomial, ...]:
        return tuple(dict.fromkeys(a for d in self.disjuncts for a in d.atoms()))

    def with_bound(self, bound: Box | None) -> SemiAlgebraicSet:
        return SemiAlgebraicSet(self.num_vars, self.disjuncts, bound, self.distinguished_points)

    def clipped(self, bound: Box) -> SemiAlgebraicSet:
        """Intersection with the open box, which then becomes the declared bound."""
        clipped = sa_intersect(self, box_set(bound))
        return clipped.with_bound(bound)

    def __str__(self):
        if not self.disjuncts:
            return "∅"
        parts = []
        for d in self.disjuncts:
            atoms = [f"{f} = 0" for f in d.equations] + [f"{g} > 0" for g in d.strict_positives]
            parts.append("{" + ", ".join(atoms) + "}" if atoms else f"R^{self.num_vars}")
        return " ∪ ".join(parts)


def sa_member(X: SemiAlgebraicSet, point: Point) -> bool:
    return X.member(point)


def empty_set(n: int) -> SemiAlgebraicSet:
    return SemiAlgebraicSet(n, ())


def full_space(n: int) -> SemiAlgebraicSet:
    return SemiAlgebraicSet(n, (BasicSet(n),))


def basic(n: int, eqs=(), gts=()) -> SemiAlgebraicSet:
    b = BasicSet.make(n, eqs, gts)
    return SemiAlgebraicSet(n, (b,) if b is not None else ())


def box_set(box: Box) -> SemiAlgebraicSet:
    n = box.dim
    gts = []
    for i, (lo, hi) in enumerate(box.intervals):
        x = Polynomial.variable(n, i)
        gts += [x - lo, hi - x]
    return basic(n, (), gts).with_bound(box)


def _same_dim(X: SemiAlgebraicSet, Y: SemiAlgebraicSet):
    if X.num_vars != Y.num_vars:
        raise DimensionError(f"sets in R^{X.num_vars} and R^{Y.num_vars}")


def _hull(a: Box | None, b: Box | None) -> Box | None:
    return a.hull(b) if a is not None and b is not None else None


def _meet(a: Box | None, b: Box | None) -> Box | None:
    if a is None:
        return b
    if b is None:
        return a
    return a.intersection(b) or a


def sa_union(X: SemiAlgebraicSet, Y: SemiAlgebraicSet) -> SemiAlgebraicSet:
    _same_dim(X, Y)
    return SemiAlgebraicSet(X.num_vars, X.disjuncts + Y.disjuncts, _hull(X.declared_bound, Y.declared_bound),
                            X.distinguished_points + Y.distinguished_points)


def _conjoin_all(n, left, right, budget):
    out = []
    for a in left:
        for b in right:
            c = a.conjoin(b)
            if c is not None:
                out.append(c)
                if len(out) > budget:
                    raise DisjunctBudgetExceeded(f"more than {budget} disjuncts")
    return tuple(out)


def sa_intersect(X: SemiAlgebraicSet, Y: SemiAlgebraicSet,
                 budget: int = DEFAULT_DISJUNCT_BUDGET) -> SemiAlgebraicSet:
    _same_dim(X, Y)
    pts = tuple(p for p in X.distinguished_points if Y.member(p))
    pts += tuple(p for p in Y.distinguished_points if X.member(p))
    return SemiAlgebraicSet(X.num_vars, _conjoin_all(X.num_vars, X.disjuncts, Y.disjuncts, budget),
                            _meet(X.declared_bound, Y.declared_bound), pts)


def _negate_basic(d: BasicSet) -> list[BasicSet]:
    n = d.num_vars
    out = []
    for f in d.equations:
        out += [BasicSet.make(n, (), (f,)), BasicSet.make(n, (), (-f,))]
    for g in d.strict_positives:
        out += [BasicSet.make(n, (g,), ()), BasicSet.make(n, (), (-g,))]
    return [b for b in out if b is not None]


def sa_complement(X: SemiAlgebraicSet, budget: int = DEFAULT_DISJUNCT_BUDGET) -> SemiAlgebraicSet:
    n = X.num_vars
    acc: tuple[BasicSet, ...] = (BasicSet(n),)
    for d in X.disjuncts:
        acc = _conjoin_all(n, acc, _negate_basic(d), budget)
        if not acc:
            break
    return SemiAlgebraicSet(n, acc)


def sa_difference(X: SemiAlgebraicSet, Y: SemiAlgebraicSet,
                  budget: int = DEFAULT_DISJUNCT_BUDGET) -> SemiAlgebraicSet:
    _same_dim(X, Y)
    n = X.num_vars
    acc = X.disjuncts
    for d in Y.disjuncts:
        if not acc:
            break
        acc = _conjoin_all(n, acc, _negate_basic(d), budget)
    pts = tuple(p for p in X.distinguished_points if not Y.member(p))
    return SemiAlgebraicSet(n, acc, X.declared_bound, pts)


def sa_product(X: SemiAlgebraicSet, Y: SemiAlgebraicSet,
               budget: int = DEFAULT_DISJUNCT_BUDGET) -> SemiAlgebraicSet:
    n, m = X.num_vars, Y.num_vars
    total = n + m
    left = [d.reindexed(range(n), total) for d in X.disjuncts]
    right = [d.reindexed(range(n, total), total) for d in Y.disjuncts]
    bound = None
    if X.declared_bound is not None and Y.declared_bound is not None:
        bound = Box(X.declared_bound.intervals + Y.declared_bound.intervals)
    pts = tuple(p + q for p in X.distinguished_points for q in Y.distinguished_points)
    return SemiAlgebraicSet(total, _conjoin_all(total, left, right, budget), bound, pts)


def reindex_set(X: SemiAlgebraicSet, mapping: Sequence[int], num_vars: int,
                bound: Box | None = None) -> SemiAlgebraicSet:
    """Embed ``X`` into ``R^num_vars`` sending coordinate ``i`` to ``mapping[i]``.

    Coordinates not hit by ``mapping`` are unconstrained (a cylinder).  This is
    the single place where coordinate bookkeeping for cylinders, products and
    permutations happens.
    """
    if len(mapping) != X.num_vars:
        raise DimensionError("mapping must cover every coordinate")
    if len(set(mapping)) != len(mapping) or not all(0 <= j < num_vars for j in mapping):
        raise ValueError(f"mapping {mapping} is not injective into {num_vars} coordinates")
    return SemiAlgebraicSet(num_vars, tuple(d.reindexed(mapping, num_vars) for d in X.disjuncts), bound)


def preimage_set(X: SemiAlgebraicSet, indices: Sequence[int], num_vars: int) -> SemiAlgebraicSet:
    """``{z in R^num_vars : (z[i] for i in indices) in X}`` with zero-based ``indices``.

    Repeated indices are allowed (the polynomial variables are merged).
    """
    if len(indices) != X.num_vars:
        raise DimensionError("one index per coordinate of X")
    images = [Polynomial.variable(num_vars, j) for j in indices]
    out = []
    for d in X.disjuncts:
        b = BasicSet.make(num_vars, [f.compose(images) for f in d.equations],
                          [g.compose(images) for g in d.strict_positives])
        if b is not None:
            out.append(b)
    return SemiAlgebraicSet(num_vars, tuple(out))


# -- witness shapes ----------------------------------------------------------

def _sphere_poly(tau: AffineMap) -> Polynomial:
    n = tau.dim
    total = Polynomial(n)
    for i, t in enumerate(tau.translation):
        d = Polynomial.variable(n, i) - t
        total = total + d * d
    return total - tau.scale ** 2


def shape_bound(tau: AffineMap) -> Box:
    """Open box declared around ``tau`` of the closed unit ball."""
    return Box.around(tau.translation, 2 * tau.scale)


def _check_dim(tau: AffineMap, n: int):
    if tau.dim != n:
        raise DimensionError(f"map of dimension {tau.dim}, expected {n}")


def sphere_of(tau: AffineMap, n: int) -> SemiAlgebraicSet:
    _check_dim(tau, n)
    return basic(n, [_sphere_poly(tau)]).with_bound(shape_bound(tau))


def ball_of(tau: AffineMap, n: int) -> SemiAlgebraicSet:
    _check_dim(tau, n)
    f = _sphere_poly(tau)
    return SemiAlgebraicSet(n, sphere_of(tau, n).disjuncts + basic(n, (), [-f]).disjuncts, shape_bound(tau))


def dotted_sphere_of(tau: AffineMap, n: int) -> SemiAlgebraicSet:
    _check_dim(tau, n)
    center = [Polynomial.variable(n, i) - t for i, t in enumerate(tau.translation)]
    return SemiAlgebraicSet(n, sphere_of(tau, n).disjuncts + basic(n, center).disjuncts,
                            shape_bound(tau), (tau.translation,))


def ball_inside_box(tau: AffineMap, box: Box) -> bool:
    """Exact check that the closed ball ``tau(■)`` lies in the open box."""
    return all(lo < t - tau.scale and t + tau.scale < hi
               for t, (lo, hi) in zip(tau.translation, box.intervals))
