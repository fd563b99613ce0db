"""Three-valued membership oracles for expressions that contain projections.

The projected set is never computed as a formula.  Instead, for a query point
the projected-away coordinates are searched inside the operand's declared
bound: ``In`` is reported only with an exact witness for them, ``Out`` only
when interval certificates show the fiber empty, ``Unknown`` otherwise.
Parts whose projections only permute coordinates are evaluated exactly, pointwise.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

from .fiber import DEFAULT_FIBER_BUDGET, TreeFiber, Verdict, decide_fiber, set_formula
from .interval import _count_box, certify_out
from .poly import DimensionError, as_fraction
from .rae import (
    RAE,
    Constant,
    Difference,
    InputS,
    Intersection,
    Product,
    Projection,
    Union,
    eval_closed,
    is_closed_form,
    is_relabeling,
)
from .sampling import unit_samples, to_box
from .sets import BasicSet, Box, SemiAlgebraicSet, reindex_set

IN, OUT, UNKNOWN = Verdict.IN, Verdict.OUT, Verdict.UNKNOWN

Bound = tuple[Fraction, Fraction] | None
Point = tuple[Fraction, ...]


class MissingBound(ValueError):
    """A projected-away coordinate has no declared bound and no search bound was given."""


# -- bounds --------------------------------------------------------------------

def _box_bounds(box: Box | None, n: int) -> list[Bound]:
    return list(box.intervals) if box is not None else [None] * n


def infer_bounds(e: RAE, S: SemiAlgebraicSet) -> list[Bound]:
    """Per-coordinate outer bounds of ``e(S)``, ``None`` where nothing is known."""
    if isinstance(e, InputS):
        return _box_bounds(S.declared_bound, e.arity)
    if isinstance(e, Constant):
        return _box_bounds(e.value.declared_bound, e.arity)
    if isinstance(e, Projection):
        inner = infer_bounds(e.child, S)
        return [inner[i - 1] for i in e.indices]
    left, right = infer_bounds(e.left, S), infer_bounds(e.right, S)
    if isinstance(e, Product):
        return left + right
    if isinstance(e, Difference):
        return left
    if isinstance(e, Union):
        return [None if a is None or b is None else (min(a[0], b[0]), max(a[1], b[1]))
                for a, b in zip(left, right)]
    out = []
    for a, b in zip(left, right):
        if a is None or b is None:
            out.append(a or b)
        else:
            lo, hi = max(a[0], b[0]), min(a[1], b[1])
            out.append((lo, hi) if lo < hi else a)
    return out


# -- regions: products of closed intervals, possibly degenerate -----------------

Region = Sequence[tuple[Fraction, Fraction]]


def _closed_out_on(X: SemiAlgebraicSet, region: Region, budget: int) -> bool:
    """Certify that ``X`` has no point in the closed region."""
    fixed = {i: lo for i, (lo, hi) in enumerate(region) if lo == hi}
    if len(fixed) == len(region):
        return not X.member(tuple(lo for lo, _ in region))
    if not fixed:
        return certify_out(X, Box(region), budget)
    free = Box([iv for iv in region if iv[0] != iv[1]])
    m = free.dim
    disjuncts = []
    for d in X.disjuncts:
        r = BasicSet.make(m, [f.substitute(fixed) for f in d.equations],
                          [g.substitute(fixed) for g in d.strict_positives])
        if r is not None:
            disjuncts.append(r)
    return certify_out(SemiAlgebraicSet(m, tuple(disjuncts)), free, budget)


# -- nodes ----------------------------------------------------------------------

class _Node:
    arity: int
    hints: tuple[Point, ...] = ()

    def query(self, point: Point) -> Verdict:
        raise NotImplementedError

    def out_on(self, region: Region) -> bool:
        raise NotImplementedError


class _Leaf(_Node):
    def __init__(self, X: SemiAlgebraicSet, budget: int):
        self.X = X
        self.arity = X.num_vars
        self.hints = X.distinguished_points
        self.budget = budget

    def query(self, point):
        return IN if self.X.member(point) else OUT

    def out_on(self, region):
        return _closed_out_on(self.X, region, self.budget)


class _UnionNode(_Node):
    def __init__(self, left: _Node, right: _Node):
        self.left, self.right, self.arity = left, right, left.arity
        self.hints = left.hints + right.hints

    def query(self, point):
        a = self.left.query(point)
        if a is IN:
            return IN
        b = self.right.query(point)
        if b is IN:
            return IN
        return OUT if a is OUT and b is OUT else UNKNOWN

    def out_on(self, region):
        return self.left.out_on(region) and self.right.out_on(region)


class _IntersectionNode(_Node):
    def __init__(self, left: _Node, right: _Node):
        self.left, self.right, self.arity = left, right, left.arity
        self.hints = left.hints + right.hints

    def query(self, point):
        a = self.left.query(point)
        if a is OUT:
            return OUT
        b = self.right.query(point)
        if b is OUT:
            return OUT
        return IN if a is IN and b is IN else UNKNOWN

    def out_on(self, region):
        return self.left.out_on(region) or self.right.out_on(region)


class _DifferenceNode(_Node):
    def __init__(self, left: _Node, right: _Node):
        self.left, self.right, self.arity = left, right, left.arity
        self.hints = left.hints + right.hints

    def query(self, point):
        a = self.left.query(point)
        if a is OUT:
            return OUT
        b = self.right.query(point)
        if b is IN:
            return OUT
        return IN if a is IN and b is OUT else UNKNOWN

    def out_on(self, region):
        return self.left.out_on(region)


class _ProductNode(_Node):
    def __init__(self, left: _Node, right: _Node):
        self.left, self.right = left, right
        self.arity = left.arity + right.arity
        self.hints = tuple(a + b for a in left.hints[:4] for b in right.hints[:4])

    def query(self, point):
        k = self.left.arity
        a = self.left.query(point[:k])
        if a is OUT:
            return OUT
        b = self.right.query(point[k:])
        if b is OUT:
            return OUT
        return IN if a is IN and b is IN else UNKNOWN

    def out_on(self, region):
        k = self.left.arity
        return self.left.out_on(region[:k]) or self.right.out_on(region[k:])


class _ProjectionBase(_Node):
    """Shared bookkeeping: which child coordinates are fixed by the query, and their search box."""

    def __init__(self, indices, child_arity, child_bounds, search_bound, child_hints):
        self.indices = tuple(i - 1 for i in indices)
        self.arity = len(self.indices)
        self.child_arity = child_arity
        self.free = tuple(i for i in range(child_arity) if i not in self.indices)
        self.bounds = list(child_bounds)
        for i in self.free:
            if self.bounds[i] is None:
                if search_bound is None:
                    raise MissingBound(
                        f"coordinate {i + 1} of a projected operand has no declared bound")
                self.bounds[i] = search_bound.intervals[0]
        self.free_box = Box([self.bounds[i] for i in self.free]) if self.free else None
        self.hints = tuple(tuple(h[i] for i in self.indices) for h in child_hints)

    def fix(self, point) -> dict[int, Fraction] | None:
        """Child coordinates pinned by ``point``; ``None`` if the fiber is trivially empty."""
        fixed: dict[int, Fraction] = {}
        for i, v in zip(self.indices, point):
            if fixed.setdefault(i, v) != v:
                return None
            b = self.bounds[i]
            if b is not None and not b[0] < v < b[1]:
                return None
        return fixed

    def child_region(self, region):
        """Child region for a region of this node's output space, or ``None`` if empty."""
        ivs: list = [None] * self.child_arity
        for i, (lo, hi) in zip(self.indices, region):
            if ivs[i] is not None:
                lo, hi = max(lo, ivs[i][0]), min(hi, ivs[i][1])
                if lo > hi:
                    return None
            ivs[i] = (lo, hi)
        for i in range(self.child_arity):
            if ivs[i] is None:
                b = self.bounds[i]
                if b is None:
                    return "unbounded"
                ivs[i] = b
        return ivs


def _tree_formula(e: RAE, S: SemiAlgebraicSet, pos: tuple[int, ...], total: int, atoms: list, seen: dict):
    """Boolean formula of a closed-form tree whose coordinate ``k`` sits at ``pos[k]`` in ``R^total``."""
    if isinstance(e, (InputS, Constant)):
        X = S if isinstance(e, InputS) else e.value
        if pos != tuple(range(total)):
            X = reindex_set(X, pos, total)
        return set_formula(X, atoms, seen)
    if is_relabeling(e):
        inner = [0] * e.arity
        for j, i in enumerate(e.indices):
            inner[i - 1] = pos[j]
        return _tree_formula(e.child, S, tuple(inner), total, atoms, seen)
    if isinstance(e, Product):
        a = e.left.arity
        return ("and", (_tree_formula(e.left, S, pos[:a], total, atoms, seen),
                        _tree_formula(e.right, S, pos[a:], total, atoms, seen)))
    left = _tree_formula(e.left, S, pos, total, atoms, seen)
    right = _tree_formula(e.right, S, pos, total, atoms, seen)
    if isinstance(e, Union):
        return ("or", (left, right))
    if isinstance(e, Intersection):
        return ("and", (left, right))
    if isinstance(e, Difference):
        return ("and", (left, ("not", right)))
    raise TypeError(f"hiding projection inside a closed-form tree: {e}")


class _FiberNode(_ProjectionBase):
    """Projection of a closed-form operand, decided fiber by fiber."""

    def __init__(self, indices, child: RAE, S, child_bounds, search_bound, budget, hints):
        self.child_expr, self.S, self.budget = child, S, budget
        super().__init__(indices, child.arity, child_bounds, search_bound, hints)

    @cached_property
    def closed(self) -> SemiAlgebraicSet:
        return eval_closed(self.child_expr, self.S)

    @cached_property
    def one_free(self) -> TreeFiber | None:
        if self.free_box is None or self.free_box.dim != 1:
            return None
        atoms: list = []
        formula = _tree_formula(self.child_expr, self.S, tuple(range(self.child_arity)), self.child_arity,
                                atoms, {})
        fixed = [i for i in range(self.child_arity) if i not in self.free]
        return TreeFiber(formula, atoms, fixed, self.free[0], self.free_box.intervals[0])

    def query(self, point):
        fixed = self.fix(point)
        if fixed is None:
            return OUT
        if self.one_free is not None:
            v = self.one_free([fixed[i] for i in sorted(fixed)])
            if v is not None:
                return v
        return decide_fiber(self.closed, fixed, self.free_box, self.budget)

    def out_on(self, region):
        r = self.child_region(region)
        if r is None:
            return True
        if r == "unbounded":
            return False
        return _closed_out_on(self.closed, r, self.budget)


class _GenericProjection(_ProjectionBase):
    """Projection of an operand that itself contains projections.

    ``In`` is found by sampling the free coordinates and asking the operand's
    oracle; ``Out`` by branch and bound over the free box with the operand's
    region certificates.
    """

    SAMPLES = 32

    def __init__(self, indices, child: _Node, child_bounds, search_bound, budget, seed=0):
        super().__init__(indices, child.arity, child_bounds, search_bound, child.hints)
        self.child, self.budget = child, budget
        self.child_hints = child.hints
        if self.free_box is not None:
            self.samples = to_box(unit_samples(self.SAMPLES, self.free_box.dim, seed), self.free_box)
        else:
            self.samples = []

    def _assemble(self, fixed, free_values):
        full = [None] * self.child_arity
        for i, v in fixed.items():
            full[i] = v
        for i, v in zip(self.free, free_values):
            full[i] = v
        return tuple(full)

    def query(self, point):
        fixed = self.fix(point)
        if fixed is None:
            return OUT
        if self.free_box is None:
            return self.child.query(self._assemble(fixed, ()))
        candidates = [tuple(h[i] for i in self.free) for h in self.child_hints
                      if all(h[i] == v for i, v in fixed.items())]
        for free_values in candidates + self.samples:
            if self.free_box.contains(free_values) and \
                    self.child.query(self._assemble(fixed, free_values)) is IN:
                return IN
        queue = deque([self.free_box])
        examined = 0
        try:
            while queue:
                box = queue.popleft()
                examined += 1
                region = [None] * self.child_arity
                for i, v in fixed.items():
                    region[i] = (v, v)
                for i, iv in zip(self.free, box.intervals):
                    region[i] = iv
                if self.child.out_on(region):
                    continue
                if examined + len(queue) >= self.budget:
                    return UNKNOWN
                if self.child.query(self._assemble(fixed, box.center())) is IN:
                    return IN
                queue.extend(box.bisect())
        finally:
            _count_box(examined)
        return OUT

    def out_on(self, region):
        r = self.child_region(region)
        if r is None:
            return True
        if r == "unbounded":
            return False
        return self.child.out_on(r)


# -- compilation ---------------------------------------------------------------

def _compose(outer: Sequence[int], inner: Sequence[int]) -> tuple[int, ...]:
    """Indices of ``proj[outer](proj[inner](x))`` as a single projection of ``x``."""
    return tuple(inner[i - 1] for i in outer)


class _Compiler:
    def __init__(self, S, search_bound, budget, seed):
        self.S, self.search_bound, self.budget, self.seed = S, search_bound, budget, seed

    def leaf(self, X):
        return _Leaf(X, self.budget)

    def compile(self, e: RAE) -> _Node:
        if isinstance(e, InputS):
            if self.S.num_vars != e.arity:
                raise DimensionError(f"input of arity {self.S.num_vars} for S of arity {e.arity}")
            return self.leaf(self.S)
        if isinstance(e, Constant):
            return self.leaf(e.value)
        if isinstance(e, Projection):
            return self.projection(e.indices, e.child)
        left, right = self.compile(e.left), self.compile(e.right)
        cls = {Union: _UnionNode, Intersection: _IntersectionNode,
               Difference: _DifferenceNode, Product: _ProductNode}[type(e)]
        return cls(left, right)

    def projection(self, indices, child: RAE) -> _Node:
        while isinstance(child, Projection):
            indices, child = _compose(indices, child.indices), child.child
        if isinstance(child, Union):
            return _UnionNode(self.projection(indices, child.left), self.projection(indices, child.right))
        bounds = infer_bounds(child, self.S)
        if is_closed_form(child):
            return _FiberNode(indices, child, self.S, bounds, self.search_bound, self.budget,
                              self.compile(child).hints)
        return _GenericProjection(indices, self.compile(child), bounds, self.search_bound,
                                  self.budget, self.seed)


@dataclass
class MembershipOracle:
    """Three-valued membership for ``expr`` evaluated at input ``S``."""

    arity: int
    query: Callable[[Point], Verdict]
    note: str
    hints: tuple[Point, ...]
    expr: RAE
    S: SemiAlgebraicSet

    def __call__(self, point) -> Verdict:
        point = tuple(as_fraction(c) for c in point)
        if len(point) != self.arity:
            raise DimensionError(f"point of length {len(point)} for an oracle of arity {self.arity}")
        return self.query(point)

    @cached_property
    def closed(self) -> SemiAlgebraicSet | None:
        """Exact value when the expression has no projection, else ``None``."""
        return eval_closed(self.expr, self.S) if is_closed_form(self.expr) else None


def eval_oracle(e: RAE, S: SemiAlgebraicSet, search_bound: Box | None = None,
                budget: int = DEFAULT_FIBER_BUDGET, seed: int = 0) -> MembershipOracle:
    """Membership oracle for ``e(S)``.

    ``search_bound`` (a box whose first interval is used for every coordinate)
    stands in for coordinates that carry no declared bound.
    """
    node = _Compiler(S, search_bound, budget, seed).compile(e)
    kind = "exact" if is_closed_form(e) else "fiber search"
    return MembershipOracle(e.arity, node.query, f"{kind}: {e}", tuple(dict.fromkeys(node.hints)), e, S)
