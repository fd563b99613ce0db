"""Normal forms for the two query fragments.

Product-free expressions of the input's full arity reduce, on a small enough
box ``V``, to one of four shapes: ``Γ``, ``S``, ``S ∪ Γ`` or ``Γ − S`` (valid
for every input ``S ⊆ V``).  Positive expressions that use ``S`` once reduce
to ``π_I(Λ1 ∪ (Λ2 ∩ (S × R^k)))``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

from .findset import DEFAULT_SEARCH_BUDGET, BudgetExhausted, find_uniform_box
from .interval import DEFAULT_CERT_BUDGET, Status, certify_set_status
from .poly import Polynomial
from .rae import (
    RAE,
    Constant,
    Difference,
    InputS,
    Intersection,
    Product,
    Projection,
    Union,
    classify,
    eval_closed,
    walk,
)
from .sets import (
    BasicSet,
    Box,
    SemiAlgebraicSet,
    empty_set,
    full_space,
    preimage_set,
    reindex_set,
    sa_difference,
    sa_intersect,
    sa_product,
    sa_union,
)


class MalformedExpression(ValueError):
    pass


class NormalizationError(RuntimeError):
    """Certification failed while resolving a table cell; ``path`` locates the node."""

    def __init__(self, path: str, cause: Exception):
        super().__init__(f"at {path or 'root'}: {cause}")
        self.path = path
        self.cause = cause


# -- intersection elimination ----------------------------------------------------

def eliminate_intersection(e: RAE) -> RAE:
    """Rewrite every ``e1 ∩ e2`` as ``e1 − (e1 − e2)``."""
    if isinstance(e, (InputS, Constant)):
        return e
    if isinstance(e, Projection):
        return Projection(e.indices, eliminate_intersection(e.child))
    left, right = eliminate_intersection(e.left), eliminate_intersection(e.right)
    if isinstance(e, Intersection):
        return Difference(left, Difference(left, right))
    return type(e)(left, right)


# -- four-form normal forms --------------------------------------------------------

class Kind(enum.Enum):
    CONST = "Γ"
    INPUT = "S"
    INPUT_UNION_CONST = "S∪Γ"
    CONST_MINUS_INPUT = "Γ−S"


@dataclass(frozen=True)
class NormalForm:
    kind: Kind
    gamma: SemiAlgebraicSet | None = None
    label: str = ""

    def to_rae(self, n: int) -> RAE:
        s = InputS(n)
        if self.kind is Kind.INPUT:
            return s
        g = Constant(self.label, self.gamma)
        if self.kind is Kind.CONST:
            return g
        if self.kind is Kind.INPUT_UNION_CONST:
            return Union(s, g)
        return Difference(g, s)

    def evaluate(self, S: SemiAlgebraicSet) -> SemiAlgebraicSet:
        return eval_closed(self.to_rae(S.num_vars), S)

    def member(self, in_s: bool, point) -> bool:
        """Membership at ``point`` given whether ``point`` belongs to the input."""
        if self.kind is Kind.INPUT:
            return in_s
        in_g = self.gamma.member(point)
        if self.kind is Kind.CONST:
            return in_g
        if self.kind is Kind.INPUT_UNION_CONST:
            return in_s or in_g
        return in_g and not in_s

    def __str__(self):
        return {Kind.CONST: "{g}", Kind.INPUT: "S", Kind.INPUT_UNION_CONST: "S | {g}",
                Kind.CONST_MINUS_INPUT: "{g} \\ S"}[self.kind].format(g=self.label)


C, S_, SU, M = Kind.CONST, Kind.INPUT, Kind.INPUT_UNION_CONST, Kind.CONST_MINUS_INPUT


@dataclass(frozen=True)
class _Choice:
    """Cell whose result depends on whether ``V`` lies inside or outside ``governing``."""
    governing: str
    inside: tuple
    outside: tuple


# Γ specs: "g1", "g2", "g1|g2", "g1-g2", "empty", or None for the bare input form.
UNION_TABLE = {
    (S_, S_): (S_, None),
    (S_, C): (SU, "g2"),
    (S_, SU): (SU, "g2"),
    (S_, M): (C, "g2"),
    (C, S_): (SU, "g1"),
    (C, C): (C, "g1|g2"),
    (C, SU): (SU, "g1|g2"),
    (C, M): _Choice("g1", (C, "g1|g2"), (M, "g1|g2")),
    (SU, S_): (SU, "g1"),
    (SU, C): (SU, "g1|g2"),
    (SU, SU): (SU, "g1|g2"),
    (SU, M): (SU, "g1|g2"),
    (M, S_): (C, "g1"),
    (M, C): _Choice("g2", (C, "g1|g2"), (M, "g1|g2")),
    (M, SU): (SU, "g1|g2"),
    (M, M): (M, "g1|g2"),
}

_SHRINK = _Choice("g1-g2", (M, "g1-g2"), (C, "g1-g2"))

DIFFERENCE_TABLE = {
    (S_, S_): (C, "empty"),
    (S_, C): _Choice("g2", (C, "empty"), (S_, None)),
    (S_, SU): (C, "empty"),
    (S_, M): (S_, None),
    (C, S_): _Choice("g1", (M, "g1"), (C, "g1")),
    (C, C): (C, "g1-g2"),
    (C, SU): _SHRINK,
    (C, M): _Choice("g1", (SU, "g1-g2"), (C, "g1-g2")),
    (SU, S_): _Choice("g1", (M, "g1"), (C, "g1")),
    (SU, C): _Choice("g2", (C, "g1-g2"), (SU, "g1-g2")),
    (SU, SU): _SHRINK,
    (SU, M): (SU, "g1-g2"),
    (M, S_): (M, "g1"),
    (M, C): _SHRINK,
    (M, SU): _SHRINK,
    (M, M): _SHRINK,
}


@dataclass(frozen=True)
class CellUse:
    """One table lookup made during normalization (for coverage and reports)."""
    op: str
    left: Kind
    right: Kind
    branch: str  # "fixed", "inside" or "outside"


class _Gammas:
    """Lazily materialized constants of a cell: Γ1, Γ2 and their combinations."""

    def __init__(self, n, a: NormalForm, b: NormalForm):
        self.n, self.a, self.b = n, a, b
        self.cache = {}

    def get(self, spec: str) -> tuple[SemiAlgebraicSet, str]:
        if spec not in self.cache:
            a, b = self.a, self.b
            if spec == "g1":
                v = (a.gamma, a.label)
            elif spec == "g2":
                v = (b.gamma, b.label)
            elif spec == "g1|g2":
                v = (sa_union(a.gamma, b.gamma), f"({a.label} | {b.label})")
            elif spec == "g1-g2":
                v = (sa_difference(a.gamma, b.gamma), f"({a.label} \\ {b.label})")
            elif spec == "empty":
                v = (empty_set(self.n), "EMPTY")
            else:
                raise KeyError(spec)
            self.cache[spec] = v
        return self.cache[spec]


def _identity_projection(e: Projection) -> bool:
    return e.indices == tuple(range(1, e.child.arity + 1))


class _CpFreeNormalizer:
    def __init__(self, n, budget, cert_budget, trace):
        self.n, self.budget, self.cert_budget = n, budget, cert_budget
        self.trace = trace

    def run(self, e: RAE, V: Box, path: str):
        if isinstance(e, InputS):
            return NormalForm(Kind.INPUT), V
        if isinstance(e, Constant):
            return NormalForm(Kind.CONST, e.value, e.name), V
        if isinstance(e, Projection) and _identity_projection(e):
            return self.run(e.child, V, path + ".proj")
        if isinstance(e, (Projection, Product, Intersection)):
            raise MalformedExpression(
                f"{type(e).__name__} at {path or 'root'} in a product-free expression of arity {self.n}")
        a, V = self.run(e.left, V, path + ".l")
        b, V = self.run(e.right, V, path + ".r")
        op, table = ("union", UNION_TABLE) if isinstance(e, Union) else ("difference", DIFFERENCE_TABLE)
        cell = table[(a.kind, b.kind)]
        gammas = _Gammas(self.n, a, b)
        branch = "fixed"
        if isinstance(cell, _Choice):
            governing, _ = gammas.get(cell.governing)
            try:
                found = find_uniform_box([governing], V, self.budget, self.cert_budget)
            except BudgetExhausted as err:
                raise NormalizationError(path, err) from err
            V = found.V
            branch = "inside" if 1 in found.inside else "outside"
            cell = cell.inside if branch == "inside" else cell.outside
        if self.trace is not None:
            self.trace.append(CellUse(op, a.kind, b.kind, branch))
        kind, spec = cell
        if spec is None:
            return NormalForm(kind), V
        gamma, label = gammas.get(spec)
        return NormalForm(kind, gamma, label), V


def normalize_cpfree(e: RAE, U: Box, budget: int = DEFAULT_SEARCH_BUDGET,
                     cert_budget: int = DEFAULT_CERT_BUDGET,
                     trace: list | None = None) -> tuple[NormalForm, Box]:
    """Normal form of a product-free expression of the input's arity, with its box ``V ⊆ U``.

    ``trace``, when given, receives one :class:`CellUse` per table lookup.
    """
    if any(isinstance(x, Product) for x in walk(e)):
        raise MalformedExpression("expression uses a cartesian product")
    if e.arity != U.dim:
        raise MalformedExpression(f"expression of arity {e.arity} over a box of dimension {U.dim}")
    e = eliminate_intersection(e)
    nf, V = _CpFreeNormalizer(U.dim, budget, cert_budget, trace).run(e, U, "")
    if nf.kind is Kind.CONST_MINUS_INPUT:
        status = certify_set_status(nf.gamma, V, cert_budget)
        if status.status is not Status.FULLY_IN:
            raise NormalizationError("", RuntimeError("box is not certified inside Γ for a Γ−S form"))
    return nf, V


# -- components --------------------------------------------------------------

@dataclass(frozen=True)
class Component:
    indices: tuple[int, ...]
    expr: RAE
    path: str


@dataclass(frozen=True)
class ComponentDecomposition:
    """``outer`` is a ∪/− tree whose input-dependent leaves are ``proj[indices](component)``."""
    outer: RAE
    components: tuple[Component, ...]


def _has_input(e: RAE) -> bool:
    return any(isinstance(x, InputS) for x in walk(e))


def _simplify_projections(e: RAE) -> RAE:
    """Compose nested projections and drop identity ones."""
    if isinstance(e, (InputS, Constant)):
        return e
    if isinstance(e, Projection):
        child = _simplify_projections(e.child)
        indices = e.indices
        if isinstance(child, Projection):
            indices = tuple(child.indices[i - 1] for i in indices)
            child = child.child
        node = Projection(indices, child)
        return child if _identity_projection(node) else node
    return type(e)(_simplify_projections(e.left), _simplify_projections(e.right))


def extract_components(e: RAE) -> ComponentDecomposition:
    """Split a product-free, intersection-free expression into projected components."""
    for x in walk(e):
        if isinstance(x, Product):
            raise MalformedExpression("expression uses a cartesian product")
        if isinstance(x, Intersection):
            raise MalformedExpression("eliminate intersections before extracting components")
    n = next((x.arity for x in walk(e) if isinstance(x, InputS)), None)
    e = _simplify_projections(e)
    components: list[Component] = []

    def visit(node: RAE, path: str) -> RAE:
        if not _has_input(node):
            return node
        if isinstance(node, (Union, Difference)):
            return type(node)(visit(node.left, path + ".l"), visit(node.right, path + ".r"))
        if isinstance(node, Projection) and node.child.arity == n and \
                not any(isinstance(x, Projection) for x in walk(node.child)):
            components.append(Component(node.indices, node.child, path))
            return node
        raise MalformedExpression(
            f"{pretty_path(path)}: expected a projection of an arity-{n} projection-free operand")

    outer = visit(e, "")
    if n is not None and outer.arity >= n:
        raise MalformedExpression(f"expression of arity {outer.arity} is not below the input arity {n}")
    return ComponentDecomposition(outer, tuple(components))


def pretty_path(path: str) -> str:
    return "root" + path if path else "root"


# -- positive one-pass normal form ------------------------------------------------

class _Free:
    """Bound marker: the coordinate occurs in no atom of the set."""

    def __repr__(self):
        return "FREE"


FREE = _Free()


def _hull_b(a, b):
    if a is FREE:
        return b
    if b is FREE:
        return a
    if a is None or b is None:
        return None
    return (min(a[0], b[0]), max(a[1], b[1]))


def _meet_b(a, b):
    if a is FREE or a is None:
        return a if b is FREE else b
    if b is FREE or b is None:
        return a
    lo, hi = max(a[0], b[0]), min(a[1], b[1])
    return (lo, hi) if lo < hi else a


def _set_bounds(X: SemiAlgebraicSet) -> list:
    if X.declared_bound is not None:
        return list(X.declared_bound.intervals)
    used = {i for p in X.atoms for i in p.variables()}
    return [None if i in used else FREE for i in range(X.num_vars)]


@dataclass(frozen=True)
class _Rep:
    """``π_I(L1 ∪ (L2 ∩ (S × R^k)))`` over ambient ``R^(n+k)``; ``n = 0`` when S-free."""
    n: int
    k: int
    indices: tuple[int, ...]  # zero-based
    L1: SemiAlgebraicSet
    L2: SemiAlgebraicSet
    b1: tuple
    b2: tuple

    @property
    def total(self):
        return self.n + self.k

    @property
    def plain(self) -> bool:
        return self.indices == tuple(range(self.total))


def _lift(X: SemiAlgebraicSet, offset: int, total: int) -> SemiAlgebraicSet:
    return reindex_set(X, range(offset, offset + X.num_vars), total)


def _equalities(total: int, left: Sequence[int], right: Sequence[int]) -> SemiAlgebraicSet:
    eqs = [Polynomial.variable(total, i) - Polynomial.variable(total, j)
           for i, j in zip(left, right) if i != j]
    d = BasicSet.make(total, eqs, ())
    return SemiAlgebraicSet(total, (d,) if d is not None else ())


def _tie(bounds: list, left, right):
    for i, j in zip(left, right):
        m = _meet_b(bounds[i], bounds[j])
        bounds[i] = bounds[j] = m
    return bounds


def _s_leaf(n: int) -> _Rep:
    return _Rep(n, 0, tuple(range(n)), empty_set(n), full_space(n), (FREE,) * n, (FREE,) * n)


def _constant(X: SemiAlgebraicSet) -> _Rep:
    a = X.num_vars
    return _Rep(0, a, tuple(range(a)), X, empty_set(a), tuple(_set_bounds(X)), (FREE,) * a)


def _order(a: _Rep, b: _Rep):
    """The input-carrying operand first (or ``a``), and whether the order was swapped."""
    if b.n and not a.n:
        return b, a, True
    return a, b, False


def _product(a: _Rep, b: _Rep) -> _Rep:
    X, Y, swapped = _order(a, b)
    shift = X.total
    y_idx = tuple(j + shift for j in Y.indices)
    indices = y_idx + X.indices if swapped else X.indices + y_idx
    return _Rep(X.n, X.k + Y.total, indices,
                sa_product(X.L1, Y.L1), sa_product(X.L2, Y.L1),
                X.b1 + Y.b1, X.b2 + Y.b1)


def _hull_all(a, b):
    return tuple(_hull_b(x, y) for x, y in zip(a, b))


def _intersection(a: _Rep, b: _Rep) -> _Rep:
    X, Y, _ = _order(a, b)
    if Y.plain:
        P = preimage_set(Y.L1, X.indices, X.total)
        b1, b2 = list(X.b1), list(X.b2)
        for j, i in enumerate(X.indices):
            b1[i] = _meet_b(b1[i], Y.b1[j])
            b2[i] = _meet_b(b2[i], Y.b1[j])
        return _Rep(X.n, X.k, X.indices, sa_intersect(X.L1, P), sa_intersect(X.L2, P), tuple(b1), tuple(b2))
    total = X.total + Y.total
    y_idx = [j + X.total for j in Y.indices]
    E = _equalities(total, X.indices, y_idx)
    L1 = sa_intersect(sa_product(X.L1, Y.L1), E)
    L2 = sa_intersect(sa_product(X.L2, Y.L1), E)
    b1 = _tie(list(X.b1 + Y.b1), X.indices, y_idx)
    b2 = _tie(list(X.b2 + Y.b1), X.indices, y_idx)
    return _Rep(X.n, X.k + Y.total, X.indices, L1, L2, tuple(b1), tuple(b2))


def _union(a: _Rep, b: _Rep) -> _Rep:
    X, Y, _ = _order(a, b)
    if Y.plain and len(set(X.indices)) == len(X.indices):
        P = preimage_set(Y.L1, X.indices, X.total)
        pb = [FREE] * X.total
        for j, i in enumerate(X.indices):
            pb[i] = Y.b1[j]
        return _Rep(X.n, X.k, X.indices, sa_union(X.L1, P), X.L2, _hull_all(X.b1, pb), X.b2)
    # fresh output coordinates y between X's ambient and Y's
    p = len(X.indices)
    ys = list(range(X.total, X.total + p))
    off = X.total + p
    total = off + Y.total
    wy = [j + off for j in Y.indices]
    EX, EY = _equalities(total, ys, X.indices), _equalities(total, ys, wy)
    pad = (FREE,) * (p + Y.total)
    partA = sa_intersect(_lift(X.L1, 0, total), EX)
    partB = sa_intersect(_lift(Y.L1, off, total), EY)
    bA = _tie(list(X.b1 + pad), ys, X.indices)
    bB = _tie(list((FREE,) * off + Y.b1), ys, wy)
    L2 = sa_intersect(_lift(X.L2, 0, total), EX)
    b2 = _tie(list(X.b2 + pad), ys, X.indices)
    return _Rep(X.n, total - X.n, tuple(ys), sa_union(partA, partB), L2, _hull_all(bA, bB), tuple(b2))


@dataclass(frozen=True)
class OnePassNF:
    """``π_indices(Λ1 ∪ (Λ2 ∩ (S × R^k)))`` with 1-based ``indices`` and ``S ⊆ R^n``."""
    indices: tuple[int, ...]
    lambda1: SemiAlgebraicSet
    lambda2: SemiAlgebraicSet
    k: int
    n: int
    bounds1: tuple = field(default=(), compare=False, repr=False)
    bounds2: tuple = field(default=(), compare=False, repr=False)

    def body(self, S: SemiAlgebraicSet) -> SemiAlgebraicSet:
        """The projected operand ``Λ1 ∪ (Λ2 ∩ (S × R^k))`` at input ``S``."""
        cyl = sa_product(S, full_space(self.k)) if self.k else S
        return sa_union(self.lambda1, sa_intersect(self.lambda2, cyl))

    def to_rae(self) -> RAE:
        s: RAE = InputS(self.n)
        if self.k:
            s = Product(s, Constant(f"R{self.k}", full_space(self.k)))
        inner = Union(Constant("L1", self.lambda1), Intersection(Constant("L2", self.lambda2), s))
        return Projection(self.indices, inner)

    def body_bounds(self, S: SemiAlgebraicSet) -> list:
        """Per-coordinate bounds of :meth:`body`; ``FREE`` marks unconstrained coordinates."""
        sb = list(S.declared_bound.intervals) if S.declared_bound is not None else [None] * self.n
        sb += [FREE] * self.k
        return [_hull_b(a, _meet_b(b, s)) for a, b, s in zip(self.bounds1, self.bounds2, sb)]

    def __str__(self):
        return (f"proj[{','.join(map(str, self.indices))}](L1 | (L2 & (S x R^{self.k})))"
                f" with L1 = {self.lambda1}, L2 = {self.lambda2}")


def normalize_onepass(e: RAE) -> OnePassNF:
    """Rewrite a positive expression with one occurrence of ``S`` into one projection."""
    if not classify(e).positive_one_pass:
        raise MalformedExpression("expression is not positive one-pass (no difference, exactly one S)")

    def go(node: RAE) -> _Rep:
        if isinstance(node, InputS):
            return _s_leaf(node.arity)
        if isinstance(node, Constant):
            return _constant(node.value)
        if isinstance(node, Projection):
            r = go(node.child)
            return _Rep(r.n, r.k, tuple(r.indices[i - 1] for i in node.indices), r.L1, r.L2, r.b1, r.b2)
        a, b = go(node.left), go(node.right)
        if isinstance(node, Product):
            return _product(a, b)
        if isinstance(node, Intersection):
            return _intersection(a, b)
        return _union(a, b)

    r = go(e)
    return OnePassNF(tuple(i + 1 for i in r.indices), r.L1, r.L2, r.k, r.n, r.b1, r.b2)
