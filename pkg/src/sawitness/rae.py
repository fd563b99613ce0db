"""Relational algebra expressions over an input set ``S`` and constant sets.

Expressions are immutable trees.  Projection indices are 1-based, as in the
concrete syntax::

    expr    := term (('|' | '\\') term)*
    term    := factor ('&' factor)*
    factor  := atom ('x' atom)*
    atom    := 'S' | NAME | 'proj' '[' INT (',' INT)* ']' '(' expr ')' | '(' expr ')'

``|`` is union, ``\\`` difference, ``&`` intersection and ``x`` cartesian
product.  ``NAME`` refers to a constant set supplied by the environment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Mapping

from .sets import (
    Box,
    SemiAlgebraicSet,
    reindex_set,
    sa_difference,
    sa_intersect,
    sa_product,
    sa_union,
)


class ArityError(ValueError):
    pass


class RAESyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownConstant(KeyError):
    pass


# -- tree --------------------------------------------------------------------

class RAE:
    """Base class of expression nodes."""

    arity: int

    def children(self) -> tuple[RAE, ...]:
        return ()

    def __str__(self):
        return pretty(self)


@dataclass(frozen=True)
class InputS(RAE):
    arity: int


@dataclass(frozen=True)
class Constant(RAE):
    name: str
    value: SemiAlgebraicSet = field(compare=False)

    @property
    def arity(self) -> int:
        return self.value.num_vars

    def __eq__(self, other):
        return isinstance(other, Constant) and self.name == other.name and self.value == other.value

    def __hash__(self):
        return hash(("Constant", self.name))


@dataclass(frozen=True)
class _Binary(RAE):
    left: RAE
    right: RAE

    def __post_init__(self):
        if self.left.arity != self.right.arity:
            raise ArityError(
                f"{type(self).__name__} of arity {self.left.arity} and {self.right.arity} operands")

    @property
    def arity(self) -> int:
        return self.left.arity

    def children(self):
        return (self.left, self.right)


class Union(_Binary):
    pass


class Intersection(_Binary):
    pass


class Difference(_Binary):
    pass


@dataclass(frozen=True)
class Product(RAE):
    left: RAE
    right: RAE

    @property
    def arity(self) -> int:
        return self.left.arity + self.right.arity

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Projection(RAE):
    indices: tuple[int, ...]
    child: RAE

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(self.indices))
        if not self.indices:
            raise ArityError("projection onto an empty index list")
        bad = [i for i in self.indices if not 1 <= i <= self.child.arity]
        if bad:
            raise ArityError(
                f"projection index {bad[0]} out of range for an operand of arity {self.child.arity}")

    @property
    def arity(self) -> int:
        return len(self.indices)

    def children(self):
        return (self.child,)


_SYMBOLS = {Union: "|", Difference: "\\", Intersection: "&", Product: "x"}


def pretty(e: RAE) -> str:
    """Fully parenthesized concrete syntax; ``parse_rae(pretty(e))`` rebuilds ``e``."""
    if isinstance(e, InputS):
        return "S"
    if isinstance(e, Constant):
        return e.name
    if isinstance(e, Projection):
        return f"proj[{','.join(map(str, e.indices))}]({pretty(e.child)})"
    return f"({pretty(e.left)} {_SYMBOLS[type(e)]} {pretty(e.right)})"


def walk(e: RAE):
    yield e
    for c in e.children():
        yield from walk(c)


def substitute_input(e: RAE, replacement: RAE) -> RAE:
    """Replace every ``S`` leaf by ``replacement``."""
    if isinstance(e, InputS):
        return replacement
    if isinstance(e, Constant):
        return e
    if isinstance(e, Projection):
        return Projection(e.indices, substitute_input(e.child, replacement))
    return type(e)(substitute_input(e.left, replacement), substitute_input(e.right, replacement))


def input_arity(e: RAE) -> int | None:
    for node in walk(e):
        if isinstance(node, InputS):
            return node.arity
    return None


# -- parser ------------------------------------------------------------------

_TOKENS = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>[|&\\()\[\],]))")


def _tokenize(text: str):
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKENS.match(text, pos)
        if m is None or m.lastgroup is None:
            if text[pos:].strip() == "":
                break
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise RAESyntaxError(f"unexpected character {text[bad]!r}", bad)
        start = m.start(m.lastgroup)
        out.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, env, n):
        self.tokens = _tokenize(text)
        self.i = 0
        self.env = env
        self.n = n

    def peek(self):
        return self.tokens[self.i]

    def take(self, value=None):
        kind, val, pos = self.tokens[self.i]
        if value is not None and val != value:
            shown = val or "end of input"
            raise RAESyntaxError(f"expected {value!r}, found {shown!r}", pos)
        self.i += 1
        return kind, val, pos

    def build(self, cls, left, right, pos):
        try:
            return cls(left, right)
        except ArityError as err:
            raise ArityError(f"{err} (operator {_SYMBOLS[cls]!r} at position {pos})") from None

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("|", "\\"):
            _, op, pos = self.take()
            node = self.build(Union if op == "|" else Difference, node, self.term(), pos)
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] == "&":
            _, _, pos = self.take()
            node = self.build(Intersection, node, self.factor(), pos)
        return node

    def factor(self):
        node = self.atom()
        while self.peek()[0] == "name" and self.peek()[1] == "x":
            _, _, pos = self.take()
            node = self.build(Product, node, self.atom(), pos)
        return node

    def atom(self):
        kind, val, pos = self.peek()
        if val == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        if kind == "name" and val == "S":
            self.take()
            return InputS(self.n)
        if kind == "name" and val == "proj":
            self.take()
            self.take("[")
            indices = [self.index()]
            while self.peek()[1] == ",":
                self.take()
                indices.append(self.index())
            self.take("]")
            self.take("(")
            child = self.expr()
            self.take(")")
            try:
                return Projection(tuple(indices), child)
            except ArityError as err:
                raise ArityError(f"{err} (proj at position {pos})") from None
        if kind == "name" and val != "x":
            self.take()
            if val not in self.env:
                raise UnknownConstant(f"unknown constant {val!r} at position {pos}")
            return Constant(val, self.env[val])
        raise RAESyntaxError(f"unexpected {val or 'end of input'!r}", pos)

    def index(self):
        kind, val, pos = self.take()
        if kind != "num":
            raise RAESyntaxError(f"expected a projection index, found {val!r}", pos)
        return int(val)


def parse_rae(text: str, environment: Mapping[str, SemiAlgebraicSet], n: int) -> RAE:
    """Parse concrete syntax; ``S`` has arity ``n``."""
    p = _Parser(text, environment, n)
    node = p.expr()
    kind, val, pos = p.peek()
    if kind != "end":
        raise RAESyntaxError(f"unexpected {val!r}", pos)
    return node


# -- classification ----------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    cartesian_product_free: bool
    positive_one_pass: bool
    s_occurrences: int


def classify(e: RAE) -> Classification:
    nodes = list(walk(e))
    s_count = sum(isinstance(x, InputS) for x in nodes)
    has_product = any(isinstance(x, Product) for x in nodes)
    has_difference = any(isinstance(x, Difference) for x in nodes)
    return Classification(not has_product, not has_difference and s_count == 1, s_count)


def is_projection_free(e: RAE) -> bool:
    return not any(isinstance(x, Projection) for x in walk(e))


def is_relabeling(e: RAE) -> bool:
    """A projection that permutes its operand's coordinates, hiding none."""
    return isinstance(e, Projection) and sorted(e.indices) == list(range(1, e.child.arity + 1))


def is_closed_form(e: RAE) -> bool:
    """No projection in ``e`` hides a coordinate, so ``eval_closed`` applies."""
    return all(is_relabeling(x) for x in walk(e) if isinstance(x, Projection))


def relabeled_set(X: SemiAlgebraicSet, indices) -> SemiAlgebraicSet:
    """``{(x[i1], ..., x[in]) : x in X}`` for a permutation ``indices`` (1-based)."""
    mapping = [indices.index(i + 1) for i in range(X.num_vars)]
    bound = X.declared_bound
    if bound is not None:
        bound = Box([bound.intervals[i - 1] for i in indices])
    points = tuple(tuple(p[i - 1] for i in indices) for p in X.distinguished_points)
    return replace(reindex_set(X, mapping, X.num_vars), declared_bound=bound, distinguished_points=points)


# -- closed-form evaluation --------------------------------------------------

_SET_OPS = {Union: sa_union, Intersection: sa_intersect, Difference: sa_difference, Product: sa_product}


def eval_closed(e: RAE, S: SemiAlgebraicSet) -> SemiAlgebraicSet:
    """Exact value at input ``S`` of an expression whose projections only permute coordinates."""
    if isinstance(e, InputS):
        if S.num_vars != e.arity:
            raise ArityError(f"input of arity {S.num_vars} for S of arity {e.arity}")
        return S
    if isinstance(e, Constant):
        return e.value
    if isinstance(e, Projection):
        if not is_relabeling(e):
            raise ValueError("eval_closed does not evaluate projections; use eval_oracle")
        return relabeled_set(eval_closed(e.child, S), e.indices)
    return _SET_OPS[type(e)](eval_closed(e.left, S), eval_closed(e.right, S))
