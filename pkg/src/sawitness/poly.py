"""Sparse multivariate polynomials with exact rational coefficients.

A polynomial in ``n`` variables is a map from exponent vectors (tuples of
length ``n``) to nonzero :class:`~fractions.Fraction` coefficients.  Variables
are zero-indexed internally and printed as ``x1 .. xn``.

Hot paths (sign evaluation, substitution) go through an integer form: the
coefficients are scaled by the lcm of their denominators and points are put
over a common denominator, so evaluation is pure ``int`` arithmetic.
"""
from __future__ import annotations

import re
from fractions import Fraction
from math import comb, gcd, lcm
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

Exponent = tuple[int, ...]
Point = Sequence[Fraction]


class DimensionError(ValueError):
    """Raised when objects of different ambient dimension are combined."""


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted; use Fraction or int")
    return Fraction(value)


def int_point(point: Point) -> tuple[tuple[int, ...], int]:
    """Put a rational point over a common positive denominator."""
    den = 1
    for c in point:
        den = lcm(den, c.denominator)
    return tuple(c.numerator * (den // c.denominator) for c in point), den


class Polynomial:
    __slots__ = ("num_vars", "_terms", "_hash", "_int_form", "_degree")

    def __init__(self, num_vars: int, terms: Mapping[Exponent, object] | None = None):
        self.num_vars = num_vars
        clean: dict[Exponent, Fraction] = {}
        for exps, coef in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != num_vars:
                raise DimensionError(f"exponent {exps} does not have length {num_vars}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            c = as_fraction(coef)
            if c:
                clean[exps] = clean.get(exps, 0) + c
                if not clean[exps]:
                    del clean[exps]
        self._terms = clean
        self._hash = None
        self._int_form = None
        self._degree = max((sum(e) for e in clean), default=0)

    # -- constructors -------------------------------------------------
    @classmethod
    def constant(cls, num_vars: int, value) -> Polynomial:
        return cls(num_vars, {(0,) * num_vars: value})

    @classmethod
    def variable(cls, num_vars: int, index: int) -> Polynomial:
        if not 0 <= index < num_vars:
            raise DimensionError(f"variable index {index} out of range for {num_vars} variables")
        exps = [0] * num_vars
        exps[index] = 1
        return cls(num_vars, {tuple(exps): 1})

    @classmethod
    def _raw(cls, num_vars: int, terms: dict[Exponent, Fraction]) -> Polynomial:
        # trusted constructor: terms already clean
        p = cls.__new__(cls)
        p.num_vars = num_vars
        p._terms = terms
        p._hash = None
        p._int_form = None
        p._degree = max((sum(e) for e in terms), default=0)
        return p

    # -- inspection ---------------------------------------------------
    @property
    def terms(self) -> Mapping[Exponent, Fraction]:
        return MappingProxyType(self._terms)

    @property
    def degree(self) -> int:
        return self._degree

    def degree_in(self, index: int) -> int:
        return max((e[index] for e in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def constant_value(self) -> Fraction:
        return self._terms.get((0,) * self.num_vars, Fraction(0))

    def variables(self) -> tuple[int, ...]:
        """Indices of the variables that actually occur."""
        used = set()
        for exps in self._terms:
            used.update(i for i, e in enumerate(exps) if e)
        return tuple(sorted(used))

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.num_vars == other.num_vars and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num_vars, frozenset(self._terms.items())))
        return self._hash

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other) -> Polynomial:
        if isinstance(other, Polynomial):
            if other.num_vars != self.num_vars:
                raise DimensionError(f"{self.num_vars} vs {other.num_vars} variables")
            return other
        return Polynomial.constant(self.num_vars, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for exps, c in other._terms.items():
            v = out.get(exps, 0) + c
            if v:
                out[exps] = v
            else:
                out.pop(exps, None)
        return Polynomial._raw(self.num_vars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.num_vars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = as_fraction(other)
            if not c:
                return Polynomial(self.num_vars)
            return Polynomial._raw(self.num_vars, {e: v * c for e, v in self._terms.items()})
        other = self._coerce(other)
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e, 0) + c1 * c2
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        return Polynomial._raw(self.num_vars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = Polynomial.constant(self.num_vars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def derivative(self, index: int) -> Polynomial:
        out = {}
        for exps, c in self._terms.items():
            e = exps[index]
            if e:
                new = list(exps)
                new[index] = e - 1
                out[tuple(new)] = c * e
        return Polynomial._raw(self.num_vars, out)

    # -- integer form -------------------------------------------------
    def int_form(self):
        """``(den, terms)`` with ``self = (1/den) * sum(c * x^e)`` and integer ``c``.

        Each entry of ``terms`` is ``(c, ((i, e), ...), total_degree)`` listing
        only the nonzero exponents.
        """
        if self._int_form is None:
            den = 1
            for c in self._terms.values():
                den = lcm(den, c.denominator)
            terms = tuple(
                (int(c * den), tuple((i, e) for i, e in enumerate(exps) if e), sum(exps))
                for exps, c in self._terms.items()
            )
            self._int_form = (den, terms)
        return self._int_form

    def scaled_value(self, nums: Sequence[int], den: int) -> int:
        """Positive multiple of ``self`` at the point ``nums / den``.

        The multiplier is ``den ** degree`` times the coefficient denominator,
        so the sign is exact.
        """
        deg = self._degree
        total = 0
        for c, exps, tdeg in self.int_form()[1]:
            v = c
            for i, e in exps:
                v *= nums[i] ** e
            if tdeg != deg:
                v *= den ** (deg - tdeg)
            total += v
        return total

    def sign_at(self, point: Point) -> int:
        if len(point) != self.num_vars:
            raise DimensionError(f"point of length {len(point)} for {self.num_vars} variables")
        v = self.scaled_value(*int_point(point))
        return (v > 0) - (v < 0)

    def eval(self, point: Point) -> Fraction:
        if len(point) != self.num_vars:
            raise DimensionError(f"point of length {len(point)} for {self.num_vars} variables")
        nums, den = int_point(point)
        cden = self.int_form()[0]
        return Fraction(self.scaled_value(nums, den), cden * den ** self._degree)

    __call__ = eval

    def primitive(self) -> Polynomial:
        """Positive rescaling with coprime integer coefficients."""
        if not self._terms:
            return self
        _, terms = self.int_form()
        g = 0
        for c, _, _ in terms:
            g = gcd(g, c)
        if g == 1 and all(c.denominator == 1 for c in self._terms.values()):
            return self
        return Polynomial._raw(self.num_vars, {e: Fraction(int(c * self.int_form()[0]) // g)
                                               for e, c in self._terms.items()})

    def leading_exponent(self) -> Exponent:
        return max(self._terms, key=_grlex_key)

    # -- substitution and reindexing ----------------------------------
    def substitute(self, values: Mapping[int, Fraction]) -> Polynomial:
        """Fix the variables in ``values``; the others keep their relative order."""
        if not values:
            return self
        keep = [i for i in range(self.num_vars) if i not in values]
        fixed = sorted(values)
        nums, den = int_point([as_fraction(values[i]) for i in fixed])
        num_of = dict(zip(fixed, nums))
        cden, terms = self.int_form()
        top = 0
        for _, exps, _ in terms:
            top = max(top, sum(e for i, e in exps if i in num_of))
        out: dict[Exponent, int] = {}
        position = {v: k for k, v in enumerate(keep)}
        for c, exps, _ in terms:
            v = c
            fdeg = 0
            rest = [0] * len(keep)
            for i, e in exps:
                if i in num_of:
                    v *= num_of[i] ** e
                    fdeg += e
                else:
                    rest[position[i]] = e
            if fdeg != top:
                v *= den ** (top - fdeg)
            key = tuple(rest)
            out[key] = out.get(key, 0) + v
        scale = cden * den ** top
        return Polynomial._raw(len(keep), {e: Fraction(v, scale) for e, v in out.items() if v})

    def substitute_scaled(self, values: Mapping[int, Fraction]) -> Polynomial:
        """Like :meth:`substitute` but up to a positive factor (integer coefficients)."""
        p = self.substitute(values)
        return p.primitive()

    def compose(self, images: Sequence[Polynomial]) -> Polynomial:
        """Substitute polynomial ``images[i]`` for variable ``i``."""
        if len(images) != self.num_vars:
            raise DimensionError("need one image per variable")
        if not images:
            return self
        m = images[0].num_vars
        powers: dict[tuple[int, int], Polynomial] = {}

        def power(i, e):
            key = (i, e)
            if key not in powers:
                powers[key] = images[i] if e == 1 else power(i, e - 1) * images[i]
            return powers[key]

        total = Polynomial(m)
        for exps, c in self._terms.items():
            term = Polynomial.constant(m, c)
            for i, e in enumerate(exps):
                if e:
                    term = term * power(i, e)
            total = total + term
        return total

    def reindex(self, mapping: Sequence[int], num_vars: int) -> Polynomial:
        """Rename variable ``i`` to ``mapping[i]`` in a space of ``num_vars`` variables.

        ``mapping`` must be injective on the variables that occur.
        """
        out = {}
        for exps, c in self._terms.items():
            new = [0] * num_vars
            for i, e in enumerate(exps):
                if e:
                    new[mapping[i]] += e
            out[tuple(new)] = c
        return Polynomial._raw(num_vars, out)

    # -- printing -----------------------------------------------------
    def __str__(self):
        return format_polynomial(self)

    def __repr__(self):
        return f"Polynomial({self.num_vars}, {format_polynomial(self)!r})"


def _grlex_key(exps: Exponent):
    return (sum(exps), exps)


def poly_eval(p: Polynomial, point: Point) -> Fraction:
    """Exact value of ``p`` at a rational point."""
    return p.eval([as_fraction(c) for c in point])


def binomial_shift(p: Polynomial, shift: Sequence[Fraction]) -> Polynomial:
    """``p(x + shift)`` expanded exactly."""
    out: dict[Exponent, Fraction] = {}
    for exps, c in p.terms.items():
        parts = [[(k, comb(e, k) * as_fraction(shift[i]) ** (e - k)) for k in range(e + 1)]
                 for i, e in enumerate(exps)]
        _accumulate(out, parts, c)
    return Polynomial(p.num_vars, out)


def _accumulate(out, parts, coef):
    stack = [((), coef)]
    for choices in parts:
        stack = [(e + (k,), v * w) for e, v in stack for k, w in choices if w]
    for e, v in stack:
        out[e] = out.get(e, 0) + v


# -- text format ------------------------------------------------------------

def _format_coef(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_polynomial(p: Polynomial) -> str:
    if p.is_zero():
        return "0"
    pieces = []
    for exps in sorted(p.terms, key=_grlex_key, reverse=True):
        c = p.terms[exps]
        mono = "*".join(f"x{i + 1}" if e == 1 else f"x{i + 1}^{e}"
                        for i, e in enumerate(exps) if e)
        mag = abs(c)
        if mono:
            body = mono if mag == 1 else f"{_format_coef(mag)}*{mono}"
        else:
            body = _format_coef(mag)
        sign = "-" if c < 0 else "+"
        pieces.append((sign, body))
    first_sign, first = pieces[0]
    text = ("-" if first_sign == "-" else "") + first
    for sign, body in pieces[1:]:
        text += f" {sign} {body}"
    return text


_TOKEN = re.compile(r"\s*(?:(\d+)|(x\d+)|(.))")


class PolynomialSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at column {position + 1}")
        self.position = position


def parse_polynomial(text: str, num_vars: int) -> Polynomial:
    """Parse ``+ - * ^ /``, parentheses, integers and variables ``x1..xN``.

    ``/`` is only allowed between integer literals, so coefficients stay rational.
    """
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.lastindex is None:
            break
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("num", int(m.group(1)), start))
        elif m.group(2):
            idx = int(m.group(2)[1:])
            if not 1 <= idx <= num_vars:
                raise PolynomialSyntaxError(f"variable {m.group(2)} outside x1..x{num_vars}", start)
            tokens.append(("var", idx - 1, start))
        else:
            ch = m.group(3)
            if ch not in "+-*^/()":
                raise PolynomialSyntaxError(f"unexpected character {ch!r}", start)
            tokens.append((ch, None, start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    index = 0

    def peek():
        return tokens[index][0]

    def take(kind):
        nonlocal index
        tok = tokens[index]
        if tok[0] != kind:
            raise PolynomialSyntaxError(f"expected {kind!r}, found {tok[0]!r}", tok[2])
        index += 1
        return tok

    def expr():
        sign = 1
        if peek() in "+-":
            sign = -1 if take(peek())[0] == "-" else 1
        value = term() * sign
        while peek() in ("+", "-"):
            op = take(peek())[0]
            rhs = term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term():
        value = factor()
        while peek() == "*":
            take("*")
            value = value * factor()
        return value

    def factor():
        base = atom()
        if peek() == "^":
            take("^")
            exp = take("num")[1]
            base = base ** exp
        return base

    def atom():
        kind, val, where = tokens[index]
        if kind == "num":
            take("num")
            if peek() == "/":
                take("/")
                den = take("num")[1]
                if den == 0:
                    raise PolynomialSyntaxError("division by zero", where)
                return Polynomial.constant(num_vars, Fraction(val, den))
            return Polynomial.constant(num_vars, val)
        if kind == "var":
            take("var")
            return Polynomial.variable(num_vars, val)
        if kind == "(":
            take("(")
            inner = expr()
            take(")")
            return inner
        if kind == "-":
            take("-")
            return -atom()
        raise PolynomialSyntaxError(f"unexpected {kind!r}", where)

    result = expr()
    if peek() != "end":
        raise PolynomialSyntaxError(f"trailing input {peek()!r}", tokens[index][2])
    return result


def linear(num_vars: int, coefficients: Iterable, constant=0) -> Polynomial:
    """``sum(a_i * x_i) + constant``."""
    terms: dict[Exponent, object] = {}
    for i, a in enumerate(coefficients):
        if a:
            exps = [0] * num_vars
            exps[i] = 1
            terms[tuple(exps)] = a
    if constant:
        terms[(0,) * num_vars] = constant
    return Polynomial(num_vars, terms)
