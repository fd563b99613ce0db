"""Exact decisions for systems in one variable of degree at most two.

Roots of quadratics are quadratic surds ``p + q*sqrt(d)``; every comparison
below is decided exactly by squaring, never by floating point.
"""
from __future__ import annotations

import functools
from fractions import Fraction
from math import gcd, isqrt
from typing import Sequence

from .poly import Polynomial

MAX_EXACT_DEGREE = 2


def _rational_sqrt(d: Fraction) -> Fraction | None:
    n, m = d.numerator, d.denominator
    rn, rm = isqrt(n), isqrt(m)
    if rn * rn == n and rm * rm == m:
        return Fraction(rn, rm)
    return None


def _sign(x) -> int:
    return (x > 0) - (x < 0)


class Surd:
    """The real number ``p + q*sqrt(d)`` with rational ``p, q`` and ``d >= 0``."""

    __slots__ = ("p", "q", "d")

    def __init__(self, p, q=0, d=0):
        p, q, d = Fraction(p), Fraction(q), Fraction(d)
        if d < 0:
            raise ValueError("negative radicand")
        if q and d:
            r = _rational_sqrt(d)
            if r is not None:
                p, q, d = p + q * r, Fraction(0), Fraction(0)
        else:
            q, d = Fraction(0), Fraction(0)
        self.p, self.q, self.d = p, q, d

    @property
    def is_rational(self) -> bool:
        return self.q == 0

    def sign(self) -> int:
        sp, sq = _sign(self.p), _sign(self.q)
        if sq == 0:
            return sp
        if sp == 0 or sp == sq:
            return sq
        # opposite signs: compare p^2 with q^2 d
        return sp * _sign(self.p * self.p - self.q * self.q * self.d)

    def __neg__(self):
        return Surd(-self.p, -self.q, self.d)

    def bracket(self, bits: int) -> tuple[Fraction, Fraction]:
        """Rationals ``lo <= self <= hi`` with ``hi - lo`` of order ``|q| 2**-bits``."""
        if self.q == 0:
            return self.p, self.p
        n, m = self.d.numerator, self.d.denominator
        scale = 1 << bits
        r = isqrt(n * m * scale * scale)
        a = self.p + self.q * Fraction(r, m * scale)
        b = self.p + self.q * Fraction(r + 1, m * scale)
        return (a, b) if a <= b else (b, a)

    def value(self):
        """The rational value when rational, else ``self``."""
        return self.p if self.q == 0 else self

    def __float__(self):
        return float(self.p) + float(self.q) * float(self.d) ** 0.5

    def __eq__(self, other):
        return compare(self, other) == 0

    def __hash__(self):
        return hash((self.p, self.q, self.d))

    def __repr__(self):
        return f"Surd({self})"

    def __str__(self):
        if self.q == 0:
            return str(self.p)
        return f"{self.p} + {self.q}*sqrt({self.d})"


def as_surd(x) -> Surd:
    return x if isinstance(x, Surd) else Surd(x)


def compare(a, b) -> int:
    """Exact sign of ``a - b`` for surds or rationals."""
    a, b = as_surd(a), as_surd(b)
    if a.q == 0 or b.q == 0 or a.d == b.d:
        d = a.d if a.q else b.d
        return Surd(a.p - b.p, a.q - b.q, d).sign()
    # a - b = u + v with u in Q(sqrt(a.d)) and v = -b.q*sqrt(b.d)
    u = Surd(a.p - b.p, a.q, a.d)
    su, sv = u.sign(), -_sign(b.q)
    if su == 0:
        return sv
    if su == sv:
        return su
    # opposite signs: compare |u| with |v| through u^2 - v^2, still in Q(sqrt(a.d))
    diff = Surd(u.p * u.p + u.q * u.q * u.d - b.q * b.q * b.d, 2 * u.p * u.q, u.d).sign()
    return su if diff > 0 else sv if diff < 0 else 0


def rational_between(a, b) -> Fraction:
    """A rational strictly between ``a < b`` (surds or rationals)."""
    if compare(a, b) >= 0:
        raise ValueError("empty interval")
    a, b = as_surd(a), as_surd(b)
    bits = 8
    while True:
        _, a_hi = a.bracket(bits)
        b_lo, _ = b.bracket(bits)
        if a_hi < b_lo:
            return _simple_between(a_hi, b_lo, a, b)
        bits *= 2


def _simple_between(lo: Fraction, hi: Fraction, a: Surd, b: Surd) -> Fraction:
    """Prefer a short dyadic rational in ``[lo, hi]`` (both strictly inside ``(a, b)``)."""
    mid = (lo + hi) / 2
    width = hi - lo
    k = 0
    while Fraction(1, 1 << k) > width / 2:
        k += 1
    cand = Fraction(round(mid * (1 << k)), 1 << k)
    if lo <= cand <= hi and compare(a, cand) < 0 < compare(b, cand):
        return cand
    return mid


# -- polynomials in one variable ----------------------------------------------

def coefficients(f: Polynomial) -> list[Fraction]:
    """Dense coefficient list ``[c0, c1, ...]`` of a univariate polynomial."""
    if f.num_vars != 1:
        raise ValueError("expected a polynomial in one variable")
    out = [Fraction(0)] * (f.degree + 1)
    for (e,), c in f.terms.items():
        out[e] = c
    return out


def sign_at(f: Polynomial | Sequence[Fraction], x) -> int:
    """Exact sign of a univariate polynomial at a surd or rational."""
    cs = coefficients(f) if isinstance(f, Polynomial) else f
    x = as_surd(x)
    if x.q == 0:
        v = Fraction(0)
        for c in reversed(cs):
            v = v * x.p + c
        return _sign(v)
    # Horner in Q(sqrt(d)): (A + B r)(p + q r) = (Ap + Bqd) + (Aq + Bp) r
    A, B = Fraction(0), Fraction(0)
    p, q, d = x.p, x.q, x.d
    for c in reversed(cs):
        A, B = A * p + B * q * d + c, A * q + B * p
    return Surd(A, B, d).sign()


def real_roots(f: Polynomial | Sequence[Fraction]) -> list[Surd]:
    """Distinct real roots, increasing, of a nonzero polynomial of degree <= 2."""
    cs = list(coefficients(f) if isinstance(f, Polynomial) else f)
    while cs and cs[-1] == 0:
        cs.pop()
    if len(cs) <= 1:
        return []
    if len(cs) == 2:
        return [Surd(-cs[0] / cs[1])]
    if len(cs) > 3:
        raise ValueError("degree above 2")
    c, b, a = cs
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    p, q = -b / (2 * a), 1 / (2 * a)
    if disc == 0:
        return [Surd(p)]
    roots = [Surd(p, -abs(q), disc), Surd(p, abs(q), disc)]
    return roots


def _sorted_distinct(values: list[Surd]) -> list[Surd]:
    values = sorted(values, key=functools.cmp_to_key(compare))
    out: list[Surd] = []
    for v in values:
        if not out or compare(out[-1], v) != 0:
            out.append(v)
    return out


def decide(equations: Sequence[Polynomial], positives: Sequence[Polynomial],
           lo: Fraction, hi: Fraction):
    """Is ``{t in (lo, hi): f(t) = 0, g(t) > 0}`` nonempty?

    Returns ``(True, witness)``, ``(False, None)``, or ``(None, None)`` when a
    polynomial has degree above two.  Witnesses are rational whenever the set
    has interior; otherwise they are roots (possibly irrational surds).
    """
    eqs = [f for f in equations if not f.is_zero()]
    for f in eqs:
        if f.is_constant():
            return False, None
    for g in positives:
        if g.is_constant() and g.constant_value() <= 0:
            return False, None
    gts = [coefficients(g) for g in positives if not g.is_constant()]
    if eqs:
        f = min(eqs, key=lambda p: p.degree)
        if f.degree > MAX_EXACT_DEGREE:
            return None, None
        others = [coefficients(h) for h in eqs if h is not f]
        for r in real_roots(f):
            if compare(r, lo) <= 0 or compare(r, hi) >= 0:
                continue
            if all(sign_at(h, r) == 0 for h in others) and all(sign_at(g, r) > 0 for g in gts):
                return True, r.value()
        return False, None
    if any(len(g) - 1 > MAX_EXACT_DEGREE for g in gts):
        return None, None
    crit = [r for g in gts for r in real_roots(g)
            if compare(r, lo) > 0 and compare(r, hi) < 0]
    marks = [as_surd(lo)] + _sorted_distinct(crit) + [as_surd(hi)]
    for a, b in zip(marks, marks[1:]):
        t = rational_between(a, b)
        if all(sign_at(g, t) > 0 for g in gts):
            return True, t
    return False, None


# -- integer kernel -------------------------------------------------------------
#
# Hot path for fiber queries with one free coordinate.  Polynomials are dense
# integer coefficient lists (known up to a positive factor), roots are tuples
# (P, Q, D, R) standing for (P + Q*sqrt(D)) / R with R > 0, and rational
# endpoints are (P, 0, 0, R).

def surd_sign(a: int, b: int, d: int) -> int:
    """Sign of ``a + b*sqrt(d)`` for integers, ``d >= 0``."""
    sa = (a > 0) - (a < 0)
    if b == 0 or d == 0:
        return sa
    sb = (b > 0) - (b < 0)
    if sa == 0 or sa == sb:
        return sb
    t = a * a - b * b * d
    return sa * ((t > 0) - (t < 0))


def trim(cs):
    cs = list(cs)
    while cs and cs[-1] == 0:
        cs.pop()
    return cs


def int_sign_at(cs, root) -> int:
    """Sign of the integer polynomial ``cs`` at a root tuple."""
    P, Q, D, R = root
    if Q == 0:
        v = 0
        rp = 1
        for c in reversed(cs):  # Horner for R^deg * f(P/R)
            v = v * P + c * rp
            rp *= R
        return (v > 0) - (v < 0)
    A, B = 0, 0
    rpow = 1
    # sum of c_i (P + Q sqrt D)^i R^(deg - i), Horner from the top degree
    for c in reversed(cs):
        A, B = A * P + B * Q * D + c * rpow, A * Q + B * P
        rpow *= R
    return surd_sign(A, B, D)


def int_compare(x, y) -> int:
    """Exact sign of ``x - y`` for root tuples."""
    P1, Q1, D1, R1 = x
    P2, Q2, D2, R2 = y
    a = P1 * R2 - P2 * R1
    b, c = Q1 * R2, -Q2 * R1
    if c == 0 or D2 == 0:
        return surd_sign(a, b, D1)
    if b == 0 or D1 == 0:
        return surd_sign(a, c, D2)
    if D1 == D2:
        return surd_sign(a, b + c, D1)
    su = surd_sign(a, b, D1)
    sv = (c > 0) - (c < 0)
    if su == 0:
        return sv
    if su == sv:
        return su
    diff = surd_sign(a * a + b * b * D1 - c * c * D2, 2 * a * b, D1)
    return su if diff > 0 else sv if diff < 0 else 0


def int_roots(cs) -> list[tuple]:
    """Distinct real roots, increasing, of a trimmed integer polynomial of degree 1 or 2."""
    if len(cs) == 2:
        c0, c1 = cs
        return [(-c0, 0, 0, c1) if c1 > 0 else (c0, 0, 0, -c1)]
    c0, c1, c2 = cs
    D = c1 * c1 - 4 * c2 * c0
    if D < 0:
        return []
    s = 1 if c2 > 0 else -1
    P, R = -c1 * s, 2 * c2 * s
    if D == 0:
        return [(P, 0, 0, R)]
    r = isqrt(D)
    if r * r == D:
        return [(P - r, 0, 0, R), (P + r, 0, 0, R)]
    return [(P, -1, D, R), (P, 1, D, R)]


def _right_sign(cs, root) -> int:
    """Sign of ``cs`` just to the right of ``root`` (degree <= 2, not identically zero)."""
    s = int_sign_at(cs, root)
    if s or len(cs) == 1:
        return s
    d1 = [i * c for i, c in enumerate(cs)][1:]
    s = int_sign_at(d1, root)
    if s or len(d1) == 1:
        return s
    return (cs[2] > 0) - (cs[2] < 0)


def decide_int(eqs, gts, lo, hi):
    """Integer-kernel twin of :func:`decide`: ``True``/``False``, or ``None`` above degree two.

    ``lo`` and ``hi`` are root tuples of rationals.
    """
    todo = []
    for cs in eqs:
        cs = trim(cs)
        if not cs:
            continue
        if len(cs) == 1:
            return False
        todo.append(cs)
    pos = []
    for cs in gts:
        cs = trim(cs)
        if len(cs) <= 1:
            if not cs or cs[0] <= 0:
                return False
            continue
        if len(cs) > 3:
            return None
        pos.append(cs)
    if todo:
        f = min(todo, key=len)
        if len(f) > 3:
            return None
        for r in int_roots(f):
            if int_compare(r, lo) <= 0 or int_compare(r, hi) >= 0:
                continue
            if all(int_sign_at(h, r) == 0 for h in todo if h is not f) and \
                    all(int_sign_at(g, r) > 0 for g in pos):
                return True
        return False
    if not pos:
        return True
    marks = [lo]
    for g in pos:
        for r in int_roots(g):
            if int_compare(r, lo) > 0 and int_compare(r, hi) < 0:
                marks.append(r)
    for c in marks:
        if all(_right_sign(g, c) > 0 for g in pos):
            return True
    return False


def _scaled_bound(root, shift: int, upper: bool) -> int:
    """Integer bound on ``root * 2^shift`` from above (``upper``) or below."""
    P, Q, D, R = root
    num = P << shift
    if Q:
        s = isqrt(D << (2 * shift))  # s <= sqrt(D) 2^shift < s + 1
        num += Q * (s + 1 if (Q > 0) == upper else s)
    return -(-num // R) if upper else num // R


def int_between(a, b) -> tuple:
    """A dyadic root tuple strictly between root tuples ``a < b``."""
    shift = 8
    while True:
        ua, lb = _scaled_bound(a, shift, True), _scaled_bound(b, shift, False)
        if lb - ua >= 2:
            return ((ua + lb) // 2, 0, 0, 1 << shift)
        shift *= 2


def integer_coefficients(f: Polynomial | Sequence[Fraction]) -> list[int]:
    """Coefficients scaled by a positive integer so that all are integers."""
    cs = coefficients(f) if isinstance(f, Polynomial) else [Fraction(c) for c in f]
    den = 1
    for c in cs:
        den = den * c.denominator // gcd(den, c.denominator)
    return [int(c * den) for c in cs]


def decide_fast(equations: Sequence[Polynomial], positives: Sequence[Polynomial], lo, hi):
    """:func:`decide` without the witness, on the integer kernel."""
    lo, hi = Fraction(lo), Fraction(hi)
    return decide_int([integer_coefficients(f) for f in equations],
                      [integer_coefficients(g) for g in positives],
                      (lo.numerator, 0, 0, lo.denominator), (hi.numerator, 0, 0, hi.denominator))
