"""Interval enclosures of polynomials over boxes, and sign/containment certificates.

Enclosures are exact: the box is put over a common integer denominator and
every bound is an integer multiple of a known positive scale, so no rounding
is involved anywhere.  Two enclosures are available:

* :func:`poly_range` -- the natural extension, term by term, with the even
  power rule.  It is inclusion isotone.
* :func:`enclosure` -- the natural extension intersected with the centered
  (Taylor at the box center) form, which is much tighter on small boxes.

Certificates subdivide by bisecting the widest coordinate, breadth first, and
count every box examined against a budget.
"""
from __future__ import annotations

import contextvars
import enum
from collections import deque
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .poly import DimensionError, Polynomial
from .sets import BasicSet, Box, SemiAlgebraicSet

DEFAULT_CERT_BUDGET = 4096


# -- usage accounting --------------------------------------------------------

@dataclass
class Usage:
    boxes: int = 0
    samples: int = 0


_USAGE: contextvars.ContextVar[Usage | None] = contextvars.ContextVar("usage", default=None)


@contextmanager
def track_usage():
    """Collect the number of boxes examined and samples drawn inside the block."""
    usage = Usage()
    token = _USAGE.set(usage)
    try:
        yield usage
    finally:
        _USAGE.reset(token)


def _count_box(k: int = 1):
    u = _USAGE.get()
    if u is not None:
        u.boxes += k


def count_samples(k: int):
    u = _USAGE.get()
    if u is not None:
        u.samples += k


# -- intervals ---------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"lo {self.lo} > hi {self.hi}")

    def __add__(self, other):
        other = _iv(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-_iv(other))

    def __rsub__(self, other):
        return _iv(other) - self

    def __mul__(self, other):
        other = _iv(other)
        ps = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval(min(ps), max(ps))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        lo, hi = _pow_range(self.lo, self.hi, k)
        return Interval(lo, hi)

    def __contains__(self, value):
        return self.lo <= value <= self.hi

    def within(self, other: Interval) -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def hull(self, other: Interval) -> Interval:
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo


def _iv(x) -> Interval:
    return x if isinstance(x, Interval) else Interval(x, x)


def _pow_range(lo, hi, e):
    if e == 0:
        return 1, 1
    if e % 2:
        return lo ** e, hi ** e
    if lo >= 0:
        return lo ** e, hi ** e
    if hi <= 0:
        return hi ** e, lo ** e
    return 0, max(lo ** e, hi ** e)


# -- integer enclosures ------------------------------------------------------

def _natural_int(p: Polynomial, box: Box):
    """Natural enclosure as ``(lo, hi)`` at scale ``cden * q**deg``."""
    q, a, b = box.int_form()
    cden, terms = p.int_form()
    deg = p.degree
    lo_total = hi_total = 0
    for c, exps, tdeg in terms:
        lo, hi = c, c
        for i, e in exps:
            plo, phi = _pow_range(a[i], b[i], e)
            cands = (lo * plo, lo * phi, hi * plo, hi * phi)
            lo, hi = min(cands), max(cands)
        if tdeg != deg:
            f = q ** (deg - tdeg)
            lo, hi = lo * f, hi * f
        lo_total += lo
        hi_total += hi
    return lo_total, hi_total


def _centered_int(p: Polynomial, box: Box):
    """Centered enclosure as ``(lo, hi)`` at scale ``cden * (2q)**deg``."""
    q, a, b = box.int_form()
    cden, terms = p.int_form()
    deg = p.degree
    q2 = 2 * q
    mids = [x + y for x, y in zip(a, b)]
    rads = [y - x for x, y in zip(a, b)]
    coeffs: dict[tuple, int] = {}
    for c, exps, tdeg in terms:
        partial = {(): c * (q2 ** (deg - tdeg) if tdeg != deg else 1)}
        for i, e in exps:
            m = mids[i]
            nxt = {}
            for key, v in partial.items():
                for k in range(e + 1):
                    w = comb(e, k) * m ** (e - k)
                    if w:
                        nk = key + ((i, k),) if k else key
                        nxt[nk] = nxt.get(nk, 0) + v * w
            partial = nxt
        for key, v in partial.items():
            coeffs[key] = coeffs.get(key, 0) + v
    lo = hi = coeffs.pop((), 0)
    for key, v in coeffs.items():
        if not v:
            continue
        mag = v if v > 0 else -v
        even = True
        for i, k in key:
            mag *= rads[i] ** k
            if k % 2:
                even = False
        if even:
            if v > 0:
                hi += mag
            else:
                lo -= mag
        else:
            lo -= mag
            hi += mag
    return lo, hi


def enclosure_int(p: Polynomial, box: Box):
    """Tight enclosure ``(lo, hi)`` at a positive scale (only signs are meaningful)."""
    if p.num_vars != box.dim:
        raise DimensionError(f"polynomial in {p.num_vars} variables on a box of dimension {box.dim}")
    if p.degree <= 1:
        return _natural_int(p, box)
    nlo, nhi = _natural_int(p, box)
    f = 2 ** p.degree
    clo, chi = _centered_int(p, box)
    return max(nlo * f, clo), min(nhi * f, chi)


def poly_range(p: Polynomial, b: Box) -> Interval:
    """Natural interval extension of ``p`` over the closure of ``b``."""
    if p.num_vars != b.dim:
        raise DimensionError(f"polynomial in {p.num_vars} variables on a box of dimension {b.dim}")
    lo, hi = _natural_int(p, b)
    scale = p.int_form()[0] * b.int_form()[0] ** p.degree
    return Interval(Fraction(lo, scale), Fraction(hi, scale))


def enclosure(p: Polynomial, b: Box) -> Interval:
    """Tight enclosure of ``p`` over the closure of ``b``."""
    lo, hi = enclosure_int(p, b)
    scale = p.int_form()[0] * (2 * b.int_form()[0]) ** p.degree
    if p.degree <= 1:
        scale = p.int_form()[0] * b.int_form()[0] ** p.degree
    return Interval(Fraction(lo, scale), Fraction(hi, scale))


# -- sign certificates -------------------------------------------------------

class Cert(enum.Enum):
    TRUE = "CertTrue"
    FALSE = "CertFalse"
    UNKNOWN = "Unknown"


RELATIONS = (">0", "<0", "!=0", "=0")


def _decide(relation: str, lo: int, hi: int):
    if relation == ">0":
        return True if lo > 0 else False if hi <= 0 else None
    if relation == "<0":
        return True if hi < 0 else False if lo >= 0 else None
    zero = lo == 0 and hi == 0
    nonzero = lo > 0 or hi < 0
    if relation == "!=0":
        return True if nonzero else False if zero else None
    if relation == "=0":
        return True if zero else False if nonzero else None
    raise ValueError(f"unknown relation {relation!r}; expected one of {RELATIONS}")


def certify_sign(p: Polynomial, b: Box, relation: str, budget: int = DEFAULT_CERT_BUDGET) -> Cert:
    """Prove that ``relation`` holds (``TRUE``) or fails (``FALSE``) on all of ``b``."""
    queue = deque([b])
    seen_true = seen_false = False
    examined = 0
    try:
        while queue:
            box = queue.popleft()
            examined += 1
            verdict = _decide(relation, *enclosure_int(p, box))
            if verdict is True:
                seen_true = True
            elif verdict is False:
                seen_false = True
            elif examined + len(queue) < budget:
                queue.extend(box.bisect())
            else:
                return Cert.UNKNOWN
            if seen_true and seen_false:
                return Cert.UNKNOWN
    finally:
        _count_box(examined)
    return Cert.TRUE if seen_true else Cert.FALSE


# -- set status --------------------------------------------------------------

class Status(enum.Enum):
    FULLY_IN = "FullyIn"
    FULLY_OUT = "FullyOut"
    MIXED = "Mixed"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class CertificateTrace:
    boxes: int = 0
    leaves_in: int = 0
    leaves_out: int = 0
    undecided: int = 0
    depth: int = 0


@dataclass(frozen=True)
class BoxStatus:
    status: Status
    trace: CertificateTrace = field(default_factory=CertificateTrace)
    member: tuple[Fraction, ...] | None = None
    nonmember: tuple[Fraction, ...] | None = None

    @property
    def certified(self) -> bool:
        return self.status in (Status.FULLY_IN, Status.FULLY_OUT)


def basic_status(d: BasicSet, box: Box, ranges: dict | None = None):
    """``True`` if the closed box is certified inside ``d``, ``False`` if outside, else ``None``."""
    if ranges is None:
        ranges = {}
    inside = True
    for f in d.equations:
        r = ranges.get(f)
        if r is None:
            r = ranges[f] = enclosure_int(f, box)
        if r[0] > 0 or r[1] < 0:
            return False
        if r[0] != 0 or r[1] != 0:
            inside = False
    for g in d.strict_positives:
        r = ranges.get(g)
        if r is None:
            r = ranges[g] = enclosure_int(g, box)
        if r[1] <= 0:
            return False
        if r[0] <= 0:
            inside = False
    return True if inside else None


def _classify(disjuncts, live, box):
    ranges = {}
    still = []
    for k in live:
        s = basic_status(disjuncts[k], box, ranges)
        if s is True:
            return True, live
        if s is None:
            still.append(k)
    if not still:
        return False, ()
    return None, tuple(still)


def certify_set_status(X: SemiAlgebraicSet, b: Box, budget: int = DEFAULT_CERT_BUDGET) -> BoxStatus:
    """Classify ``b`` against ``X``: fully inside, fully outside, mixed, or unknown.

    ``MIXED`` is reported as soon as one certified-inside and one
    certified-outside sub-box are found (their centers are returned as exact
    witnesses); undecided leaves left when the budget runs out are probed at
    their centers before giving up with ``UNKNOWN``.
    """
    if X.num_vars != b.dim:
        raise DimensionError(f"set in R^{X.num_vars} against a box of dimension {b.dim}")
    if not X.disjuncts:
        return BoxStatus(Status.FULLY_OUT)
    disjuncts = X.disjuncts
    queue = deque([(b, tuple(range(len(disjuncts))), 0)])
    examined = n_in = n_out = depth = 0
    member = nonmember = None
    undecided = []
    try:
        while queue:
            box, live, level = queue.popleft()
            examined += 1
            depth = max(depth, level)
            verdict, live = _classify(disjuncts, live, box)
            if verdict is True:
                n_in += 1
                member = member or box.center()
            elif verdict is False:
                n_out += 1
                nonmember = nonmember or box.center()
            elif examined + len(queue) < budget:
                left, right = box.bisect()
                queue.append((left, live, level + 1))
                queue.append((right, live, level + 1))
            else:
                undecided.append(box)
            if member is not None and nonmember is not None:
                break
    finally:
        _count_box(examined)
    trace = CertificateTrace(examined, n_in, n_out, len(undecided) + len(queue), depth)
    if member is not None and nonmember is not None:
        return BoxStatus(Status.MIXED, trace, member, nonmember)
    if not undecided and not queue:
        return BoxStatus(Status.FULLY_IN if n_in else Status.FULLY_OUT, trace, member, nonmember)
    for box in undecided:
        c = box.center()
        if X.member(c):
            member = member or c
        else:
            nonmember = nonmember or c
        if member is not None and nonmember is not None:
            return BoxStatus(Status.MIXED, trace, member, nonmember)
    return BoxStatus(Status.UNKNOWN, trace, member, nonmember)


def certify_out(X: SemiAlgebraicSet, b: Box, budget: int = 64) -> bool:
    """Cheap one-sided check: ``True`` only if ``b`` is certified disjoint from ``X``."""
    if not X.disjuncts:
        return True
    disjuncts = X.disjuncts
    queue = deque([(b, tuple(range(len(disjuncts))))])
    examined = 0
    try:
        while queue:
            box, live = queue.popleft()
            examined += 1
            verdict, live = _classify(disjuncts, live, box)
            if verdict is True:
                return False
            if verdict is None:
                if examined + len(queue) >= budget:
                    return False
                left, right = box.bisect()
                queue.append((left, live))
                queue.append((right, live))
    finally:
        _count_box(examined)
    return True


# -- regularity --------------------------------------------------------------

INCREASING, DECREASING, CONSTANT = "increasing", "decreasing", "constant"


@dataclass(frozen=True)
class Regular:
    profile: tuple[str, ...]


def certify_regular(f: Polynomial, b: Box, budget: int = 256) -> Regular | None:
    """Certify that ``f`` is monotone or constant in each coordinate on ``b``.

    Returns ``None`` (not certified) when some partial derivative cannot be
    shown to keep a strict sign.
    """
    if f.num_vars != b.dim:
        raise DimensionError("dimension mismatch")
    profile = []
    for i in range(f.num_vars):
        d = f.derivative(i)
        if d.is_zero():
            profile.append(CONSTANT)
        elif certify_sign(d, b, ">0", budget) is Cert.TRUE:
            profile.append(INCREASING)
        elif certify_sign(d, b, "<0", budget) is Cert.TRUE:
            profile.append(DECREASING)
        else:
            return None
    return Regular(tuple(profile))
