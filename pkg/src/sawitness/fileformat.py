"""Plain-text set definitions and expression lists.

A set file holds one or more blocks::

    set NAME dim N
    bound lo1 hi1 ... loN hiN
    point p1 ... pN          # optional distinguished point, repeatable
    basic:
      eq <polynomial>
      gt <polynomial>
    basic:
      ...

Numbers are integers or ``p/q`` rationals; polynomials use ``x1..xN``.
``#`` starts a comment.  A ``basic:`` block without atoms is all of ``R^N``.
Sets with a bound are intersected with it on load.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .poly import PolynomialSyntaxError, format_polynomial, parse_polynomial
from .rae import RAE, RAESyntaxError, UnknownConstant, parse_rae
from .sets import BasicSet, Box, SemiAlgebraicSet


class FileFormatError(ValueError):
    def __init__(self, source: str, line: int, message: str):
        super().__init__(f"{source}:{line}: {message}")
        self.source, self.line = source, line


@dataclass
class _Draft:
    name: str
    dim: int
    line: int
    bound: Box | None = None
    points: list | None = None
    disjuncts: list | None = None


def _number(text: str, source: str, line: int) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise FileFormatError(source, line, f"bad number {text!r}") from None


def _finish(d: _Draft) -> SemiAlgebraicSet:
    disjuncts = []
    for eqs, gts in d.disjuncts or []:
        b = BasicSet.make(d.dim, eqs, gts)
        if b is not None:
            disjuncts.append(b)
    X = SemiAlgebraicSet(d.dim, tuple(disjuncts))
    if d.bound is not None:
        X = X.clipped(d.bound)
    if d.points:
        X = SemiAlgebraicSet(X.num_vars, X.disjuncts, X.declared_bound, tuple(d.points))
    return X


def parse_sets(text: str, source: str = "<string>") -> dict[str, SemiAlgebraicSet]:
    """Parse set blocks; names must be unique."""
    out: dict[str, SemiAlgebraicSet] = {}
    cur: _Draft | None = None

    def close():
        if cur is not None:
            try:
                out[cur.name] = _finish(cur)
            except ValueError as err:
                raise FileFormatError(source, cur.line, str(err)) from None

    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        head = words[0]
        if head == "set":
            if len(words) != 4 or words[2] != "dim" or not words[3].isdigit() or int(words[3]) < 1:
                raise FileFormatError(source, no, "expected 'set NAME dim N'")
            close()
            if words[1] in out:
                raise FileFormatError(source, no, f"set {words[1]} defined twice")
            cur = _Draft(words[1], int(words[3]), no)
            continue
        if cur is None:
            raise FileFormatError(source, no, f"{head!r} before any 'set' line")
        if head == "bound":
            nums = [_number(w, source, no) for w in words[1:]]
            if len(nums) != 2 * cur.dim:
                raise FileFormatError(source, no, f"bound needs {2 * cur.dim} numbers, got {len(nums)}")
            pairs = list(zip(nums[::2], nums[1::2]))
            if any(lo >= hi for lo, hi in pairs):
                raise FileFormatError(source, no, "bound interval with lo >= hi")
            cur.bound = Box(pairs)
        elif head == "point":
            nums = [_number(w, source, no) for w in words[1:]]
            if len(nums) != cur.dim:
                raise FileFormatError(source, no, f"point needs {cur.dim} coordinates")
            cur.points = (cur.points or []) + [tuple(nums)]
        elif head == "basic:":
            cur.disjuncts = (cur.disjuncts or []) + [([], [])]
        elif head in ("eq", "gt"):
            if not cur.disjuncts:
                raise FileFormatError(source, no, f"{head!r} outside a 'basic:' block")
            body = line[len(head):].strip()
            try:
                p = parse_polynomial(body, cur.dim)
            except PolynomialSyntaxError as err:
                raise FileFormatError(source, no, str(err)) from None
            cur.disjuncts[-1][0 if head == "eq" else 1].append(p)
        else:
            raise FileFormatError(source, no, f"unknown keyword {head!r}")
    close()
    return out


def load_sets(paths) -> dict[str, SemiAlgebraicSet]:
    env: dict[str, SemiAlgebraicSet] = {}
    for path in paths:
        sets = parse_sets(Path(path).read_text(), str(path))
        for name in sets:
            if name in env:
                raise FileFormatError(str(path), 0, f"set {name} already defined in an earlier file")
        env.update(sets)
    return env


def format_set(name: str, X: SemiAlgebraicSet) -> str:
    """Inverse of :func:`parse_sets` up to clipping to the bound."""
    lines = [f"set {name} dim {X.num_vars}"]
    if X.declared_bound is not None:
        lines.append("bound " + " ".join(f"{lo} {hi}" for lo, hi in X.declared_bound.intervals))
    for p in X.distinguished_points:
        lines.append("point " + " ".join(map(str, p)))
    for d in X.disjuncts:
        lines.append("basic:")
        lines += [f"  eq {format_polynomial(f)}" for f in d.equations]
        lines += [f"  gt {format_polynomial(g)}" for g in d.strict_positives]
    return "\n".join(lines) + "\n"


def parse_expressions(text: str, env, n: int, source: str = "<string>") -> list[tuple[int, RAE]]:
    """One expression per non-blank line; returns ``(line number, expression)`` pairs."""
    out = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            out.append((no, parse_rae(line, env, n)))
        except RAESyntaxError as err:
            raise FileFormatError(source, no, str(err)) from None
        except UnknownConstant as err:
            raise FileFormatError(source, no, err.args[0]) from None
        except ValueError as err:  # arity errors
            raise FileFormatError(source, no, str(err)) from None
    return out
