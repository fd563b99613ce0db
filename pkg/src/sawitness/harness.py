"""Verification instruments: sampled set equality, grid connectivity, extreme values."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import ndimage, optimize
from scipy.stats import norm

from .fiber import Verdict
from .interval import Status, certify_regular, certify_set_status, count_samples
from .oracle import MembershipOracle, eval_oracle
from .poly import DimensionError, Polynomial
from .rae import Constant
from .sampling import sample_points, to_box, unit_samples
from .sets import (
    AffineMap,
    Box,
    DisjunctBudgetExceeded,
    SemiAlgebraicSet,
    sa_difference,
    sa_union,
)

DEFAULT_SAMPLES = 10_000
DEFAULT_UNKNOWN_CEILING = 0.01


# -- set equality --------------------------------------------------------------

@dataclass(frozen=True)
class Equal:
    certified: bool
    samples: int
    unknown_rate: float = 0.0
    kind = "Equal"


@dataclass(frozen=True)
class Differ:
    witness: tuple[Fraction, ...]
    left: str = ""
    right: str = ""
    kind = "Differ"


@dataclass(frozen=True)
class Unknown:
    unknown_rate: float
    samples: int = 0
    kind = "Unknown"


EqualityVerdict = Equal | Differ | Unknown


def as_oracle(X) -> MembershipOracle:
    """Wrap a closed-form set as an exact oracle; oracles pass through."""
    if isinstance(X, MembershipOracle):
        return X
    return eval_oracle(Constant("X", X), X)


def _certified_equal(X: SemiAlgebraicSet, Y: SemiAlgebraicSet, region: Box) -> bool:
    try:
        sym = sa_union(sa_difference(X, Y), sa_difference(Y, X))
    except DisjunctBudgetExceeded:
        return False
    return certify_set_status(sym, region).status is Status.FULLY_OUT


def sets_equal(X, Y, region: Box, samples: int = DEFAULT_SAMPLES, seed: int = 0,
               focus: Box | None = None, unknown_ceiling: float = DEFAULT_UNKNOWN_CEILING,
               extra_points: Sequence = ()) -> EqualityVerdict:
    """Compare two sets (or oracles) on hint points plus ``samples`` points of ``region``.

    With ``focus``, half of the samples are drawn there instead.  The first
    point answered ``In`` by one side and ``Out`` by the other is returned as
    a :class:`Differ` witness.
    """
    X, Y = as_oracle(X), as_oracle(Y)
    if X.arity != Y.arity or region.dim != X.arity:
        raise DimensionError(f"arities {X.arity}, {Y.arity} over a region of dimension {region.dim}")
    points = list(dict.fromkeys(tuple(p) for p in (*X.hints, *Y.hints, *extra_points)))
    if focus is not None:
        half = samples // 2
        points += sample_points(focus, half, seed) + sample_points(region, samples - half, seed + 1)
    else:
        points += sample_points(region, samples, seed)
    count_samples(len(points))
    unknown = 0
    for p in points:
        a, b = X(p), Y(p)
        if a is Verdict.UNKNOWN or b is Verdict.UNKNOWN:
            unknown += 1
        elif a is not b:
            return Differ(p, str(a), str(b))
    rate = unknown / len(points) if points else 0.0
    if rate >= unknown_ceiling and unknown:
        return Unknown(rate, len(points))
    certified = False
    if X.closed is not None and Y.closed is not None:
        certified = _certified_equal(X.closed, Y.closed, region)
    return Equal(certified, len(points), rate)


# -- grid connectivity -----------------------------------------------------------

class GridError(ValueError):
    pass


@dataclass(frozen=True)
class GridComponents:
    resolution: Fraction
    count: int
    labels: dict = field(repr=False)  # cell index tuple -> component id (1-based)
    seed_components: tuple[int, ...] = ()
    occupied: int = 0


def _cells_per_axis(region: Box, resolution: Fraction) -> list[int]:
    out = []
    for w in region.widths():
        q = w / resolution
        if q.denominator != 1 or q <= 0:
            raise GridError(f"resolution {resolution} does not divide region width {w}")
        out.append(int(q))
    return out


def grid_connectivity(X, region: Box, resolution, seeds: Sequence = (), budget: int = 16,
                      samples_per_cell: int = 8, seed: int = 0) -> GridComponents:
    """Count face-connected components of occupied grid cells.

    A closed-form set occupies every cell it is not certified to miss; an
    oracle occupies cells where some sample (or hint) is answered ``In``.
    Distinguished points always occupy the cell whose lower corner they floor to.
    """
    resolution = Fraction(resolution)
    shape = _cells_per_axis(region, resolution)
    lows = region.lows
    occ = np.zeros(shape, dtype=bool)

    def cell_of(p):
        return tuple(min(max(int((c - lo) // resolution), 0), s - 1) for c, lo, s in zip(p, lows, shape))

    def cell_box(idx):
        return Box([(lo + i * resolution, lo + (i + 1) * resolution) for lo, i in zip(lows, idx)])

    if isinstance(X, SemiAlgebraicSet):
        for idx in np.ndindex(*shape):
            if certify_set_status(X, cell_box(idx), budget).status is not Status.FULLY_OUT:
                occ[idx] = True
        special = X.distinguished_points
    else:
        u = unit_samples(samples_per_cell, region.dim, seed)
        for idx in np.ndindex(*shape):
            box = cell_box(idx)
            if any(X(p) is Verdict.IN for p in to_box(u, box)):
                occ[idx] = True
        special = tuple(h for h in X.hints if X(h) is Verdict.IN)
    for p in special:
        if region.contains_closed(p):
            occ[cell_of(p)] = True
    labels, count = ndimage.label(occ)
    mapping = {tuple(int(i) for i in idx): int(labels[idx]) for idx in zip(*np.nonzero(occ))}
    seed_components = tuple(int(labels[cell_of(p)]) for p in seeds)
    return GridComponents(resolution, int(count), mapping, seed_components, int(occ.sum()))


# -- extreme values on the ball and the sphere ------------------------------------

class RegularityError(ValueError):
    pass


@dataclass(frozen=True)
class ExtremeReport:
    min_ball: float
    min_sphere: float
    max_ball: float
    max_sphere: float
    max_gap: float
    extrema_ok: bool
    image_interval_ok: bool

    @property
    def ok(self) -> bool:
        return self.extrema_ok and self.image_interval_ok


def float_evaluator(f: Polynomial):
    """Vectorized float evaluation ``points (m, n) -> values (m,)``."""
    exps = np.array(list(f.terms.keys()), dtype=float).reshape(-1, f.num_vars)
    coefs = np.array([float(c) for c in f.terms.values()])

    def ev(x):
        x = np.atleast_2d(x)
        if not len(coefs):
            return np.zeros(len(x))
        return np.prod(x[:, None, :] ** exps[None, :, :], axis=2) @ coefs

    return ev


def _directions(u: np.ndarray) -> np.ndarray:
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _close(a: float, b: float, rel: float) -> bool:
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


def check_extreme(f: Polynomial, tau: AffineMap, samples: int = 100_000, seed: int = 0,
                  rel_tol: float = 1e-6, gap_tol: float = 1e-2) -> ExtremeReport:
    """Compare extrema of ``f`` over the ball ``tau(■)`` and sphere ``tau(□)``.

    Also checks that the sampled sphere image fills ``[min, max]`` up to a
    relative gap ``gap_tol``.
    """
    n = tau.dim
    s = tau.scale
    enclosing = Box.around(tau.translation, s + s / 16)
    if certify_regular(f, enclosing) is None:
        raise RegularityError("f is not certified regular on a box around tau's ball")
    ev = float_evaluator(f)
    t = np.array([float(c) for c in tau.translation])
    sf = float(s)
    u = unit_samples(samples, n + 1, seed)
    dirs = _directions(u[:, :n])
    sphere = t + sf * dirs
    ball = t + sf * dirs * (u[:, n:] ** (1.0 / n))
    count_samples(2 * samples)
    vs, vb = ev(sphere), ev(ball)

    def on_sphere(v):
        r = np.linalg.norm(v)
        return t + sf * (v / r if r > 0 else np.eye(n)[0])

    def refine_sphere(sign):
        best = dirs[np.argmin(sign * vs)]
        res = optimize.minimize(lambda v: sign * ev(on_sphere(v))[0], best, method="BFGS",
                                options={"gtol": 1e-12})
        return min(sign * ev(on_sphere(res.x))[0], np.min(sign * vs))

    def refine_ball(sign):
        best = ball[np.argmin(sign * vb)]
        cons = {"type": "ineq", "fun": lambda x: sf * sf - np.sum((x - t) ** 2)}
        res = optimize.minimize(lambda x: sign * ev(x)[0], best, method="SLSQP",
                                constraints=[cons], options={"ftol": 1e-15, "maxiter": 500})
        x = res.x
        r = np.linalg.norm(x - t)
        if r > sf:  # pull back inside the ball
            x = t + (x - t) * (sf / r)
        return min(sign * ev(x)[0], np.min(sign * vb))

    min_s, max_s = refine_sphere(1.0), -refine_sphere(-1.0)
    min_b, max_b = refine_ball(1.0), -refine_ball(-1.0)
    extrema_ok = _close(min_b, min_s, rel_tol) and _close(max_b, max_s, rel_tol)
    span = max_s - min_s
    if span <= 0:
        gap = 0.0
    else:
        pts = np.concatenate([[min_s], np.sort(vs), [max_s]])
        gap = float(np.max(np.diff(pts)) / span)
    return ExtremeReport(float(min_b), float(min_s), float(max_b), float(max_s), gap,
                         bool(extrema_ok), bool(gap < gap_tol))
