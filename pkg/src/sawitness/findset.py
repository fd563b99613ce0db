"""Uniform boxes: an open box lying entirely inside or entirely outside each set of a family."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .interval import DEFAULT_CERT_BUDGET, BoxStatus, Status, certify_set_status
from .poly import DimensionError
from .sets import Box, SemiAlgebraicSet

DEFAULT_SEARCH_BUDGET = 512
CANDIDATE_CERT_BUDGET = 128


class BudgetExhausted(RuntimeError):
    def __init__(self, index: int, message: str):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class UniformBoxResult:
    V: Box
    inside: frozenset[int]
    outside: frozenset[int]
    certificates: tuple[BoxStatus, ...]

    def partition_holds(self, lambdas: Sequence[SemiAlgebraicSet], point) -> bool:
        """Membership at ``point`` agrees with the partition (for independent re-checks)."""
        return all(lambdas[i - 1].member(point) == (i in self.inside)
                   for i in range(1, len(lambdas) + 1))


def _search(X: SemiAlgebraicSet, start: Box, budget: int, cert_budget: int):
    """Breadth-first over the bisection tree of ``start``: first certified level wins.

    Within a level the leftmost FullyOut box is preferred over any FullyIn box.
    """
    level = [start]
    examined = 0
    while level:
        found_in = None
        for box in level:
            examined += 1
            status = certify_set_status(X, box, min(cert_budget, CANDIDATE_CERT_BUDGET))
            if status.status is Status.FULLY_OUT:
                return box, status
            if status.status is Status.FULLY_IN and found_in is None:
                found_in = (box, status)
            if examined >= budget:
                return found_in
        if found_in is not None:
            return found_in
        level = [half for box in level for half in box.bisect()]
    return None


def find_uniform_box(lambdas: Sequence[SemiAlgebraicSet], initial: Box,
                     budget: int = DEFAULT_SEARCH_BUDGET,
                     cert_budget: int = DEFAULT_CERT_BUDGET) -> UniformBoxResult:
    """Shrink ``initial`` one set at a time until it is uniform for every set.

    ``budget`` caps the candidate boxes tried per set; indices in the result
    are 1-based.
    """
    for i, X in enumerate(lambdas, 1):
        if X.num_vars != initial.dim:
            raise DimensionError(f"set {i} lives in R^{X.num_vars}, box in R^{initial.dim}")
    V = initial
    inside, outside = set(), set()
    for i, X in enumerate(lambdas, 1):
        if not X.disjuncts:
            outside.add(i)
            continue
        hit = _search(X, V, budget, cert_budget)
        if hit is None:
            raise BudgetExhausted(i, f"no sub-box certified inside or outside set {i} within budget")
        V, status = hit
        (inside if status.status is Status.FULLY_IN else outside).add(i)
    # shrinking never breaks earlier certificates, but re-certify on the final box
    certs = []
    for i, X in enumerate(lambdas, 1):
        status = certify_set_status(X, V, cert_budget)
        expected = Status.FULLY_IN if i in inside else Status.FULLY_OUT
        if status.status is not expected:
            raise BudgetExhausted(i, f"certificate for set {i} did not survive on the final box")
        certs.append(status)
    return UniformBoxResult(V, frozenset(inside), frozenset(outside), tuple(certs))
