"""Optimal parameter valuations against a weighted transition system.

Each objective pairs an aggregation over the valuation's values (min or
max) with an optimization direction.  Minimization applies to formulas
whose parameters all bound F[<=] operators: their feasible sets are upward
closed in every variable.  Maximization applies to G[<=]-only formulas,
whose feasible sets are downward closed.  Either way the objective reduces
to a few monotone threshold searches against check_fixed, capped by the
valuation bound; an exhaustive box search (exponential in the number of
variables) is available as a cross-check and for multi-coordinate systems.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Callable, Mapping, Optional

from .formula import (
    Formula,
    FragmentError,
    eliminate_parametric_always,
    require_well_formed,
)
from .modelcheck import check_fixed, valuation_upper_bound
from .system import TransitionSystem


class Objective(enum.Enum):
    MIN_MIN = "min-min"
    MIN_MAX = "min-max"
    MAX_MAX = "max-max"
    MAX_MIN = "max-min"


OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class OptimizeResult:
    status: str
    value: Optional[int]
    witness: Optional[dict]
    bound: int
    probes: int
    empty_domain: bool = False


def binary_search_threshold(
    predicate: Callable, lo: int, hi: int, find: str = "least"
) -> Optional[int]:
    """Threshold of a monotone predicate on the integer range [lo, hi].

    find='least'  : predicate goes False->True; returns the least true
                    point, or None when predicate(hi) is false.
    find='greatest': predicate goes True->False; returns the greatest true
                    point, or None when predicate(lo) is false.
    Results are cached, so the predicate is called at most
    ceil(log2(hi - lo + 1)) + 1 times.
    """
    if lo > hi:
        return None
    cache: dict = {}

    def probe(v: int) -> bool:
        if v not in cache:
            cache[v] = bool(predicate(v))
        return cache[v]

    if find == "least":
        if not probe(hi):
            return None
        while lo < hi:
            mid = (lo + hi) // 2
            if probe(mid):
                hi = mid
            else:
                lo = mid + 1
        return lo
    if find == "greatest":
        if not probe(lo):
            return None
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if probe(mid):
                lo = mid
            else:
                hi = mid - 1
        return lo
    raise ValueError(f"find must be 'least' or 'greatest', got {find!r}")


def optimize_mc(
    system: TransitionSystem,
    phi: Formula,
    objective,
    exhaustive: bool = False,
) -> OptimizeResult:
    """Best value of the objective over valuations making phi hold on
    every run, with a witness valuation when one exists.

    Raises FragmentError when the formula's parameters do not match the
    objective's direction, or on a multi-coordinate system without
    exhaustive=True.
    """
    objective = Objective(objective)
    profile = require_well_formed(phi)
    minimizing = objective in (Objective.MIN_MIN, Objective.MIN_MAX)
    if minimizing:
        if profile.var_g:
            raise FragmentError(
                "minimization needs every parameter on an F[<=] operator"
            )
        variables = sorted(profile.var_f)
    else:
        if profile.var_f:
            raise FragmentError(
                "maximization needs every parameter on a G[<=] operator"
            )
        variables = sorted(profile.var_g)

    if variables and system.d > 1 and not exhaustive:
        raise FragmentError(
            "optimization over several cost coordinates is exhaustive-only; "
            "pass exhaustive=True and expect exponential cost"
        )

    bound = valuation_upper_bound(system, phi)
    memo: dict = {}
    probes = 0

    def feasible(valuation: Mapping) -> bool:
        nonlocal probes
        key = tuple(sorted(valuation.items()))
        if key not in memo:
            probes += 1
            memo[key] = check_fixed(system, phi, valuation).holds
        return memo[key]

    def result(status, value, witness, cap) -> OptimizeResult:
        return OptimizeResult(
            status=status,
            value=value,
            witness=witness,
            bound=cap,
            probes=probes,
            empty_domain=not variables,
        )

    if not variables:
        ok = feasible({})
        return result(OPTIMAL if ok else INFEASIBLE, 0 if ok else None,
                      {} if ok else None, bound)

    if exhaustive:
        cap = bound
        if objective is Objective.MAX_MAX:
            for var in variables:
                cap = max(cap, _single_variable_cap(system, phi, variables, var))
        return _box_search(objective, variables, cap, feasible, result)

    def uniform(v: int) -> dict:
        return {x: v for x in variables}

    if objective is Objective.MIN_MIN:
        corner = uniform(bound)
        if not feasible(corner):
            return result(INFEASIBLE, None, None, bound)
        best = None
        witness = None
        for x in variables:
            def pred(v: int, _x=x) -> bool:
                point = dict(corner)
                point[_x] = v
                return feasible(point)

            least = binary_search_threshold(pred, 0, bound, "least")
            if best is None or least < best:
                best = least
                witness = dict(corner)
                witness[x] = least
        return result(OPTIMAL, best, witness, bound)

    if objective is Objective.MIN_MAX:
        least = binary_search_threshold(
            lambda v: feasible(uniform(v)), 0, bound, "least"
        )
        if least is None:
            return result(INFEASIBLE, None, None, bound)
        return result(OPTIMAL, least, uniform(least), bound)

    if objective is Objective.MAX_MIN:
        greatest = binary_search_threshold(
            lambda v: feasible(uniform(v)), 0, bound, "greatest"
        )
        if greatest is None:
            return result(INFEASIBLE, None, None, bound)
        if greatest == bound:
            return result(UNBOUNDED, None, None, bound)
        return result(OPTIMAL, greatest, uniform(greatest), bound)

    # MAX_MAX: push one variable up with the others pinned at zero; the
    # per-variable searches need their own caps because pinning changes
    # the formula the bound speaks about.
    if not feasible(uniform(0)):
        return result(INFEASIBLE, None, None, bound)
    overall_cap = bound
    best = None
    witness = None
    for y in variables:
        cap = max(bound, _single_variable_cap(system, phi, variables, y))
        overall_cap = max(overall_cap, cap)

        def pred(v: int, _y=y) -> bool:
            point = uniform(0)
            point[_y] = v
            return feasible(point)

        greatest = binary_search_threshold(pred, 0, cap, "greatest")
        if greatest == cap:
            return result(UNBOUNDED, None, None, overall_cap)
        if best is None or greatest > best:
            best = greatest
            witness = uniform(0)
            witness[y] = greatest
    return result(OPTIMAL, best, witness, overall_cap)


def _single_variable_cap(
    system: TransitionSystem, phi: Formula, variables, var: str
) -> int:
    """Valuation bound for phi with every variable but `var` pinned to 0."""
    others = frozenset(variables) - {var}
    pinned = eliminate_parametric_always(phi, only_vars=others)
    return valuation_upper_bound(system, pinned)


def _box_search(objective, variables, cap, feasible, result) -> OptimizeResult:
    """Scan every valuation in [0, cap]^k.  Exponential; cross-check only."""
    minimizing = objective in (Objective.MIN_MIN, Objective.MIN_MAX)
    take_min = objective in (Objective.MIN_MIN, Objective.MAX_MIN)
    best = None
    witness = None
    for combo in itertools.product(range(cap + 1), repeat=len(variables)):
        point = dict(zip(variables, combo))
        if not feasible(point):
            continue
        value = min(combo) if take_min else max(combo)
        if (
            best is None
            or (minimizing and value < best)
            or (not minimizing and value > best)
        ):
            best = value
            witness = point
    if best is None:
        return result(INFEASIBLE, None, None, cap)
    if objective is Objective.MAX_MIN:
        if feasible({x: cap for x in variables}):
            return result(UNBOUNDED, None, None, cap)
    if objective is Objective.MAX_MAX:
        for y in variables:
            corner = {x: 0 for x in variables}
            corner[y] = cap
            if feasible(corner):
                return result(UNBOUNDED, None, None, cap)
    return result(OPTIMAL, best, witness, cap)
