"""Parameter optimization objectives over weighted systems."""

import pytest

from conftest import SYS_A_TEXT
from cpltl.formula import FragmentError, parse
from cpltl.modelcheck import check_fixed, valuation_upper_bound
from cpltl.optimize import (
    Objective,
    OptimizeResult,
    binary_search_threshold,
    optimize_mc,
)
from cpltl.system import TransitionSystem, parse_system

MC1 = "G (q -> F[<=x] p)"


@pytest.fixture(scope="module")
def sys_a():
    return parse_system(SYS_A_TEXT)


def test_objective_values():
    assert Objective.MIN_MIN.value == "min-min"
    assert Objective.MIN_MAX.value == "min-max"
    assert Objective.MAX_MAX.value == "max-max"
    assert Objective.MAX_MIN.value == "max-min"
    assert Objective("min-min") is Objective.MIN_MIN


def test_binary_search_least():
    calls = []

    def pred(v):
        calls.append(v)
        return v >= 3

    assert binary_search_threshold(pred, 0, 26) == 3
    # memoized probes: at most ceil(log2(27)) + 1
    assert len(calls) <= 6
    assert binary_search_threshold(lambda v: v >= 0, 0, 26) == 0
    assert binary_search_threshold(lambda v: v >= 26, 0, 26) == 26
    assert binary_search_threshold(lambda v: False, 0, 26) is None


def test_binary_search_greatest():
    assert binary_search_threshold(lambda v: v <= 17, 0, 26, find="greatest") == 17
    assert binary_search_threshold(lambda v: True, 0, 26, find="greatest") == 26
    assert binary_search_threshold(lambda v: v <= -1, 0, 26, find="greatest") is None


def test_binary_search_edges():
    assert binary_search_threshold(lambda v: True, 5, 3) is None
    assert binary_search_threshold(lambda v: True, 4, 4) == 4
    with pytest.raises(ValueError):
        binary_search_threshold(lambda v: True, 0, 3, find="middle")


def test_min_min_frozen(sys_a):
    result = optimize_mc(sys_a, parse(MC1), Objective.MIN_MIN)
    assert result.status == "optimal"
    assert result.value == 3
    assert result.witness == {"x": 3}
    assert not result.empty_domain
    assert 1 <= result.probes <= 30
    assert result.bound == valuation_upper_bound(sys_a, parse(MC1))
    # the witness is feasible and one step below is not
    assert check_fixed(sys_a, parse(MC1), result.witness).holds
    assert not check_fixed(sys_a, parse(MC1), {"x": 2}).holds


def test_min_max_frozen(sys_a):
    result = optimize_mc(sys_a, parse(MC1), Objective.MIN_MAX)
    assert (result.status, result.value, result.witness) == ("optimal", 3, {"x": 3})


def test_max_objectives_frozen(sys_a):
    for objective in (Objective.MAX_MAX, Objective.MAX_MIN):
        result = optimize_mc(sys_a, parse("G[<=y] q"), objective)
        assert (result.status, result.value, result.witness) == (
            "optimal",
            2,
            {"y": 2},
        ), objective
        assert check_fixed(sys_a, parse("G[<=y] q"), {"y": 2}).holds
        assert not check_fixed(sys_a, parse("G[<=y] q"), {"y": 3}).holds


def test_unbounded(sys_a):
    # every state satisfies q or p, so any budget is tolerated
    for objective in (Objective.MAX_MAX, Objective.MAX_MIN):
        result = optimize_mc(sys_a, parse("G[<=y] (q | p)"), objective)
        assert result.status == "unbounded"
        assert result.value is None
        assert result.witness is None


def test_infeasible(sys_a):
    for objective in (Objective.MIN_MIN, Objective.MIN_MAX):
        result = optimize_mc(sys_a, parse("F[<=x] r"), objective)
        assert (result.status, result.value, result.witness) == (
            "infeasible",
            None,
            None,
        )
    result = optimize_mc(sys_a, parse("G[<=y] p"), Objective.MAX_MIN)
    assert result.status == "infeasible"


def test_empty_domain(sys_a):
    holds = optimize_mc(sys_a, parse("p | !p"), Objective.MIN_MIN)
    assert (holds.status, holds.value, holds.witness) == ("optimal", 0, {})
    assert holds.empty_domain
    assert holds.probes == 1
    fails = optimize_mc(sys_a, parse("p"), Objective.MAX_MAX)
    assert (fails.status, fails.value, fails.witness) == ("infeasible", None, None)
    assert fails.empty_domain


def test_objective_accepts_raw_value(sys_a):
    result = optimize_mc(sys_a, parse("G[<=y] q"), "max-max")
    assert (result.status, result.value) == ("optimal", 2)


def test_fragment_errors(sys_a):
    with pytest.raises(FragmentError):
        optimize_mc(sys_a, parse("G[<=y] q"), Objective.MIN_MIN)
    with pytest.raises(FragmentError):
        optimize_mc(sys_a, parse("F[<=x] p"), Objective.MAX_MAX)
    for objective in Objective:
        with pytest.raises(FragmentError):
            optimize_mc(sys_a, parse("F[<=x] p & G[<=y] q"), objective)


def _tiny_system(d):
    return TransitionSystem(
        states=("a",),
        initial="a",
        edges={"a": ("a",)},
        labels={"a": frozenset(["p"])},
        cost={("a", "a"): (0,) * d},
        d=d,
    )


def test_multi_coordinate_needs_exhaustive():
    tiny = _tiny_system(2)
    with pytest.raises(FragmentError):
        optimize_mc(tiny, parse("F[<=x] p"), Objective.MIN_MIN)
    result = optimize_mc(tiny, parse("F[<=x] p"), Objective.MIN_MIN, exhaustive=True)
    assert (result.status, result.value, result.witness) == ("optimal", 0, {"x": 0})
    # variable-free queries never need the box search
    plain = optimize_mc(tiny, parse("p"), Objective.MIN_MIN)
    assert (plain.status, plain.value) == ("optimal", 0)


def test_exhaustive_agrees_on_fixtures():
    # the closed-form searches and the box scan agree wherever both run;
    # a zero-cost system keeps the scanned box small
    tiny = _tiny_system(1)
    for text, objective in [
        ("F[<=x] p", Objective.MIN_MIN),
        ("F[<=x] p", Objective.MIN_MAX),
    ]:
        fast = optimize_mc(tiny, parse(text), objective)
        slow = optimize_mc(tiny, parse(text), objective, exhaustive=True)
        assert (fast.status, fast.value) == (slow.status, slow.value) == ("optimal", 0)
    # G-budgets on the zero-cost loop tolerate anything
    for exhaustive in (False, True):
        wide = optimize_mc(
            tiny, parse("G[<=y] p"), Objective.MAX_MAX, exhaustive=exhaustive
        )
        assert wide.status == "unbounded"


def test_result_shape(sys_a):
    result = optimize_mc(sys_a, parse(MC1), Objective.MIN_MIN)
    assert isinstance(result, OptimizeResult)
    assert result.probes >= 1
    assert result.bound >= 1
