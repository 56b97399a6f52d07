"""Formula layer: parser, printer, negation, closure, rewrites."""

import random

import pytest

from conftest import FORMULA_TEXTS, random_formula, random_trace
from cpltl.formula import (
    And,
    Atom,
    FLe,
    FormulaError,
    GLe,
    NegAtom,
    Next,
    Or,
    ParseError,
    Release,
    Until,
    atoms,
    chi_formula,
    closure,
    eliminate_parametric_always,
    expand_derived,
    ff,
    is_ff,
    is_tt,
    negate,
    parse,
    pretty_print,
    relativize,
    require_well_formed,
    simplify_constants,
    size,
    subformulas,
    tt,
    var_profile,
)
from cpltl.trace import CostLetter, CostTrace, evaluate


def test_parse_pretty_round_trip_pool():
    for text in FORMULA_TEXTS:
        phi = parse(text)
        assert parse(pretty_print(phi)) == phi


def test_parse_pretty_round_trip_random():
    rng = random.Random(401)
    for _ in range(300):
        phi = random_formula(rng, rng.randint(1, 4), d=2, f_vars=("x", "x2"), g_vars=("y",))
        assert parse(pretty_print(phi)) == phi


def test_precedence():
    assert parse("p | q & r") == Or(Atom("p"), And(Atom("q"), Atom("r")))
    assert parse("p & q U r") == And(Atom("p"), Until(Atom("q"), Atom("r")))
    # U is right-associative and binds tighter than conjunction
    assert parse("p U q U r") == Until(Atom("p"), Until(Atom("q"), Atom("r")))
    assert parse("X p U q") == Until(Next(Atom("p")), Atom("q"))
    assert parse("p -> q -> r") == parse("!p | (!q | r)")
    assert parse("(p | q) & r") == And(Or(Atom("p"), Atom("q")), Atom("r"))


def test_parse_negation_is_pushed():
    assert parse("!(p & q)") == Or(NegAtom("p"), NegAtom("q"))
    assert parse("!(p U q)") == Release(NegAtom("p"), NegAtom("q"))
    assert parse("!X p") == Next(NegAtom("p"))
    assert parse("!!p") == Atom("p")
    assert parse("!F[<=x] p") == GLe("x", 1, NegAtom("p"))


def test_parse_brackets():
    assert parse("F[<=x] p") == FLe("x", 1, Atom("p"))
    assert parse("G[<=y] p") == GLe("y", 1, Atom("p"))
    assert parse("F[<=x@2] p") == FLe("x", 2, Atom("p"))
    assert parse("a U[<=x] b") == expand_derived("U<=", (Atom("a"), Atom("b")), var="x")
    assert parse("a R[<=y] b") == expand_derived("R<=", (Atom("a"), Atom("b")), var="y")
    assert parse("F[>y] a") == expand_derived("F>", (Atom("a"),), var="y")
    assert parse("G[>x] a") == expand_derived("G>", (Atom("a"),), var="x")


def test_parse_constants():
    assert is_tt(parse("tt"))
    assert is_ff(parse("ff"))
    assert is_tt(tt()) and is_ff(ff())
    assert not is_tt(ff()) and not is_ff(tt())


@pytest.mark.parametrize(
    "text",
    ["", "p &", "& p", "(p", "p)", "F[<=] p", "F[<=x p", "p q", "U p", "F[<=x@0] p"],
)
def test_parse_errors(text):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.position >= 0


def test_negate_involution_and_closure_size():
    rng = random.Random(402)
    pool = [parse(t) for t in FORMULA_TEXTS]
    pool += [
        random_formula(rng, rng.randint(1, 4), d=2, f_vars=("x",), g_vars=("y",))
        for _ in range(200)
    ]
    for phi in pool:
        neg = negate(phi)
        assert negate(neg) == phi
        assert len(closure(neg)) == len(closure(phi))


def test_negate_semantic_complement():
    rng = random.Random(403)
    for _ in range(300):
        phi = random_formula(rng, rng.randint(1, 3), f_vars=("x",), g_vars=("y",))
        trace = random_trace(rng)
        val = {"x": rng.randint(0, 5), "y": rng.randint(0, 5)}
        assert evaluate(trace, 0, val, phi) != evaluate(trace, 0, val, negate(phi))


def test_closure_frozen():
    phi = And(Atom("p"), Next(Atom("q")))
    assert closure(phi) == frozenset(
        [phi, Atom("p"), Next(Atom("q")), Atom("q")]
    )
    mc1 = parse("G (q -> F[<=x] p)")
    assert FLe("x", 1, Atom("p")) in closure(mc1)
    assert Atom("p") in closure(mc1)
    assert list(subformulas(phi))[0] == phi


def test_pool_formulas_small_and_well_formed():
    for text in FORMULA_TEXTS:
        phi = parse(text)
        require_well_formed(phi)
        assert size(phi) <= 8


def test_var_profile():
    profile = var_profile(parse("F[<=x] p & G[<=y] q"))
    assert profile.var_f == frozenset(["x"])
    assert profile.var_g == frozenset(["y"])
    assert profile.variables == frozenset(["x", "y"])
    shared = And(FLe("x", 1, Atom("p")), GLe("x", 1, Atom("q")))
    assert not var_profile(shared).well_formed
    with pytest.raises(FormulaError):
        require_well_formed(shared)


def test_atoms():
    assert atoms(parse("G (q -> F[<=x] p)")) == frozenset(["p", "q"])


def test_eliminate_parametric_always_shape():
    got = eliminate_parametric_always(GLe("y", 1, Atom("a")))
    kappa = Atom("kappa1")
    assert got == And(Atom("a"), Next(Release(kappa, Or(kappa, Atom("a")))))
    got2 = eliminate_parametric_always(GLe("y", 2, Atom("a")))
    kappa2 = Atom("kappa2")
    assert got2 == And(Atom("a"), Next(Release(kappa2, Or(kappa2, Atom("a")))))
    plain = parse("G (q -> F[<=x] p)")
    assert eliminate_parametric_always(plain) == plain


def test_eliminate_matches_zero_budget_semantics():
    # The rewrite must agree with the bounded-always operator when its
    # variable is fixed to zero, on every position of sampled traces.
    rng = random.Random(404)
    for _ in range(150):
        d = rng.choice((1, 2))
        coord = rng.randint(1, d)
        body = random_formula(rng, 1, d=d, f_vars=(), g_vars=())
        phi = GLe("y", coord, body)
        rewritten = eliminate_parametric_always(phi)
        trace = random_trace(rng, d=d)
        for pos in range(trace.n_slots + 1):
            want = evaluate(trace, pos, {"y": 0}, phi)
            got = evaluate(trace, pos, {}, rewritten)
            assert got == want, (pretty_print(phi), pos)


def test_relativize_shape_and_errors():
    got = relativize(parse("F[<=x] q"), 1)
    p1 = Atom("p@1")
    n1 = NegAtom("p@1")
    q = Atom("q")
    assert got == And(
        Or(n1, Until(p1, Until(n1, q))),
        Or(p1, Until(n1, Until(p1, q))),
    )
    plain = parse("p U q")
    assert relativize(plain, 1) == plain
    with pytest.raises(FormulaError):
        relativize(parse("G[<=y] p"), 1)
    with pytest.raises(FormulaError):
        relativize(And(Atom("p@1"), FLe("x", 1, Atom("q"))), 1)
    with pytest.raises(FormulaError):
        relativize(FLe("x", 2, Atom("q")), 1)  # coordinate out of range


def _colored(costs, flags, kappas):
    letters = []
    for c, flag, k in zip(costs, flags, kappas):
        props = set()
        if flag:
            props.add("p@1")
        if k:
            props.add("kappa1")
        letters.append(CostLetter(frozenset(props), (c,)))
    return CostTrace((), tuple(letters), 1)


def test_chi_semantics():
    chi = chi_formula(1)
    # infinitely many changepoints and infinite cost: both sides hold
    w = _colored([1, 1], [True, False], [True, True])
    assert evaluate(w, 0, {}, chi)
    # constant coloring but infinite cost: finitely many changepoints only
    w = _colored([1, 1], [True, True], [True, True])
    assert not evaluate(w, 0, {}, chi)
    # alternating coloring with zero cost: infinitely many changepoints
    w = _colored([0, 0], [True, False], [False, False])
    assert not evaluate(w, 0, {}, chi)
    # constant coloring and zero cost: both sides fail, so chi holds
    w = _colored([0, 0], [False, False], [False, False])
    assert evaluate(w, 0, {}, chi)


def test_simplify_constants():
    p = Atom("p")
    assert simplify_constants(Until(p, tt())) == tt()
    assert simplify_constants(And(tt(), p)) == p
    assert simplify_constants(Or(ff(), p)) == p
    assert simplify_constants(Or(tt(), p)) == tt()
    assert simplify_constants(And(ff(), p)) == ff()
    assert simplify_constants(Next(ff())) == ff()
    assert simplify_constants(FLe("x", 1, tt())) == tt()
    assert simplify_constants(Release(p, ff())) == ff()
    # the eventually/always encodings survive untouched
    assert simplify_constants(parse("F p")) == parse("F p")
    assert simplify_constants(parse("G p")) == parse("G p")


def test_expand_derived_errors():
    with pytest.raises(FormulaError):
        expand_derived("W", (Atom("p"),))


def test_strict_eventually_semantics():
    # F[>y] a: some position with accumulated cost strictly above the bound
    # satisfies a.  Direct positional check against the encoding.
    rng = random.Random(405)
    phi = parse("F[>y] a")
    for _ in range(120):
        trace = random_trace(rng, props=("a",), max_prefix=2, max_loop=3)
        y = rng.randint(0, 4)
        loop_cost = sum(
            trace.letter_at_slot(s).cost[0]
            for s in range(len(trace.prefix), trace.n_slots)
        )
        horizon = trace.n_slots + len(trace.loop) * (y + 2) + 1
        want = any(
            trace.segment_cost(0, j, 1) > y and "a" in trace.props_at(j)
            for j in range(horizon)
        )
        if loop_cost == 0 and not want:
            # costs stop growing: the scanned window is conclusive
            pass
        got = evaluate(trace, 0, {"y": y}, phi)
        assert got == want, (y, trace)
