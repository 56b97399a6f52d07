"""Cost-trace lassos, the reference semantics evaluator, and colorings.

A cost-trace is an ultimately periodic word of (propositions, step-cost)
pairs; the cost vector attached to a letter is the cost of the step
*leaving* that position.  Step costs are tied to the kappa propositions:
coordinate i of a step is positive exactly when kappa_i labels the next
position (position 0 itself is unconstrained).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .formula import (
    COLOR_PREFIX,
    And,
    Atom,
    FLe,
    Formula,
    GLe,
    NegAtom,
    Next,
    Or,
    Release,
    Until,
    color_name,
    kappa_name,
    max_coord,
    var_profile,
)

Valuation = Mapping[str, int]


class TraceError(ValueError):
    """Malformed cost-trace or trace-file input."""


@dataclass(frozen=True)
class CostLetter:
    props: frozenset[str]
    cost: tuple[int, ...]


def letter(props: Iterable[str], *cost: int) -> CostLetter:
    return CostLetter(frozenset(props), tuple(cost))


@dataclass(frozen=True)
class CostTrace:
    """Lasso representation: finite prefix followed by a non-empty loop."""

    prefix: tuple[CostLetter, ...]
    loop: tuple[CostLetter, ...]
    d: int

    def __post_init__(self) -> None:
        if not self.loop:
            raise TraceError("loop must be non-empty")
        if self.d < 0:
            raise TraceError("dimension must be non-negative")
        for where, seq in (("prefix", self.prefix), ("loop", self.loop)):
            for idx, lt in enumerate(seq):
                if len(lt.cost) != self.d:
                    msg = f"{where} letter {idx}: cost arity {len(lt.cost)}, expected {self.d}"
                    raise TraceError(msg)
                if any(c < 0 for c in lt.cost):
                    msg = f"{where} letter {idx}: negative step cost"
                    raise TraceError(msg)
        for problem in kappa_violations(self):
            raise TraceError(problem)

    @classmethod
    def of(
        cls,
        prefix: Sequence[CostLetter],
        loop: Sequence[CostLetter],
        d: Optional[int] = None,
    ) -> "CostTrace":
        if d is None:
            pool = list(prefix) + list(loop)
            d = len(pool[0].cost) if pool else 0
        return cls(tuple(prefix), tuple(loop), d)

    @property
    def n_slots(self) -> int:
        return len(self.prefix) + len(self.loop)

    def slot(self, position: int) -> int:
        p = len(self.prefix)
        if position < p:
            return position
        return p + (position - p) % len(self.loop)

    def succ_slot(self, slot: int) -> int:
        nxt = slot + 1
        if nxt == self.n_slots:
            return len(self.prefix)
        return nxt

    def letter_at_slot(self, slot: int) -> CostLetter:
        p = len(self.prefix)
        if slot < p:
            return self.prefix[slot]
        return self.loop[slot - p]

    def letter(self, position: int) -> CostLetter:
        return self.letter_at_slot(self.slot(position))

    def props_at(self, position: int) -> frozenset[str]:
        return self.letter(position).props

    def step_cost(self, position: int, coord: int) -> int:
        """Coordinate `coord` (1-based) of the step leaving `position`."""
        return self.letter(position).cost[coord - 1]

    def segment_cost(self, start: int, end: int, coord: int) -> int:
        """Summed step cost over positions start..end-1; 0 when end <= start."""
        return sum(self.step_cost(n, coord) for n in range(start, end))

    def unroll(self, n: int) -> list[CostLetter]:
        return [self.letter(i) for i in range(n)]


def kappa_violations(trace: CostTrace) -> list[str]:
    """Cost/kappa consistency faults, empty when the trace is valid.

    Checking one full period past the prefix covers every consecutive
    pair of the infinite unrolling, including both loop seams.
    """
    problems = []
    for n in range(trace.n_slots):
        cost = trace.letter_at_slot(n).cost
        succ = trace.letter_at_slot(trace.succ_slot(n) if n + 1 == trace.n_slots else n + 1)
        for i in range(1, trace.d + 1):
            has_kappa = kappa_name(i) in succ.props
            if (cost[i - 1] > 0) != has_kappa:
                want = "positive" if has_kappa else "zero"
                problems.append(
                    f"step from position {n}: coordinate {i} cost must be {want} "
                    f"(kappa{i} {'present' if has_kappa else 'absent'} at the next position)"
                )
    return problems


# --- semantics ------------------------------------------------------------


class TraceEvaluator:
    """Reference evaluator over a lasso for a fixed valuation.

    Truth of any subformula at a position depends only on the position's
    slot, so results are memoized per (node, slot) and, for the budgeted
    operators, per (node, slot, spent) with the spent cost capped one
    past the bound.  Temporal operators walk the deterministic slot
    chain iteratively; a revisit closes the only reachable cycle, where
    least-fixpoint operators (U, F[<=]) default to false and
    greatest-fixpoint operators (R, G[<=]) default to true.
    """

    def __init__(self, trace: CostTrace, valuation: Valuation, strict: bool = False):
        self.trace = trace
        self.valuation = dict(valuation)
        self.strict = strict
        self._memo: dict = {}

    def _bound(self, var: str) -> int:
        if var in self.valuation:
            value = self.valuation[var]
            if value < 0:
                msg = f"negative bound for variable {var!r}"
                raise TraceError(msg)
            return value
        if self.strict:
            msg = f"unbound variable {var!r} in strict mode"
            raise TraceError(msg)
        return 0

    def holds(self, phi: Formula, position: int = 0) -> bool:
        coord = max_coord(phi)
        if coord > self.trace.d:
            msg = f"formula uses coordinate {coord}, trace has dimension {self.trace.d}"
            raise TraceError(msg)
        if self.strict:
            for var in var_profile(phi).variables:
                self._bound(var)
        return self._eval(phi, self.trace.slot(position))

    def _eval(self, phi: Formula, slot: int) -> bool:
        if isinstance(phi, Atom):
            return phi.name in self.trace.letter_at_slot(slot).props
        if isinstance(phi, NegAtom):
            return phi.name not in self.trace.letter_at_slot(slot).props
        if isinstance(phi, And):
            return self._eval(phi.left, slot) and self._eval(phi.right, slot)
        if isinstance(phi, Or):
            return self._eval(phi.left, slot) or self._eval(phi.right, slot)
        if isinstance(phi, Next):
            return self._eval(phi.child, self.trace.succ_slot(slot))
        if isinstance(phi, Until):
            return self._fixpoint_walk(phi, slot, default=False)
        if isinstance(phi, Release):
            return self._fixpoint_walk(phi, slot, default=True)
        if isinstance(phi, FLe):
            return self._budget_walk(phi, slot, default=False)
        if isinstance(phi, GLe):
            return self._budget_walk(phi, slot, default=True)
        msg = f"not a formula node: {phi!r}"
        raise TraceError(msg)

    def _fixpoint_walk(self, phi: Formula, slot: int, default: bool) -> bool:
        memo = self._memo
        chain: list[int] = []
        on_chain: set[int] = set()
        cur = slot
        while True:
            key = (phi, cur)
            if key in memo:
                value = memo[key]
                break
            if cur in on_chain:
                value = default
                break
            if not default:
                # Until: right now, or (left now and until at successor).
                if self._eval(phi.right, cur):
                    memo[key] = value = True
                    break
                if not self._eval(phi.left, cur):
                    memo[key] = value = False
                    break
            else:
                # Release: right always required until left discharges it.
                if not self._eval(phi.right, cur):
                    memo[key] = value = False
                    break
                if self._eval(phi.left, cur):
                    memo[key] = value = True
                    break
            chain.append(cur)
            on_chain.add(cur)
            cur = self.trace.succ_slot(cur)
        for visited in chain:
            memo[(phi, visited)] = value
        return value

    def _budget_walk(self, phi: Formula, slot: int, default: bool) -> bool:
        bound = self._bound(phi.var)
        coord = phi.coord
        memo = self._memo
        chain: list[tuple[int, int]] = []
        on_chain: set[tuple[int, int]] = set()
        cur = (slot, 0)
        while True:
            key = (phi, cur)
            if key in memo:
                value = memo[key]
                break
            if cur in on_chain:
                value = default
                break
            here, spent = cur
            if spent > bound:
                # Window exhausted: nothing left to find, nothing left to check.
                memo[key] = value = default
                break
            child = self._eval(phi.child, here)
            if not default and child:
                memo[key] = value = True
                break
            if default and not child:
                memo[key] = value = False
                break
            chain.append(cur)
            on_chain.add(cur)
            spent_next = min(spent + self.trace.letter_at_slot(here).cost[coord - 1], bound + 1)
            cur = (self.trace.succ_slot(here), spent_next)
        for visited in chain:
            memo[(phi, visited)] = value
        return value


def evaluate(
    trace: CostTrace,
    position: int,
    valuation: Valuation,
    phi: Formula,
    strict: bool = False,
) -> bool:
    """Does the trace satisfy the formula at the position, under the valuation?"""
    return TraceEvaluator(trace, valuation, strict=strict).holds(phi, position)


# --- colorings ------------------------------------------------------------


@dataclass(frozen=True)
class Changepoints:
    """Color-change positions of a coloring, finitely represented.

    `initial` lists every changepoint at position <= prefix + period.
    `repeating` lists the positions q in that window, q > prefix, that
    recur at q + k*period for all k; empty means finitely many overall.
    """

    initial: tuple[int, ...]
    repeating: tuple[int, ...]
    period: int

    @property
    def finite(self) -> bool:
        return not self.repeating

    @property
    def tail_start(self) -> Optional[int]:
        return max(self.initial) if self.finite else None

    def up_to(self, horizon: int) -> list[int]:
        """All changepoints <= horizon, in order."""
        points = sorted(set(self.initial))
        if self.repeating:
            base = list(self.repeating)
            bump = self.period
            while True:
                fresh = [q + bump for q in base if q + bump <= horizon]
                if not fresh:
                    break
                points.extend(fresh)
                bump += self.period
        return sorted(set(q for q in points if q <= horizon))


def _color_holds(trace: CostTrace, position: int, coord: int) -> bool:
    return color_name(coord) in trace.props_at(position)


def changepoints(trace: CostTrace, coord: int = 1) -> Changepoints:
    """Changepoints of the coordinate's coloring proposition.

    Position 0 always counts.  Past position prefix+1 the letters repeat
    with the loop period, so changepoints do too.
    """
    p, ell = len(trace.prefix), len(trace.loop)
    window = p + ell
    initial = [0]
    for q in range(1, window + 1):
        if _color_holds(trace, q, coord) != _color_holds(trace, q - 1, coord):
            initial.append(q)
    repeating = tuple(q for q in initial if q > p)
    return Changepoints(tuple(initial), repeating, ell)


def _completed_blocks(
    trace: CostTrace, coord: int
) -> tuple[list[tuple[int, int]], Optional[int]]:
    """Completed blocks as (start, next changepoint) pairs, plus tail start.

    With infinitely many changepoints the blocks repeat with the loop
    period; blocks starting within prefix + period (collected one period
    further out for completeness) cover every block cost that occurs.
    """
    info = changepoints(trace, coord)
    p, ell = len(trace.prefix), len(trace.loop)
    if info.finite:
        points = list(info.initial)
        blocks = list(zip(points, points[1:]))
        return blocks, info.tail_start
    horizon = p + 2 * ell + 1
    points = info.up_to(horizon)
    blocks = []
    for a, b in zip(points, points[1:]):
        if a <= p + ell:
            blocks.append((a, b))
    return blocks, None


def _block_cost(trace: CostTrace, block: tuple[int, int], coord: int) -> int:
    """A block's cost runs through the step entering the next changepoint."""
    start, end = block
    return trace.segment_cost(start, end, coord)


def _tail_cost(trace: CostTrace, tail_start: int, coord: int) -> Optional[int]:
    """Total remaining cost from the tail; None when it is infinite."""
    p, ell = len(trace.prefix), len(trace.loop)
    loop_cost = sum(lt.cost[coord - 1] for lt in trace.loop)
    if loop_cost > 0:
        return None
    return trace.segment_cost(tail_start, p + ell, coord)


def check_bounded(trace: CostTrace, k: int, coord: int = 1) -> bool:
    """Every completed block and the tail cost at most k.

    A block's cost is accumulated from its first position through the
    step entering the next changepoint; the tail, present when there are
    finitely many changepoints, must have finite cost at most k.
    """
    blocks, tail_start = _completed_blocks(trace, coord)
    if any(_block_cost(trace, block, coord) > k for block in blocks):
        return False
    if tail_start is not None:
        tail = _tail_cost(trace, tail_start, coord)
        if tail is None or tail > k:
            return False
    return True


def check_spaced(trace: CostTrace, k: int, coord: int = 1) -> bool:
    """Every completed block costs at least k; the tail is exempt."""
    blocks, _ = _completed_blocks(trace, coord)
    return all(_block_cost(trace, block, coord) >= k for block in blocks)


def strip_colors(trace: CostTrace) -> CostTrace:
    """Remove all coloring propositions, keeping letters and costs."""
    def bare(lt: CostLetter) -> CostLetter:
        return CostLetter(
            frozenset(p for p in lt.props if not p.startswith(COLOR_PREFIX)),
            lt.cost,
        )

    return CostTrace(
        tuple(bare(lt) for lt in trace.prefix),
        tuple(bare(lt) for lt in trace.loop),
        trace.d,
    )


def is_coloring_of(colored: CostTrace, base: CostTrace) -> bool:
    """Does `colored` equal `base` once coloring propositions are removed?

    The two lassos may carve up the same infinite word differently, so
    compare position-wise across a full joint period.
    """
    if colored.d != base.d:
        return False
    horizon = (
        max(len(colored.prefix), len(base.prefix))
        + 2 * math.lcm(len(colored.loop), len(base.loop))
    )
    stripped = strip_colors(colored)
    for n in range(horizon):
        a, b = stripped.letter(n), base.letter(n)
        if a.props != b.props or a.cost != b.cost:
            return False
    return True


def make_spaced_coloring(trace: CostTrace, k: int) -> CostTrace:
    """Add coloring propositions so every completed block costs >= k.

    Greedy per coordinate: flip the color as soon as the running block
    has accumulated cost k.  If the remaining total cost is finite the
    color eventually freezes, leaving a single exempt tail.  The walk
    state is finite, so the result is again a lasso.
    """
    if k < 0:
        raise TraceError("spacing bound must be non-negative")
    d = trace.d
    colors = [False] * d
    acc = [0] * d
    seen: dict[tuple, int] = {}
    letters: list[CostLetter] = []
    position = 0
    while True:
        slot = trace.slot(position)
        state = (slot, tuple(acc), tuple(colors))
        if state in seen:
            start = seen[state]
            return CostTrace(tuple(letters[:start]), tuple(letters[start:]), d)
        seen[state] = position
        base = trace.letter_at_slot(slot)
        props = set(base.props)
        for i in range(d):
            if colors[i]:
                props.add(color_name(i + 1))
        letters.append(CostLetter(frozenset(props), base.cost))
        for i in range(d):
            if acc[i] >= k:
                # Completed block reached the spacing bound: change color.
                # The crossing step only adds to the finished block's cost.
                colors[i] = not colors[i]
                acc[i] = 0
            else:
                acc[i] = min(acc[i] + base.cost[i], k)
        position += 1


# --- trace files ----------------------------------------------------------


def parse_trace(text: str) -> CostTrace:
    """Load the line-oriented trace format.

    ``dim D`` first, then a ``prefix:`` section and a ``loop:`` section,
    one letter per line: ``{p q kappa1} -> 3 0``.
    """
    d: Optional[int] = None
    section: Optional[str] = None
    prefix: list[CostLetter] = []
    loop: list[CostLetter] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("dim"):
            if d is not None:
                raise TraceError(f"line {lineno}: duplicate dim line")
            parts = line.split()
            if len(parts) != 2 or not parts[1].isdigit():
                raise TraceError(f"line {lineno}: expected 'dim D'")
            d = int(parts[1])
            continue
        if line == "prefix:":
            section = "prefix"
            continue
        if line == "loop:":
            section = "loop"
            continue
        if d is None:
            raise TraceError(f"line {lineno}: 'dim D' must come first")
        if section is None:
            raise TraceError(f"line {lineno}: letter outside prefix:/loop: section")
        (prefix if section == "prefix" else loop).append(_parse_letter(line, lineno, d))
    if d is None:
        raise TraceError("missing 'dim D' line")
    if not loop:
        raise TraceError("loop section is empty")
    return CostTrace(tuple(prefix), tuple(loop), d)


def _parse_letter(line: str, lineno: int, d: int) -> CostLetter:
    if not line.startswith("{"):
        raise TraceError(f"line {lineno}: letter must start with '{{'")
    close = line.find("}")
    if close < 0:
        raise TraceError(f"line {lineno}: unterminated proposition set")
    props = frozenset(line[1:close].split())
    rest = line[close + 1 :].strip()
    if not rest.startswith("->"):
        raise TraceError(f"line {lineno}: expected '->' after proposition set")
    fields = rest[2:].split()
    if len(fields) != d:
        raise TraceError(f"line {lineno}: expected {d} cost component(s), got {len(fields)}")
    try:
        cost = tuple(int(f) for f in fields)
    except ValueError:
        raise TraceError(f"line {lineno}: costs must be integers") from None
    return CostLetter(props, cost)


def format_trace(trace: CostTrace) -> str:
    lines = [f"dim {trace.d}", "prefix:"]
    lines.extend(_format_letter(lt) for lt in trace.prefix)
    lines.append("loop:")
    lines.extend(_format_letter(lt) for lt in trace.loop)
    return "\n".join(lines) + "\n"


def _format_letter(lt: CostLetter) -> str:
    props = " ".join(sorted(lt.props))
    cost = " ".join(str(c) for c in lt.cost)
    return f"{{{props}}} -> {cost}".rstrip()
