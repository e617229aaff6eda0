"""Reference semantics of CLTLB(DL) on bounded traces, and brute-force search.

Nothing here looks at the encoder: formulae are evaluated directly on a
:class:`~cltlb.trace.Trace`.  On a lasso (``loop >= 1``) future operators
run over the infinite unrolling, folding instant ``j > k`` back to
``loop + (j - loop) mod (k - loop + 1)``; a single pass over the period is
enough because labels repeat.  On an acyclic trace ``U`` needs its witness
within ``k`` and ``R`` needs a releasing instant within ``k`` (the finite
path clause).  Arithmetic lookups are never folded.

Evaluation is three-valued internally (``None`` = undetermined) so that
:func:`enumerate_models` can prune partial assignments.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .formula import (
    ZERO,
    And,
    Atom,
    Constant,
    Formula,
    Next,
    Not,
    Or,
    Prop,
    Release,
    Since,
    Term,
    Trigger,
    Until,
    WeakYesterday,
    Yesterday,
    analyze,
    conj,
    next_n,
    subformulas,
)
from .trace import Trace

Tri = Optional[bool]
DEFAULT_BUDGET = 64


class OracleError(ValueError):
    pass


class BudgetExceeded(OracleError):
    pass


def _not(a: Tri) -> Tri:
    return None if a is None else not a


def _and(a: Tri, b: Tri) -> Tri:
    if a is False or b is False:
        return False
    if a is None or b is None:
        return None
    return True


def _or(a: Tri, b: Tri) -> Tri:
    if a is True or b is True:
        return True
    if a is None or b is None:
        return None
    return False


def _atom(a: Atom, i: int, interval: Callable[[str, int], tuple[int, int]]) -> Tri:
    def bounds(t: Term) -> tuple[int, int]:
        if t.var == ZERO:
            return 0, 0
        return interval(t.var, i + t.offset)

    if a.left == a.right:
        # x rel x + d  <=>  0 rel d
        l_lo = l_hi = 0
        r_lo = r_hi = 0
    else:
        l_lo, l_hi = bounds(a.left)
        r_lo, r_hi = bounds(a.right)
    r_lo += a.shift
    r_hi += a.shift
    rel = a.rel
    if rel in (">", ">="):
        # a > b  <=>  b < a
        l_lo, l_hi, r_lo, r_hi = r_lo, r_hi, l_lo, l_hi
        rel = "<" if rel == ">" else "<="
    if rel == "<":
        if l_hi < r_lo:
            return True
        if l_lo >= r_hi:
            return False
        return None
    if rel == "<=":
        if l_hi <= r_lo:
            return True
        if l_lo > r_hi:
            return False
        return None
    if l_lo == l_hi == r_lo == r_hi:
        return True
    if l_hi < r_lo or r_hi < l_lo:
        return False
    return None


def _tables(
    f: Formula,
    k: int,
    loop: int,
    prop: Callable[[str, int], Tri],
    interval: Callable[[str, int], tuple[int, int]],
) -> dict[Formula, list[Tri]]:
    instants = range(k + 1)

    def succ(i: int) -> Optional[int]:
        if i < k:
            return i + 1
        return loop if loop else None

    def future(i: int) -> list[int]:
        seq = list(range(i, k + 1))
        if loop and i > loop:
            seq.extend(range(loop, i))
        return seq

    tab: dict[Formula, list[Tri]] = {}
    for g in subformulas(f):
        if isinstance(g, Prop):
            row = [prop(g.name, i) for i in instants]
        elif isinstance(g, Constant):
            row = [g.value] * (k + 1)
        elif isinstance(g, Atom):
            row = [_atom(g, i, interval) for i in instants]
        elif isinstance(g, Not):
            row = [_not(v) for v in tab[g.arg]]
        elif isinstance(g, And):
            row = [_and(a, b) for a, b in zip(tab[g.left], tab[g.right])]
        elif isinstance(g, Or):
            row = [_or(a, b) for a, b in zip(tab[g.left], tab[g.right])]
        elif isinstance(g, Next):
            a = tab[g.arg]
            row = [False if succ(i) is None else a[succ(i)] for i in instants]
        elif isinstance(g, (Until, Release)):
            lhs, rhs = tab[g.left], tab[g.right]
            until = isinstance(g, Until)
            row = []
            for i in instants:
                # ψ never violated around the whole period: R holds forever
                acc: Tri = False if until or not loop else True
                for j in reversed(future(i)):
                    if until:
                        acc = _or(rhs[j], _and(lhs[j], acc))
                    else:
                        acc = _and(rhs[j], _or(lhs[j], acc))
                row.append(acc)
        elif isinstance(g, Yesterday):
            a = tab[g.arg]
            row = [False] + a[:-1]
        elif isinstance(g, WeakYesterday):
            a = tab[g.arg]
            row = [True] + a[:-1]
        elif isinstance(g, (Since, Trigger)):
            lhs, rhs = tab[g.left], tab[g.right]
            row = [rhs[0]]
            for i in range(1, k + 1):
                if isinstance(g, Since):
                    row.append(_or(rhs[i], _and(lhs[i], row[-1])))
                else:
                    row.append(_and(rhs[i], _or(lhs[i], row[-1])))
        else:
            raise TypeError(f"not a formula: {g!r}")
        tab[g] = row
    return tab


def _trace_lookups(trace: Trace):
    def prop(p: str, i: int) -> bool:
        try:
            return trace.props[p][i]
        except KeyError:
            raise OracleError(f"trace has no proposition {p!r}") from None

    def interval(x: str, t: int) -> tuple[int, int]:
        v = trace.vars.get(x, {}).get(t)
        if v is None:
            raise OracleError(f"trace has no value for {x!r} at instant {t}")
        return v, v

    return prop, interval


def eval_table(f: Formula, trace: Trace) -> dict[Formula, list[bool]]:
    """Truth value of every subformula of ``f`` at every instant ``0..k``."""
    prop, interval = _trace_lookups(trace)
    return _tables(f, trace.k, trace.loop, prop, interval)  # type: ignore[return-value]


def evaluate(f: Formula, trace: Trace, i: int = 0) -> bool:
    """Does ``trace`` satisfy ``f`` at instant ``i``?"""
    if not 0 <= i <= trace.k:
        raise OracleError(f"instant {i} outside [0, {trace.k}]")
    return bool(eval_table(f, trace)[f][i])


# ``eval`` under the name the rest of the toolchain uses
eval_formula = evaluate


@dataclass
class EnumResult:
    sat: bool
    trace: Optional[Trace]
    nodes: int

    @property
    def verdict(self) -> str:
        return "sat" if self.sat else "unsat-within-range"


def enumerate_models(
    f: Formula, k: int, lo: int, hi: int, budget: int = DEFAULT_BUDGET
) -> EnumResult:
    """Exhaustive search for a bounded model of ``f`` with integers in ``[lo, hi]``.

    Order (fixes the first witness): loop ascending; then the free
    propositional bits as a binary counter whose least significant bit is
    the first ``(proposition, instant)`` pair in lexicographic order; then
    integer assignments in lexicographic order of ``(instant, variable)``,
    values ascending.  With ``loop = i >= 1`` the bit for ``(p, k)`` is tied
    to ``(p, i - 1)``.  Branches whose partial assignment already falsifies
    ``f`` are skipped.
    """
    if k < 1:
        raise OracleError("bound must be >= 1")
    if lo > hi:
        raise OracleError("empty integer range")
    info = analyze(f)
    props = sorted(info.propositions)
    variables = sorted(info.variables)
    w_lo, w_hi = info.min_depth, k + info.max_depth
    slots = len(props) * (k + 2) + len(variables) * (w_hi - w_lo + 1)
    if slots > budget:
        raise BudgetExceeded(f"{slots} slots exceed the enumeration budget {budget}")

    atoms = [g for g in subformulas(f) if isinstance(g, Atom)]
    int_slots = [(t, x) for t in range(w_lo, w_hi + 1) for x in variables]
    nodes = 0

    for loop in range(k + 1):
        tied = {(p, k): (p, loop - 1) for p in props} if loop else {}
        free = [(p, i) for p in props for i in range(k + 1) if (p, i) not in tied]
        # most significant bit first
        bit_order = list(reversed(free))
        pv: dict[tuple[str, int], bool] = {}
        iv: dict[tuple[str, int], int] = {}

        def prop(p, i):
            key = tied.get((p, i), (p, i))
            return pv.get(key)

        def interval(x, t):
            v = iv.get((x, t))
            return (lo, hi) if v is None else (v, v)

        def root() -> Tri:
            return _tables(f, k, loop, prop, interval)[f][0]

        def open_slots() -> set[tuple[str, int]]:
            tab = _tables(f, k, loop, prop, interval)
            if tab[f][0] is not None:
                return set()
            out = set()
            for a in atoms:
                for i, v in enumerate(tab[a]):
                    if v is None:
                        out.update((t.var, i + t.offset) for t in a.terms if t.var != ZERO)
            return out

        def witness() -> Trace:
            pr = {p: [bool(prop(p, i)) for i in range(k + 1)] for p in props}
            vs = {x: [iv.get((x, t), lo) for t in range(w_lo, w_hi + 1)] for x in variables}
            return Trace.make(k, loop, pr, vs, w_lo)

        def search_ints(n: int) -> bool:
            nonlocal nodes
            nodes += 1
            val = root()
            if val is False:
                return False
            if val is True:
                return True
            # slots no undetermined atom reads cannot change the outcome
            pending = open_slots()
            while n < len(int_slots) and (int_slots[n][1], int_slots[n][0]) not in pending:
                n += 1
            if n == len(int_slots):
                return False
            t, x = int_slots[n]
            for v in range(lo, hi + 1):
                iv[(x, t)] = v
                if search_ints(n + 1):
                    return True
            del iv[(x, t)]
            return False

        def search_props(n: int) -> bool:
            nonlocal nodes
            nodes += 1
            val = root()
            if val is False:
                return False
            if n == len(bit_order) or val is True:
                return search_ints(0)
            key = bit_order[n]
            for b in (False, True):
                pv[key] = b
                if search_props(n + 1):
                    return True
            del pv[key]
            return False

        if search_props(0):
            return EnumResult(True, witness(), nodes)
    return EnumResult(False, None, nodes)


def range_constraints(f: Formula, k: int, lo: int, hi: int) -> Formula:
    """Atoms confining every variable of ``f`` to ``[lo, hi]`` on the whole
    window ``[min_depth, k + max_depth]``, stated with ``X``-prefixes so they
    hold at the right instants without requiring a loop."""
    info = analyze(f)
    parts = []
    for x in sorted(info.variables):
        for t in range(info.min_depth, k + info.max_depth + 1):
            i = min(max(t, 0), k)
            term = Term(x, t - i)
            box = And(Atom(term, ">=", Term(ZERO), lo), Atom(term, "<=", Term(ZERO), hi))
            parts.append(next_n(box, i))
    return conj(*parts)


def with_range(f: Formula, k: int, lo: int, hi: int) -> Formula:
    return conj(f, range_constraints(f, k, lo, hi))
