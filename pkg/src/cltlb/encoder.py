"""Bounded encoding of CLTLB(DL) into quantifier-free difference logic with
uninterpreted functions and predicates.

Assertions are plain s-expressions built from tuples, strings and ints::

    ("=>", ("=", "loop", 1), ("=", ("P0", 0), ("P0", 1)))

A tuple whose head is in :data:`OPERATORS` is a connective or comparison;
any other tuple ``(name, arg)`` applies a declared unary function or
predicate.  Bare strings are integer constants, Python ``bool`` is a
Boolean literal and ``int`` an integer literal.

Every row is stated for instants ``0..k``; instant ``k+1`` is tied to the
loop position by the last-state constraints only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

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
    is_pnf,
    subformulas,
)

SExpr = Union[tuple, str, int, bool]

OPERATORS = frozenset(
    {"and", "or", "not", "=>", "=", "<", "<=", ">", ">=", "+", "-", "ite", "distinct"}
)

LOOP = "loop"


class EncodingError(ValueError):
    pass


@dataclass
class ConstraintSystem:
    """Solver-agnostic constraint system."""

    int_consts: list[str] = field(default_factory=list)
    int_funs: dict[str, tuple[int, int]] = field(default_factory=dict)
    predicates: list[str] = field(default_factory=list)
    assertions: list[SExpr] = field(default_factory=list)
    pred_range: tuple[int, int] = (0, 0)

    def check(self) -> None:
        """Raise :class:`EncodingError` if an assertion uses an undeclared
        symbol or applies a symbol to a literal outside its window."""
        consts = set(self.int_consts)
        preds = set(self.predicates)
        for a in self.assertions:
            for node in _walk(a):
                if isinstance(node, str) and node not in consts:
                    raise EncodingError(f"undeclared constant {node!r}")
                if isinstance(node, tuple) and node[0] not in OPERATORS:
                    name, arg = node
                    if name in self.int_funs:
                        lo, hi = self.int_funs[name]
                    elif name in preds:
                        lo, hi = self.pred_range
                    else:
                        raise EncodingError(f"undeclared function {name!r}")
                    if isinstance(arg, int) and not lo <= arg <= hi:
                        raise EncodingError(f"{name} applied at {arg}, outside [{lo}, {hi}]")


def _walk(e: SExpr):
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, tuple):
            yield node
            stack.extend(node[1:])
        elif isinstance(node, str):
            yield node


@dataclass
class EncodingMeta:
    k: int
    formula: Formula
    predicate_of: dict[Formula, str]
    fun_of: dict[Term, str]
    eventuality_names: dict[Formula, str]
    window: tuple[int, int]
    loop_name: str = LOOP

    @property
    def props(self) -> dict[str, str]:
        return {g.name: p for g, p in self.predicate_of.items() if isinstance(g, Prop)}

    @property
    def base_funs(self) -> dict[str, str]:
        return {t.var: f for t, f in self.fun_of.items() if t.offset == 0}


def fun_name(t: Term) -> str:
    return f"F{t.var}_o{t.offset}"


def sat_baseline_vars(k: int, m: int, n: int) -> int:
    """Fresh propositional variables of the Boolean (SAT) encoding, for comparison."""
    return (2 * k + 3) + (k + 2) * m + (k + 1) * n


class Encoder:
    """Builds the components of the encoding for a PNF formula and bound ``k``."""

    def __init__(self, f: Formula, k: int):
        if k < 1:
            raise EncodingError(f"bound must be >= 1, got {k}")
        if not is_pnf(f):
            raise EncodingError("formula is not in positive normal form")
        self.f = f
        self.k = k
        self.info = analyze(f)
        self.subs = subformulas(f)
        self.pred = {g: f"P{i}" for i, g in enumerate(self.subs)}
        self.ev = {g: f"J{self.subs.index(g)}" for g in self.subs if isinstance(g, (Until, Release))}
        self.window = (self.info.min_depth, k + self.info.max_depth)
        self.funs = self._function_windows()

    # -- symbols ----------------------------------------------------------

    def _function_windows(self) -> dict[Term, tuple[int, int]]:
        lo_d, hi_d = self.info.min_depth, self.info.max_depth
        k = self.k
        offsets: dict[str, set[int]] = {}
        for g in self.subs:
            if isinstance(g, Atom):
                for t in g.terms:
                    if t.var != ZERO:
                        offsets.setdefault(t.var, {0}).add(t.offset)
        windows = {}
        for var in sorted(offsets):
            used = offsets[var]
            for d in range(min(used), max(used) + 1):
                if d == 0:
                    windows[Term(var, 0)] = (lo_d, k + hi_d)
                elif d > 0:
                    windows[Term(var, d)] = (0, k + hi_d - d)
                else:
                    windows[Term(var, d)] = (lo_d - d, k)
        return windows

    def meta(self) -> EncodingMeta:
        return EncodingMeta(
            k=self.k,
            formula=self.f,
            predicate_of=dict(self.pred),
            fun_of={t: fun_name(t) for t in self.funs},
            eventuality_names=dict(self.ev),
            window=self.window,
        )

    def app(self, g: Formula, i) -> SExpr:
        return (self.pred[g], i)

    def term_value(self, t: Term, i: int) -> SExpr:
        if t.var == ZERO:
            return 0
        return (fun_name(t), i)

    # -- components -------------------------------------------------------

    def time(self) -> list[SExpr]:
        k = self.k
        out: list[SExpr] = [("<=", 0, LOOP), ("<=", LOOP, k)]
        for g in self.subs:
            if isinstance(g, Prop):
                p = self.pred[g]
                for i in range(1, k + 1):
                    out.append(("=>", ("=", LOOP, i), ("=", (p, i - 1), (p, k))))
        return out

    def arithmetic(self) -> list[SExpr]:
        out: list[SExpr] = []
        for t, (lo, hi) in self.funs.items():
            if t.offset == 0:
                continue
            step = 1 if t.offset > 0 else -1
            inner = fun_name(Term(t.var, t.offset - step))
            name = fun_name(t)
            for i in range(lo, hi + 1):
                out.append(("=", (name, i), (inner, i + step)))
        return out

    def _atom(self, a: Atom, i: int) -> SExpr:
        lhs = self.term_value(a.left, i)
        rhs = self.term_value(a.right, i)
        if a.shift:
            rhs = a.shift if rhs == 0 else ("+", rhs, a.shift)
        return (a.rel, lhs, rhs)

    def propositional(self) -> list[SExpr]:
        out: list[SExpr] = []
        for g in self.subs:
            for i in range(self.k + 1):
                p = self.app(g, i)
                if isinstance(g, Constant):
                    out.append(p if g.value else ("not", p))
                elif isinstance(g, Atom):
                    out.append(("=", p, self._atom(g, i)))
                elif isinstance(g, Not):
                    out.append(("=", p, ("not", self.app(g.arg, i))))
                elif isinstance(g, And):
                    out.append(("=", p, ("and", self.app(g.left, i), self.app(g.right, i))))
                elif isinstance(g, Or):
                    out.append(("=", p, ("or", self.app(g.left, i), self.app(g.right, i))))
        return out

    def temporal(self) -> list[SExpr]:
        out: list[SExpr] = []
        k = self.k
        for g in self.subs:
            if isinstance(g, Next):
                for i in range(k + 1):
                    out.append(("=", self.app(g, i), self.app(g.arg, i + 1)))
            elif isinstance(g, Until):
                for i in range(k + 1):
                    step = ("and", self.app(g.left, i), self.app(g, i + 1))
                    out.append(("=", self.app(g, i), ("or", self.app(g.right, i), step)))
            elif isinstance(g, Release):
                for i in range(k + 1):
                    step = ("or", self.app(g.left, i), self.app(g, i + 1))
                    out.append(("=", self.app(g, i), ("and", self.app(g.right, i), step)))
            elif isinstance(g, Yesterday):
                out.append(("not", self.app(g, 0)))
                for i in range(1, k + 1):
                    out.append(("=", self.app(g, i), self.app(g.arg, i - 1)))
            elif isinstance(g, WeakYesterday):
                out.append(self.app(g, 0))
                for i in range(1, k + 1):
                    out.append(("=", self.app(g, i), self.app(g.arg, i - 1)))
            elif isinstance(g, Since):
                out.append(("=", self.app(g, 0), self.app(g.right, 0)))
                for i in range(1, k + 1):
                    step = ("and", self.app(g.left, i), self.app(g, i - 1))
                    out.append(("=", self.app(g, i), ("or", self.app(g.right, i), step)))
            elif isinstance(g, Trigger):
                out.append(("=", self.app(g, 0), self.app(g.right, 0)))
                for i in range(1, k + 1):
                    step = ("or", self.app(g.left, i), self.app(g, i - 1))
                    out.append(("=", self.app(g, i), ("and", self.app(g.right, i), step)))
        return out

    def last_state(self) -> list[SExpr]:
        out: list[SExpr] = []
        k = self.k
        for g in self.subs:
            last = self.app(g, k + 1)
            for i in range(1, k + 1):
                out.append(("=>", ("=", LOOP, i), ("=", last, self.app(g, i))))
            out.append(("=>", ("=", LOOP, 0), ("not", last)))
        return out

    def eventualities(self) -> list[SExpr]:
        out: list[SExpr] = []
        k = self.k
        for g, j in self.ev.items():
            in_range = ("and", ("<=", LOOP, j), ("<=", j, k))
            at_k = self.app(g, k)
            if isinstance(g, Until):
                body = ("=>", at_k, ("and", in_range, self.app(g.right, j)))
            else:
                body = ("=>", ("not", at_k), ("and", in_range, ("not", self.app(g.right, j))))
            out.append(("=>", (">=", LOOP, 1), body))
        return out

    def system(self) -> ConstraintSystem:
        return ConstraintSystem(
            int_consts=[LOOP, *self.ev.values()],
            int_funs={fun_name(t): w for t, w in self.funs.items()},
            predicates=[self.pred[g] for g in self.subs],
            pred_range=(0, self.k + 1),
        )


def encode_time(k: int, props: Iterable[str] = ()) -> list[SExpr]:
    """Loop selector constraints for ``k`` and the given propositions."""
    f = conj(*(Prop(p) for p in props)) if props else Constant(True)
    return Encoder(f, k).time()


def encode_att(f: Formula, k: int) -> list[SExpr]:
    return Encoder(f, k).arithmetic()


def encode_predicates(f: Formula, k: int) -> list[SExpr]:
    return Encoder(f, k).propositional()


def encode_temporal(f: Formula, k: int) -> list[SExpr]:
    return Encoder(f, k).temporal()


def encode_last_state(f: Formula, k: int) -> list[SExpr]:
    return Encoder(f, k).last_state()


def encode_eventualities(f: Formula, k: int) -> list[SExpr]:
    return Encoder(f, k).eventualities()


def assemble(
    f: Formula,
    k: int,
    *,
    pin_init: Mapping[str, Mapping[int, int]] | None = None,
    pin_props: Mapping[str, Mapping[int, bool]] | None = None,
    pin_loop: int | None = None,
) -> tuple[ConstraintSystem, EncodingMeta]:
    """Full encoding of ``f`` at bound ``k``.

    ``pin_init`` fixes variable values at negative instants (the
    initialization function); ``pin_props`` fixes proposition values
    (model-checking mode); ``pin_loop`` fixes the loop position.
    """
    enc = Encoder(f, k)
    cs = enc.system()
    meta = enc.meta()
    cs.assertions = [
        *enc.time(),
        *enc.arithmetic(),
        *enc.propositional(),
        *enc.temporal(),
        *enc.last_state(),
        *enc.eventualities(),
        enc.app(f, 0),
    ]
    base = meta.base_funs
    for var, values in (pin_init or {}).items():
        if var not in base:
            raise EncodingError(f"cannot pin unknown variable {var!r}")
        lo = enc.window[0]
        for t, v in values.items():
            if not lo <= t < 0:
                raise EncodingError(f"initialization instant {t} outside [{lo}, -1]")
            cs.assertions.append(("=", (base[var], t), v))
    props = meta.props
    for p, values in (pin_props or {}).items():
        if p not in props:
            raise EncodingError(f"cannot pin unknown proposition {p!r}")
        for t, v in values.items():
            if not 0 <= t <= k:
                raise EncodingError(f"instant {t} outside [0, {k}]")
            cs.assertions.append((props[p], t) if v else ("not", (props[p], t)))
    if pin_loop is not None:
        cs.assertions.append(("=", LOOP, pin_loop))
    cs.check()
    return cs, meta
