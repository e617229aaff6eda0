"""Runtime substitutability of conversational services.

An *expected* service (the one a client was written against) and an
*actual* service are given as labelled transition systems whose operations
carry typed input and output parameters.  The question is whether a given
expected operation sequence can be served by some actual operation
sequence.  Data flow is tracked with two families of integer counters:

* ``seen_t`` grows when the client hands a ``t`` to an expected operation
  and shrinks when an actual operation consumes one; an actual operation may
  only fire if none of its input counters goes negative;
* ``needed_t`` grows when the client expects a ``t`` back and shrinks when
  an actual operation returns one; at the end every ``needed`` must be
  ``<= 0``.

The whole problem becomes one CLTLB(DL) formula, bounded-checked by the
SMT pipeline; a model is rendered as a mapping script.
"""
from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import jsonschema

from .formula import (
    FALSE,
    TRUE,
    Atom,
    Formula,
    Not,
    Prop,
    Term,
    ZERO_TERM,
    conj,
    disj,
    eventually,
    historically,
    negate_atom,
    to_pnf,
)
from .smt import SolverConfig, SolverError, check_formula
from .trace import Trace

STRATEGIES = ("store", "discard")
IDLE = "None"


class ModelError(ValueError):
    """Malformed service model."""


class ProblemError(ValueError):
    """The substitutability question itself is ill-posed."""


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OperationSig:
    name: str
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.name}({', '.join(self.inputs)}): {', '.join(self.outputs)}"


@dataclass(frozen=True)
class Transition:
    source: str
    op: OperationSig
    target: str


@dataclass
class ServiceLTS:
    name: str
    states: list[str]
    initial: str
    transitions: list[Transition] = field(default_factory=list)

    def __post_init__(self):
        if len(set(self.states)) != len(self.states):
            dup = sorted({s for s in self.states if self.states.count(s) > 1})
            raise ModelError(f"{self.name}: duplicate state names {dup}")
        known = set(self.states)
        if self.initial not in known:
            raise ModelError(f"{self.name}: initial state {self.initial!r} is not declared")
        seen = set()
        for tr in self.transitions:
            for s in (tr.source, tr.target):
                if s not in known:
                    raise ModelError(f"{self.name}: transition {tr.op.name} uses undeclared state {s!r}")
            key = (tr.source, tr.op.name)
            if key in seen:
                raise ModelError(f"{self.name}: two transitions for {tr.op.name} from {tr.source!r}")
            seen.add(key)

    def index(self, state: str) -> int:
        return self.states.index(state)

    @property
    def operations(self) -> list[str]:
        return sorted({tr.op.name for tr in self.transitions})

    def step(self, state: str, op: str) -> Optional[Transition]:
        for tr in self.transitions:
            if tr.source == state and tr.op.name == op:
                return tr
        return None

    def run(self, ops: Sequence[str]) -> list[Transition]:
        """Transitions taken by ``ops`` from the initial state."""
        state, path = self.initial, []
        for op in ops:
            tr = self.step(state, op)
            if tr is None:
                if op not in self.operations:
                    raise ProblemError(f"{self.name} has no operation {op!r}")
                raise ProblemError(f"{op!r} is not enabled in state {state!r} of {self.name}")
            path.append(tr)
            state = tr.target
        return path

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "states": list(self.states),
            "initial": self.initial,
            "transitions": [
                {
                    "from": tr.source,
                    "op": tr.op.name,
                    "inputs": list(tr.op.inputs),
                    "outputs": list(tr.op.outputs),
                    "to": tr.target,
                }
                for tr in self.transitions
            ],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ServiceLTS":
        trs = [
            Transition(t["from"], OperationSig(t["op"], tuple(t.get("inputs", ())), tuple(t.get("outputs", ()))), t["to"])
            for t in d.get("transitions", ())
        ]
        return cls(d["name"], list(d["states"]), d["initial"], trs)


@dataclass(frozen=True)
class CompatibilityRelation:
    state_pairs: frozenset[tuple[str, str]]

    @classmethod
    def of(cls, pairs: Iterable[Sequence[str]]) -> "CompatibilityRelation":
        return cls(frozenset((a, b) for a, b in pairs))

    def check(self, expected: ServiceLTS, actual: ServiceLTS) -> None:
        for e, a in sorted(self.state_pairs):
            if e not in expected.states:
                raise ModelError(f"compatibility refers to unknown expected state {e!r}")
            if a not in actual.states:
                raise ModelError(f"compatibility refers to unknown actual state {a!r}")

    def __contains__(self, pair) -> bool:
        return tuple(pair) in self.state_pairs


@dataclass
class Services:
    expected: ServiceLTS
    actual: ServiceLTS
    compat: CompatibilityRelation

    def __iter__(self):
        return iter((self.expected, self.actual, self.compat))

    def to_dict(self) -> dict:
        return {
            "expected": self.expected.to_dict(),
            "actual": self.actual.to_dict(),
            "compatibility": {"states": [list(p) for p in sorted(self.compat.state_pairs)]},
        }


def service_schema() -> dict:
    text = resources.files("cltlb").joinpath("data/service-model.schema.json").read_text()
    return json.loads(text)


def load_services(doc: str | Path | Mapping) -> Services:
    """Read a service model (path, JSON text or already-parsed mapping)."""
    if isinstance(doc, Mapping):
        data = doc
    else:
        text = str(doc)
        if not text.lstrip().startswith("{"):
            text = Path(doc).read_text()
        data = json.loads(text)
    try:
        jsonschema.validate(data, service_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise ModelError(f"schema violation at {where}: {exc.message}") from None
    expected = ServiceLTS.from_dict(data["expected"])
    actual = ServiceLTS.from_dict(data["actual"])
    compat = CompatibilityRelation.of(data["compatibility"]["states"])
    compat.check(expected, actual)
    return Services(expected, actual, compat)


def case_study_path() -> Path:
    return Path(str(resources.files("cltlb").joinpath("data/lyrics.json")))


def discard_counterexample_path() -> Path:
    return Path(str(resources.files("cltlb").joinpath("data/discard-counterexample.json")))


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------


def _ident(s: str) -> str:
    return "".join(c if c.isalnum() or c == "_" else "_" for c in s)


@dataclass
class Vocabulary:
    """Names of the logic symbols used by one compiled problem."""

    expected: ServiceLTS
    actual: ServiceLTS
    input_types: list[str]
    output_types: list[str]

    st_e: str = "st_exp"
    st_a: str = "st_act"
    pos: str = "pos"
    acts: str = "acts"

    def op_e(self, op: str) -> str:
        return "e_" + _ident(op)

    def op_a(self, op: str) -> str:
        return "a_" + _ident(op)

    def seen(self, t: str) -> str:
        return "seen_" + _ident(t)

    def needed(self, t: str) -> str:
        return "needed_" + _ident(t)

    def mid(self, counter: str) -> str:
        return "mid_" + counter

    @property
    def counters(self) -> list[str]:
        return [self.seen(t) for t in self.input_types] + [self.needed(t) for t in self.output_types]


def _vocabulary(expected: ServiceLTS, actual: ServiceLTS) -> Vocabulary:
    ins, outs = set(), set()
    for tr in expected.transitions + actual.transitions:
        ins.update(tr.op.inputs)
        outs.update(tr.op.outputs)
    return Vocabulary(expected, actual, sorted(ins), sorted(outs))


def _eq(var: str, value: int, offset: int = 0) -> Atom:
    return Atom(Term(var, offset), "=", ZERO_TERM, value)


def _next_is(var: str, base: str, delta: int) -> Atom:
    """X var = base + delta"""
    return Atom(Term(var, 1), "=", Term(base), delta)


def _implies(a: Formula, b: Formula) -> Formula:
    return disj(_neg(a), b)


def _neg(a: Formula) -> Formula:
    if isinstance(a, Prop):
        return Not(a)
    if isinstance(a, Atom):
        return negate_atom(a)
    return to_pnf(Not(a))


def _exactly_one(props: list[Prop]) -> Formula:
    at_least = disj(*props)
    at_most = [disj(Not(p), Not(q)) for i, p in enumerate(props) for q in props[i + 1:]]
    return conj(at_least, *at_most)


def _service_rules(svc: ServiceLTS, st: str, prop_of, idle: Prop) -> list[Formula]:
    """Exactly one operation (or idle) per instant; state moves along a transition."""
    rules = [_exactly_one([idle] + [Prop(prop_of(o)) for o in svc.operations])]
    rules.append(_implies(idle, _next_is(st, st, 0)))
    for op in svc.operations:
        options = [
            conj(_eq(st, svc.index(tr.source)), _eq(st, svc.index(tr.target), 1))
            for tr in svc.transitions
            if tr.op.name == op
        ]
        rules.append(_implies(Prop(prop_of(op)), disj(*options)))
    return rules


def _fire(svc: ServiceLTS, st: str, prop_of, tr: Transition) -> Formula:
    return conj(Prop(prop_of(tr.op.name)), _eq(st, svc.index(tr.source)))


def compile_problem(
    expected_seq: Sequence[str],
    services: Services,
    strategy: str = "store",
    max_actual: Optional[int] = None,
) -> tuple[Formula, Vocabulary]:
    """The CLTLB(DL) formula whose bounded models are mapping scripts.

    Shape: ``init & F(goal & H(rules))``.  Rules hold at every instant up
    to the goal; the goal instant itself idles both services, so counters
    there are final.  Counter updates go through ``mid_c`` (value after the
    expected operation, before the actual one) to stay within difference
    logic when both services move in the same instant.
    """
    if strategy not in STRATEGIES:
        raise ProblemError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
    expected, actual, compat = services
    expected_path = expected.run(expected_seq)
    v = _vocabulary(expected, actual)
    e_idle, a_idle = Prop(v.op_e(IDLE)), Prop(v.op_a(IDLE))
    if IDLE in expected.operations or IDLE in actual.operations:
        raise ModelError(f"operation name {IDLE!r} is reserved for idling")

    init = conj(
        _eq(v.st_e, expected.index(expected.initial)),
        _eq(v.st_a, actual.index(actual.initial)),
        _eq(v.pos, 0),
        _eq(v.acts, 0),
        *(_eq(c, 0) for c in v.counters),
    )

    rules: list[Formula] = []
    rules += _service_rules(expected, v.st_e, v.op_e, e_idle)
    rules += _service_rules(actual, v.st_a, v.op_a, a_idle)

    # the expected sequence, in order
    rules.append(_implies(e_idle, _next_is(v.pos, v.pos, 0)))
    for op in expected.operations:
        slots = [_eq(v.pos, i) for i, o in enumerate(expected_seq) if o == op]
        rules.append(_implies(Prop(v.op_e(op)), conj(disj(FALSE, *slots), _next_is(v.pos, v.pos, 1))))

    # number of actual invocations, for minimisation
    rules.append(_implies(a_idle, _next_is(v.acts, v.acts, 0)))
    rules.append(_implies(Not(a_idle), _next_is(v.acts, v.acts, 1)))

    # counters: expected effect into mid_c, then actual effect into X c
    for t in v.input_types:
        rules += _counter_rules(v, v.seen(t), t, "inputs", expected, actual, decrement_floor=False)
    for t in v.output_types:
        rules += _counter_rules(v, v.needed(t), t, "outputs", expected, actual, decrement_floor=strategy == "discard")

    # an actual operation must not overdraw its inputs
    for tr in actual.transitions:
        if tr.op.inputs:
            guard = conj(*(Atom(Term(v.seen(t), 1), ">=", ZERO_TERM, 0) for t in sorted(set(tr.op.inputs))))
            rules.append(_implies(_fire(actual, v.st_a, v.op_a, tr), guard))

    final_e = expected_path[-1].target if expected_path else expected.initial
    pairs = [(final_e, a) for e, a in sorted(compat.state_pairs) if e == final_e]
    goal = conj(
        _eq(v.pos, len(expected_seq)),
        disj(FALSE, *(conj(_eq(v.st_e, expected.index(e)), _eq(v.st_a, actual.index(a))) for e, a in pairs)),
        *(Atom(Term(v.needed(t)), "<=", ZERO_TERM, 0) for t in v.output_types),
        e_idle,
        a_idle,
    )
    if max_actual is not None:
        goal = conj(goal, Atom(Term(v.acts), "<=", ZERO_TERM, max_actual))
    f = conj(init, eventually(conj(goal, historically(conj(*rules)))))
    return f, v


def build_problem(*args, **kw) -> Formula:
    return compile_problem(*args, **kw)[0]


def _counter_rules(v, counter, t, side, expected, actual, decrement_floor):
    mid = v.mid(counter)
    rules = []
    e_any = []
    for tr in expected.transitions:
        d = getattr(tr.op, side).count(t)
        if d:
            fire = _fire(expected, v.st_e, v.op_e, tr)
            e_any.append(fire)
            rules.append(_implies(fire, Atom(Term(mid), "=", Term(counter), d)))
    rules.append(_implies(conj(*(_neg(x) for x in e_any)) if e_any else TRUE, Atom(Term(mid), "=", Term(counter), 0)))

    a_any = []
    for tr in actual.transitions:
        d = getattr(tr.op, side).count(t)
        if d:
            fire = _fire(actual, v.st_a, v.op_a, tr)
            a_any.append(fire)
            if decrement_floor:
                # discard: surplus beyond the current demand is dropped
                enough = Atom(Term(mid), ">=", ZERO_TERM, d)
                rules.append(_implies(conj(fire, enough), _next_is(counter, mid, -d)))
                rules.append(_implies(conj(fire, _neg(enough)), _eq(counter, 0, 1)))
            else:
                rules.append(_implies(fire, _next_is(counter, mid, -d)))
    rules.append(_implies(conj(*(_neg(x) for x in a_any)) if a_any else TRUE, _next_is(counter, mid, 0)))
    return rules


def bound_heuristic(services: Services, expected_seq: Sequence[str]) -> int:
    """States of both automata plus one per repetition of an operation."""
    expected, actual, _ = services
    repeats = sum(n - 1 for n in Counter(expected_seq).values() if n > 1)
    return len(expected.states) + len(actual.states) + repeats


# ---------------------------------------------------------------------------
# Mapping scripts
# ---------------------------------------------------------------------------


@dataclass
class Step:
    index: int
    expected_state: str
    expected_op: Optional[OperationSig]
    actual_state: str
    actual_op: Optional[OperationSig]
    counters: dict[str, int]

    def to_dict(self) -> dict:
        def op(o):
            return None if o is None else {"name": o.name, "inputs": list(o.inputs), "outputs": list(o.outputs)}

        return {
            "step": self.index,
            "expected_state": self.expected_state,
            "expected_op": op(self.expected_op),
            "actual_state": self.actual_state,
            "actual_op": op(self.actual_op),
            "counters": dict(self.counters),
        }


@dataclass
class MappingScript:
    """Row 0 is the initial snapshot; every later row is an instant where at
    least one service moved, with counters as they stand after the move."""

    steps: list[Step]
    final_expected: str
    final_actual: str
    strategy: str
    bound: int

    @property
    def expected_ops(self) -> list[str]:
        return [s.expected_op.name for s in self.steps if s.expected_op]

    @property
    def actual_ops(self) -> list[str]:
        return [s.actual_op.name for s in self.steps if s.actual_op]

    @property
    def final_counters(self) -> dict[str, int]:
        return dict(self.steps[-1].counters)

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "bound": self.bound,
            "expected_sequence": self.expected_ops,
            "actual_sequence": self.actual_ops,
            "final_states": [self.final_expected, self.final_actual],
            "steps": [s.to_dict() for s in self.steps],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def table(self, expected_name: str = "expected", actual_name: str = "actual") -> str:
        rows = [("step", "execution trace", "counters")]
        for s in self.steps:
            trace_lines = [f"{expected_name} state: {s.expected_state}"]
            if s.expected_op:
                trace_lines.append(f"{expected_name} op: {s.expected_op}")
            trace_lines.append(f"{actual_name} state: {s.actual_state}")
            trace_lines.append(f"{actual_name} op: {s.actual_op if s.actual_op else IDLE}")
            nonzero = [f"{c} = {n}" for c, n in s.counters.items() if n]
            rows.append((str(s.index), "\n".join(trace_lines), "\n".join(nonzero) or "all counters 0"))
        rows.append(("end", f"{expected_name} state: {self.final_expected}\n{actual_name} state: {self.final_actual}", ""))
        widths = [max(len(line) for r in rows for line in r[c].split("\n")) for c in range(3)]
        sep = "+".join("-" * (w + 2) for w in widths)
        out = [sep]
        for r in rows:
            cells = [c.split("\n") for c in r]
            for j in range(max(map(len, cells))):
                parts = [(cell[j] if j < len(cell) else "").ljust(widths[c]) for c, cell in enumerate(cells)]
                out.append(" " + " | ".join(parts))
            out.append(sep)
        return "\n".join(out)


class ScriptError(RuntimeError):
    """A model does not describe a coherent run (points at an encoder bug)."""


def _op_at(trace: Trace, svc: ServiceLTS, prop_of, i: int) -> Optional[str]:
    fired = [o for o in svc.operations if trace.prop(prop_of(o), i)]
    idle = trace.prop(prop_of(IDLE), i)
    if len(fired) + idle != 1:
        raise ScriptError(f"{svc.name}: {len(fired) + idle} operations at instant {i}")
    return fired[0] if fired else None


def render_script(
    trace: Trace,
    services: Services,
    v: Vocabulary,
    expected_seq: Sequence[str],
    strategy: str = "store",
    k: Optional[int] = None,
) -> MappingScript:
    """Read a mapping script off a model of :func:`compile_problem`."""
    expected, actual, compat = services
    steps = [Step(0, expected.initial, None, actual.initial, None, {c: 0 for c in v.counters})]
    for i in range(trace.k + 1):
        se = expected.states[trace.value(v.st_e, i)]
        sa = actual.states[trace.value(v.st_a, i)]
        oe = _op_at(trace, expected, v.op_e, i)
        oa = _op_at(trace, actual, v.op_a, i)
        if oe is None and oa is None:
            # the first idle instant satisfying the goal ends the script
            done = (
                trace.value(v.pos, i) == len(expected_seq)
                and (se, sa) in compat
                and all(trace.value(v.needed(t), i) <= 0 for t in v.output_types)
            )
            if done:
                return MappingScript(steps, se, sa, strategy, trace.k if k is None else k)
            continue
        tre = expected.step(se, oe) if oe else None
        tra = actual.step(sa, oa) if oa else None
        if (oe and tre is None) or (oa and tra is None):
            raise ScriptError(f"operation not enabled at instant {i}")
        counters = {c: trace.value(c, i + 1) for c in v.counters}
        steps.append(Step(len(steps), se, tre.op if tre else None, sa, tra.op if tra else None, counters))
    raise ScriptError("model never reaches the goal")


Move = tuple  # (expected operation name or None, actual operation name or None)


def _apply(v: Vocabulary, cnt: dict, e: Optional[OperationSig], a: Optional[OperationSig], strategy: str):
    """Counter update for one instant: returns (mid, next, overdrawn inputs)."""
    mid = dict(cnt)
    if e:
        for t in e.inputs:
            mid[v.seen(t)] += 1
        for t in e.outputs:
            mid[v.needed(t)] += 1
    nxt = dict(mid)
    if a:
        for t in a.inputs:
            nxt[v.seen(t)] -= 1
        for t, d in Counter(a.outputs).items():
            c = v.needed(t)
            nxt[c] = 0 if strategy == "discard" and mid[c] < d else mid[c] - d
    over = sorted(t for t in set(a.inputs) if nxt[v.seen(t)] < 0) if a else []
    return mid, nxt, over


def simulate(services: Services, moves: Sequence[Move], strategy: str = "store") -> list[tuple[str, str, dict[str, int]]]:
    """States and counters after each move, starting from the initial
    configuration (entry 0).  Raises on a disabled operation."""
    expected, actual, _ = services
    v = _vocabulary(expected, actual)
    se, sa = expected.initial, actual.initial
    cnt = {c: 0 for c in v.counters}
    out = [(se, sa, dict(cnt))]
    for n, (oe, oa) in enumerate(moves):
        tre = expected.step(se, oe) if oe else None
        tra = actual.step(sa, oa) if oa else None
        if (oe and tre is None) or (oa and tra is None):
            raise ProblemError(f"move {n}: {oe or oa!r} is not enabled")
        _, cnt, over = _apply(v, cnt, tre and tre.op, tra and tra.op, strategy)
        if over:
            raise ProblemError(f"move {n}: {oa} overdraws {over}")
        se, sa = (tre.target if tre else se), (tra.target if tra else sa)
        out.append((se, sa, dict(cnt)))
    return out


def schedule_trace(services: Services, moves: Sequence[Move], k: int, strategy: str = "store") -> Trace:
    """The acyclic trace :func:`compile_problem` describes for an explicit
    schedule: one move per instant, then idling up to ``k``."""
    expected, actual, _ = services
    v = _vocabulary(expected, actual)
    if len(moves) > k:
        raise ProblemError(f"{len(moves)} moves do not fit in bound {k}")
    moves = list(moves) + [(None, None)] * (k + 1 - len(moves))
    props = {v.op_e(o): [] for o in expected.operations + [IDLE]}
    props.update({v.op_a(o): [] for o in actual.operations + [IDLE]})
    names = [v.st_e, v.st_a, v.pos, v.acts, *v.counters, *(v.mid(c) for c in v.counters)]
    vals: dict[str, list[int]] = {x: [] for x in names}
    se, sa = expected.initial, actual.initial
    cnt = {c: 0 for c in v.counters}
    pos = acts = 0
    for oe, oa in moves + [(None, None)]:
        tre = expected.step(se, oe) if oe else None
        tra = actual.step(sa, oa) if oa else None
        mid, nxt, _ = _apply(v, cnt, tre and tre.op, tra and tra.op, strategy)
        for o in expected.operations + [IDLE]:
            props[v.op_e(o)].append((oe or IDLE) == o)
        for o in actual.operations + [IDLE]:
            props[v.op_a(o)].append((oa or IDLE) == o)
        for x, val in [(v.st_e, expected.index(se)), (v.st_a, actual.index(sa)), (v.pos, pos), (v.acts, acts)]:
            vals[x].append(val)
        for c in v.counters:
            vals[c].append(cnt[c])
            vals[v.mid(c)].append(mid[c])
        se, sa, cnt = (tre.target if tre else se), (tra.target if tra else sa), nxt
        pos, acts = pos + (oe is not None), acts + (oa is not None)
    props = {p: b[: k + 1] for p, b in props.items()}
    return Trace.make(k, 0, props, vals, 0)


def replay(script: MappingScript, services: Services, expected_seq: Optional[Sequence[str]] = None) -> list[str]:
    """Recompute the script from scratch; return the list of violations (empty if sound)."""
    expected, actual, compat = services
    v = _vocabulary(expected, actual)
    problems = []
    se, sa = expected.initial, actual.initial
    cur = {c: 0 for c in v.counters}
    first = script.steps[0]
    if first.counters != cur or (first.expected_state, first.actual_state) != (se, sa):
        problems.append("initial row is not the all-zero snapshot in the initial states")
    for s in script.steps[1:]:
        if (s.expected_state, s.actual_state) != (se, sa):
            problems.append(f"step {s.index}: states {s.expected_state}/{s.actual_state}, expected {se}/{sa}")
        targets = []
        for op, svc, state in ((s.expected_op, expected, se), (s.actual_op, actual, sa)):
            tr = svc.step(state, op.name) if op else None
            if op and (tr is None or tr.op != op):
                problems.append(f"step {s.index}: {op.name} is not a transition of {svc.name} from {state}")
            targets.append(tr.target if tr else state)
        se, sa = targets
        _, nxt, over = _apply(v, cur, s.expected_op, s.actual_op, script.strategy)
        if over:
            problems.append(f"step {s.index}: {s.actual_op.name} overdraws seen of {over}")
        if s.counters != nxt:
            diff = {c: (s.counters.get(c), n) for c, n in nxt.items() if s.counters.get(c) != n}
            problems.append(f"step {s.index}: counters differ from replay {diff}")
        cur = s.counters
    if (script.final_expected, script.final_actual) != (se, sa):
        problems.append("final states do not match the replayed run")
    if (se, sa) not in compat:
        problems.append(f"final state pair ({se}, {sa}) is not compatible")
    bad = [c for c in cur if c.startswith("needed_") and cur[c] > 0]
    if bad:
        problems.append(f"outputs still owed at the end: {bad}")
    if expected_seq is not None and list(expected_seq) != script.expected_ops:
        problems.append(f"expected operations {script.expected_ops} differ from {list(expected_seq)}")
    return problems


def explicit_search(
    expected_seq: Sequence[str],
    services: Services,
    strategy: str = "store",
    k: Optional[int] = None,
) -> Optional[int]:
    """Fewest actual invocations of any run reaching the goal within ``k``
    moves, or ``None``.  Plain breadth-first search over configurations with
    the replay rules; no solver involved, so only usable on small models."""
    if k is None:
        k = bound_heuristic(services, expected_seq)
    expected, actual, compat = services
    v = _vocabulary(expected, actual)
    final_e = expected.run(expected_seq)[-1].target if expected_seq else expected.initial
    names = v.counters
    needed = [v.needed(t) for t in v.output_types]

    def moves(pos, se, sa):
        e_opts = [None]
        if pos < len(expected_seq):
            e_opts.append(expected.step(se, expected_seq[pos]))
        a_opts = [None] + [tr for tr in actual.transitions if tr.source == sa]
        return [(e, a) for e in e_opts for a in a_opts if e or a]

    def apply(cnt, e, a):
        _, nxt, over = _apply(v, dict(zip(names, cnt)), e and e.op, a and a.op, strategy)
        return None if over else tuple(nxt[c] for c in names)

    best: Optional[int] = None
    layer = {(0, expected.initial, actual.initial, tuple(0 for _ in names)): 0}
    for depth in range(k + 1):
        for (pos, se, sa, cnt), acts in layer.items():
            if (
                pos == len(expected_seq)
                and se == final_e
                and (se, sa) in compat
                and all(c <= 0 for name, c in zip(names, cnt) if name in needed)
            ):
                best = acts if best is None else min(best, acts)
        if depth == k:
            break
        nxt_layer: dict = {}
        for (pos, se, sa, cnt), acts in layer.items():
            for e, a in moves(pos, se, sa):
                c2 = apply(cnt, e, a)
                if c2 is None:
                    continue
                key = (pos + (e is not None), e.target if e else se, a.target if a else sa, c2)
                n = acts + (a is not None)
                if nxt_layer.get(key, n + 1) > n:
                    nxt_layer[key] = n
        layer = nxt_layer
    return best


def synthetic_services(n_states: int = 10, n_params: int = 10, seed: int = 0) -> tuple[Services, list[str]]:
    """A pair of ``n_states``-state services whose operations each take
    ``n_params`` inputs and return ``n_params`` outputs, plus an expected
    sequence crossing the whole expected automaton.

    The actual service offers the same data through differently named,
    differently chained operations with some shortcuts and self-loops.
    """
    rng = random.Random(seed)
    pool = [f"p{i}" for i in range(2 * n_params)]

    def sig(name: str, i: int) -> tuple[str, list[str], list[str]]:
        ins = [pool[(i + j) % len(pool)] for j in range(n_params)]
        outs = [pool[(i + n_params + j) % len(pool)] for j in range(n_params)]
        return name, ins, outs

    def chain(prefix: str, op_prefix: str, extra: int) -> dict:
        states = [f"{prefix}{i}" for i in range(n_states)]
        trs = []
        for i in range(n_states - 1):
            name, ins, outs = sig(f"{op_prefix}{i}", i)
            trs.append({"from": states[i], "op": name, "inputs": ins, "outputs": outs, "to": states[i + 1]})
        for _ in range(extra):
            a, b = sorted(rng.sample(range(n_states), 2))
            i = rng.randrange(len(pool))
            name, ins, outs = sig(f"{op_prefix}x{i}", i)
            if any(t["from"] == states[a] and t["op"] == name for t in trs):
                continue
            trs.append({"from": states[a], "op": name, "inputs": ins, "outputs": outs, "to": states[rng.choice((a, b))]})
        return {"name": prefix.upper(), "states": states, "initial": states[0], "transitions": trs}

    expected = chain("e", "op", n_states)
    actual = chain("a", "call", 2 * n_states)
    doc = {
        "expected": expected,
        "actual": actual,
        "compatibility": {"states": [["e0", "a0"], [f"e{n_states - 1}", f"a{n_states - 1}"]]},
    }
    seq = [f"op{i}" for i in range(n_states - 1)]
    return load_services(doc), seq


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


@dataclass
class SubstResult:
    status: str  # substitutable | not-substitutable | unknown
    k: int
    script: Optional[MappingScript] = None
    diagnostics: str = ""

    @property
    def substitutable(self) -> bool:
        return self.status == "substitutable"


def check_substitutable(
    expected_seq: Sequence[str],
    services: Services,
    strategy: str = "store",
    k: Optional[int] = None,
    config: Optional[SolverConfig] = None,
    minimise: bool = True,
) -> SubstResult:
    """Search for an actual sequence serving ``expected_seq`` within bound ``k``.

    With ``minimise`` the number of actual invocations is tightened until
    the solver refuses, so the reported script uses as few as possible.
    """
    if k is None:
        k = bound_heuristic(services, expected_seq)
    if k < 1:
        raise ProblemError("bound must be >= 1")
    f, v = compile_problem(expected_seq, services, strategy)
    verdict = check_formula(f, k, config)
    if verdict.status == "unsat":
        return SubstResult("not-substitutable", k)
    if verdict.status != "sat":
        if verdict.status == "unknown":
            return SubstResult("unknown", k, diagnostics=verdict.diagnostics)
        raise SolverError(verdict.diagnostics or verdict.status)
    script = render_script(verdict.trace, services, v, expected_seq, strategy, k)
    while minimise and script.actual_ops:
        f, _ = compile_problem(expected_seq, services, strategy, max_actual=len(script.actual_ops) - 1)
        tighter = check_formula(f, k, config)
        if tighter.status != "sat":
            break
        script = render_script(tighter.trace, services, v, expected_seq, strategy, k)
    return SubstResult("substitutable", k, script)
