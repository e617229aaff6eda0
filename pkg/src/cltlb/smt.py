"""SMT-LIB2 serialization, external solver driver and model read-back."""
from __future__ import annotations

import logging
import os
import re
import shlex
import shutil
import subprocess
from dataclasses import dataclass, field
from typing import Any

from .encoder import ConstraintSystem, EncodingMeta, SExpr, assemble
from .formula import Formula
from .trace import Trace

log = logging.getLogger(__name__)

DEFAULT_LOGIC = "QF_UFLIA"
DEFAULT_TIMEOUT = 30.0

SAT, UNSAT, UNKNOWN, SOLVER_ERROR = "sat", "unsat", "unknown", "solver-error"


class SolverError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------


def sexpr(e: SExpr) -> str:
    if isinstance(e, bool):
        return "true" if e else "false"
    if isinstance(e, int):
        return str(e) if e >= 0 else f"(- {-e})"
    if isinstance(e, str):
        return e
    return "(" + " ".join(sexpr(x) for x in e) + ")"


def emit_smtlib(cs: ConstraintSystem, logic: str = DEFAULT_LOGIC) -> str:
    lines = ["(set-option :produce-models true)", f"(set-logic {logic})"]
    for c in cs.int_consts:
        lines.append(f"(declare-fun {c} () Int)")
    for f in cs.int_funs:
        lines.append(f"(declare-fun {f} (Int) Int)")
    for p in cs.predicates:
        lines.append(f"(declare-fun {p} (Int) Bool)")
    for a in cs.assertions:
        lines.append(f"(assert {sexpr(a)})")
    lines.append("(check-sat)")
    if cs.int_consts or cs.int_funs or cs.predicates:
        lines.append("(get-model)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# S-expression reader
# ---------------------------------------------------------------------------

_SEXP_TOKEN = re.compile(r'\s*(?:(;[^\n]*)|(\()|(\))|("(?:[^"]|"")*")|(\|[^|]*\|)|([^\s()";|]+))')


class Sym(str):
    """A symbol read from solver output (vs. a string literal)."""


def read_sexprs(text: str) -> list[Any]:
    """Parse every top-level s-expression in ``text``.  Symbols become
    :class:`Sym`, numerals ``int``, string literals ``str``."""
    stack: list[list] = [[]]
    pos = 0
    while pos < len(text):
        m = _SEXP_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise SolverError(f"unreadable solver output near {text[pos:pos + 40]!r}")
        pos = m.end()
        comment, lpar, rpar, string, quoted, atom = m.groups()
        if comment:
            continue
        if lpar:
            stack.append([])
        elif rpar:
            if len(stack) == 1:
                raise SolverError("unbalanced ')' in solver output")
            done = stack.pop()
            stack[-1].append(done)
        elif string:
            stack[-1].append(string[1:-1].replace('""', '"'))
        elif quoted:
            stack[-1].append(Sym(quoted[1:-1]))
        elif atom:
            stack[-1].append(int(atom) if atom.isdigit() else Sym(atom))
    if len(stack) != 1:
        raise SolverError("unbalanced '(' in solver output")
    return stack[0]


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------


@dataclass
class Model:
    """Function definitions from a ``get-model`` response, evaluable at points."""

    defs: dict[str, tuple[list[str], Any]] = field(default_factory=dict)

    @classmethod
    def parse(cls, sx: Any) -> "Model":
        if isinstance(sx, str):
            items = read_sexprs(sx)
            sx = items[0] if len(items) == 1 else items
        if sx and sx[0] == "model":
            sx = sx[1:]
        defs = {}
        for d in sx:
            if not isinstance(d, list) or not d or d[0] not in ("define-fun", "define-fun-rec"):
                continue
            _, name, params, _sort, body = d
            defs[str(name)] = ([str(p[0]) for p in params], body)
        return cls(defs)

    def __contains__(self, name: str) -> bool:
        return name in self.defs

    def value(self, name: str, *args: int):
        params, body = self.defs[name]
        if len(params) != len(args):
            raise SolverError(f"{name} expects {len(params)} arguments")
        return self._eval(body, dict(zip(params, args)))

    def _eval(self, e, env: dict):
        if isinstance(e, bool):
            return e
        if isinstance(e, int):
            return e
        if isinstance(e, Sym):
            if e in env:
                return env[e]
            if e == "true":
                return True
            if e == "false":
                return False
            if e in self.defs:
                return self.value(e)
            raise SolverError(f"unknown symbol {e!r} in model")
        if not isinstance(e, list) or not e:
            raise SolverError(f"cannot evaluate {e!r}")
        head = e[0]
        if head == "let":
            inner = dict(env)
            for name, val in e[1]:
                inner[name] = self._eval(val, env)
            return self._eval(e[2], inner)
        if head == "ite":
            return self._eval(e[2] if self._eval(e[1], env) else e[3], env)
        if head == "and":
            return all(self._eval(x, env) for x in e[1:])
        if head == "or":
            return any(self._eval(x, env) for x in e[1:])
        args = [self._eval(x, env) for x in e[1:]]
        if head == "not":
            return not args[0]
        if head == "=>":
            return (not args[0]) or args[1]
        if head == "xor":
            return args[0] != args[1]
        if head == "=":
            return all(a == args[0] for a in args[1:])
        if head == "distinct":
            return len(set(args)) == len(args)
        if head in ("<", "<=", ">", ">="):
            return all(_CMP[head](a, b) for a, b in zip(args, args[1:]))
        if head == "+":
            return sum(args)
        if head == "-":
            return -args[0] if len(args) == 1 else args[0] - sum(args[1:])
        if head == "*":
            out = 1
            for a in args:
                out *= a
            return out
        if head == "div":
            return args[0] // args[1] if args[1] > 0 else -(args[0] // -args[1])
        if head == "mod":
            return args[0] % abs(args[1])
        if head == "abs":
            return abs(args[0])
        if isinstance(head, Sym) and head in self.defs:
            return self.value(head, *args)
        raise SolverError(f"unsupported model construct {head!r}")


_CMP = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


# ---------------------------------------------------------------------------
# Solver process
# ---------------------------------------------------------------------------


@dataclass
class SolverConfig:
    command: list[str] = field(default_factory=list)
    logic: str = DEFAULT_LOGIC
    timeout: float = DEFAULT_TIMEOUT

    @classmethod
    def from_env(cls, solver: str | None = None, logic: str | None = None, timeout: float | None = None):
        """Flags win over ``CLTLB_SOLVER``/``CLTLB_LOGIC``/``CLTLB_TIMEOUT``."""
        solver = solver or os.environ.get("CLTLB_SOLVER") or "z3"
        logic = logic or os.environ.get("CLTLB_LOGIC") or DEFAULT_LOGIC
        if timeout is None:
            timeout = float(os.environ.get("CLTLB_TIMEOUT", DEFAULT_TIMEOUT))
        return cls(solver_command(solver), logic, timeout)


def solver_command(solver: str) -> list[str]:
    """Command line reading an SMT-LIB2 script from stdin."""
    argv = shlex.split(solver)
    if len(argv) > 1:
        return argv
    exe = os.path.basename(argv[0])
    if exe.startswith("z3"):
        return [argv[0], "-in", "-smt2"]
    if exe.startswith("cvc"):
        return [argv[0], "--lang=smt2", "--produce-models"]
    return argv


def default_solver_available() -> bool:
    return shutil.which(SolverConfig.from_env().command[0]) is not None


@dataclass
class SolverVerdict:
    status: str
    trace: Trace | None = None
    model: Model | None = None
    diagnostics: str = ""

    @property
    def sat(self) -> bool:
        return self.status == SAT


def run_solver(script: str, config: SolverConfig | None = None) -> SolverVerdict:
    """Run ``script`` through the configured solver; on ``sat`` the model is
    parsed from the ``get-model`` response.

    Solvers may exit non-zero for an error *after* the verdict (z3 does so
    for ``get-model`` following ``unsat``); only errors before the verdict,
    a missing verdict or unreadable output count as solver errors.
    """
    config = config or SolverConfig.from_env()
    log.debug("running %s on %d bytes of SMT-LIB2", " ".join(config.command), len(script))
    try:
        proc = subprocess.run(
            config.command,
            input=script,
            capture_output=True,
            text=True,
            timeout=config.timeout,
        )
    except subprocess.TimeoutExpired:
        return SolverVerdict(UNKNOWN, diagnostics=f"timeout after {config.timeout:g} s")
    except OSError as exc:
        return SolverVerdict(SOLVER_ERROR, diagnostics=f"cannot run {config.command[0]!r}: {exc}")
    raw = proc.stdout + (("\n" + proc.stderr) if proc.stderr else "")
    try:
        items = read_sexprs(proc.stdout)
    except SolverError as exc:
        return SolverVerdict(SOLVER_ERROR, diagnostics=f"{exc}\n{raw}")
    status = None
    errors = []
    rest: list = []
    for n, item in enumerate(items):
        if isinstance(item, list) and item and item[0] == "error":
            errors.append(item[1] if len(item) > 1 else "")
            continue
        if isinstance(item, Sym) and item in (SAT, UNSAT, UNKNOWN):
            status = str(item)
            rest = items[n + 1:]
            break
        if isinstance(item, Sym) and item == "success":
            continue
        return SolverVerdict(SOLVER_ERROR, diagnostics=f"unexpected solver output {item!r}\n{raw}")
    if status is None:
        why = "; ".join(map(str, errors)) or f"exit status {proc.returncode}"
        return SolverVerdict(SOLVER_ERROR, diagnostics=f"no verdict from solver: {why}\n{raw}")
    if errors:
        return SolverVerdict(SOLVER_ERROR, diagnostics=f"solver reported: {'; '.join(map(str, errors))}\n{raw}")
    if status != SAT:
        return SolverVerdict(status, diagnostics=raw)
    model = None
    for item in rest:
        if isinstance(item, list) and (not item or item[0] == "model" or isinstance(item[0], list)):
            try:
                model = Model.parse(item)
            except (ValueError, SolverError) as exc:
                return SolverVerdict(SOLVER_ERROR, diagnostics=f"malformed model: {exc}\n{raw}")
            break
        if isinstance(item, list) and item and item[0] == "error":
            return SolverVerdict(SOLVER_ERROR, diagnostics=f"solver reported: {item[1]}\n{raw}")
    return SolverVerdict(SAT, model=model or Model(), diagnostics=raw)


# ---------------------------------------------------------------------------
# Trace read-back
# ---------------------------------------------------------------------------


def extract_trace(model: Model | str, meta: EncodingMeta) -> Trace:
    """Rebuild the bounded path from a model.  Points the solver left
    unassigned read as ``False``/``0``."""
    if isinstance(model, str):
        model = Model.parse(model)
    if meta.loop_name not in model:
        raise SolverError(f"model lacks the loop selector {meta.loop_name!r}")
    k = meta.k
    loop = model.value(meta.loop_name)

    def point(name, i, default):
        if name not in model:
            return default
        return model.value(name, i)

    props = {p: [bool(point(name, i, False)) for i in range(k + 2)] for p, name in meta.props.items()}
    lo, hi = meta.window
    vars_ = {x: {t: int(point(name, t, 0)) for t in range(lo, hi + 1)} for x, name in meta.base_funs.items()}
    return Trace(k, loop, props, vars_, (lo, hi))


def solve(cs: ConstraintSystem, meta: EncodingMeta, config: SolverConfig | None = None) -> SolverVerdict:
    config = config or SolverConfig.from_env()
    verdict = run_solver(emit_smtlib(cs, config.logic), config)
    if verdict.status == SAT:
        try:
            verdict.trace = extract_trace(verdict.model, meta)
        except (SolverError, ValueError) as exc:
            return SolverVerdict(SOLVER_ERROR, model=verdict.model, diagnostics=f"{exc}\n{verdict.diagnostics}")
    return verdict


def check_formula(f: Formula, k: int, config: SolverConfig | None = None, **options) -> SolverVerdict:
    """Bounded satisfiability of a PNF formula at bound ``k``."""
    cs, meta = assemble(f, k, **options)
    return solve(cs, meta, config)
