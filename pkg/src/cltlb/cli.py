"""``cltlb`` command line.

Exit codes: 0 sat / substitutable / true, 1 unsat / not substitutable /
false, 2 unknown, 3 bad input, 4 solver failure, 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import oracle
from .encoder import EncodingError, assemble, sat_baseline_vars
from .formula import ParseError, analyze, parse_file, show, to_pnf
from .smt import SolverConfig, SolverError, emit_smtlib, solve
from .substitutability import (
    STRATEGIES,
    ModelError,
    ProblemError,
    bound_heuristic,
    check_substitutable,
    load_services,
    replay,
)
from .trace import Trace, TraceError

EXIT_OK, EXIT_NO, EXIT_UNKNOWN, EXIT_INPUT, EXIT_SOLVER, EXIT_USAGE = 0, 1, 2, 3, 4, 64
_STATUS_EXIT = {"sat": EXIT_OK, "unsat": EXIT_NO, "unknown": EXIT_UNKNOWN}


class _Parser(argparse.ArgumentParser):
    # argparse would exit 2, which is taken by "unknown"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _bound(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if k < 1:
        raise argparse.ArgumentTypeError("bound must be >= 1")
    return k


def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--solver", help="solver executable or full command line (default: $CLTLB_SOLVER or z3)")
    p.add_argument("--logic", help="SMT-LIB2 logic (default: $CLTLB_LOGIC or QF_UFLIA)")
    p.add_argument("--timeout", type=float, help="seconds before giving up (default: $CLTLB_TIMEOUT or 30)")


def _config(args) -> SolverConfig:
    return SolverConfig.from_env(args.solver, args.logic, args.timeout)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cltlb", description="Bounded satisfiability for CLTLB(DL) and service substitutability.")
    p.add_argument("-v", "--verbose", action="store_true", help="report timings and encoding sizes on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sat", help="bounded satisfiability of a formula file")
    s.add_argument("formula", type=Path)
    s.add_argument("-k", "--bound", type=_bound, required=True)
    _solver_flags(s)
    s.add_argument("--emit-smt", type=Path, metavar="PATH", help="also write the SMT-LIB2 script")
    s.add_argument("--trace-out", type=Path, metavar="PATH", help="write the model trace as JSON")
    s.add_argument("--json", action="store_true", help="machine-readable report on stdout")

    u = sub.add_parser("subst", help="is an expected operation sequence substitutable?")
    u.add_argument("model", type=Path, help="service model JSON")
    u.add_argument("sequence", help="comma-separated expected operations")
    u.add_argument("-k", "--bound", type=_bound, help="default: sum of states plus repetitions")
    u.add_argument("--strategy", choices=STRATEGIES, default="store")
    u.add_argument("--no-minimise", action="store_true", help="accept the first script found")
    _solver_flags(u)
    u.add_argument("--json", action="store_true")

    o = sub.add_parser("oracle", help="evaluate on a trace or enumerate small models (no solver)")
    o.add_argument("formula", type=Path)
    g = o.add_mutually_exclusive_group(required=True)
    g.add_argument("--trace", type=Path, help="trace JSON to evaluate on")
    g.add_argument("--enumerate", nargs=2, type=int, metavar=("LO", "HI"), help="integer range to enumerate")
    o.add_argument("--at", type=int, default=0, help="instant to evaluate at (with --trace)")
    o.add_argument("-k", "--bound", type=_bound, help="bound (with --enumerate)")
    o.add_argument("--budget", type=int, default=oracle.DEFAULT_BUDGET, help="maximum number of free slots")
    o.add_argument("--json", action="store_true")
    return p


def _emit(args, payload: dict, text: str) -> None:
    print(json.dumps(payload, indent=2) if args.json else text)


def cmd_sat(args) -> int:
    f = to_pnf(parse_file(args.formula))
    k = args.bound
    config = _config(args)
    t0 = time.perf_counter()
    cs, meta = assemble(f, k)
    if args.emit_smt:
        args.emit_smt.write_text(emit_smtlib(cs, config.logic))
    verdict = solve(cs, meta, config)
    elapsed = time.perf_counter() - t0
    if verdict.status == "solver-error":
        raise SolverError(verdict.diagnostics)
    if args.verbose:
        info = analyze(f)
        n = info.n
        print(
            f"k={k} m={info.m} n={n} predicates={len(cs.predicates)} int-consts={len(cs.int_consts)} "
            f"sat-baseline={sat_baseline_vars(k, info.m, n)} time={elapsed:.2f}s",
            file=sys.stderr,
        )
    if verdict.trace is not None and args.trace_out:
        args.trace_out.write_text(verdict.trace.to_json() + "\n")
    payload = {"status": verdict.status, "k": k, "formula": show(f)}
    text = verdict.status
    if verdict.trace is not None:
        payload["trace"] = verdict.trace.to_dict()
        text += "\n" + verdict.trace.pretty()
    elif verdict.diagnostics and verdict.status == "unknown":
        text += f"  ({verdict.diagnostics})"
    _emit(args, payload, text)
    return _STATUS_EXIT[verdict.status]


def cmd_subst(args) -> int:
    services = load_services(args.model)
    seq = [s.strip() for s in args.sequence.split(",") if s.strip()]
    k = args.bound or bound_heuristic(services, seq)
    t0 = time.perf_counter()
    res = check_substitutable(seq, services, args.strategy, k, _config(args), minimise=not args.no_minimise)
    if args.verbose:
        print(f"k={k} strategy={args.strategy} time={time.perf_counter() - t0:.2f}s", file=sys.stderr)
    payload = {"status": res.status, "k": k, "strategy": args.strategy, "expected_sequence": seq}
    text = f"{res.status} (k = {k}, strategy = {args.strategy})"
    if res.script is not None:
        problems = replay(res.script, services, seq)
        payload["script"] = res.script.to_dict()
        payload["replay_problems"] = problems
        text += "\nactual sequence: " + (", ".join(res.script.actual_ops) or "(none)")
        text += "\n" + res.script.table(services.expected.name, services.actual.name)
        if problems:
            text += "\nreplay check FAILED:\n  " + "\n  ".join(problems)
    _emit(args, payload, text)
    return {"substitutable": EXIT_OK, "not-substitutable": EXIT_NO}.get(res.status, EXIT_UNKNOWN)


def cmd_oracle(args) -> int:
    f = to_pnf(parse_file(args.formula))
    if args.trace:
        trace = Trace.from_json(args.trace.read_text())
        value = oracle.evaluate(f, trace, args.at)
        _emit(args, {"value": value, "at": args.at}, "true" if value else "false")
        return EXIT_OK if value else EXIT_NO
    if args.bound is None:
        raise argparse.ArgumentTypeError("--enumerate needs -k/--bound")
    lo, hi = args.enumerate
    res = oracle.enumerate_models(f, args.bound, lo, hi, args.budget)
    payload = {"verdict": res.verdict, "nodes": res.nodes}
    text = res.verdict
    if res.trace is not None:
        payload["trace"] = res.trace.to_dict()
        text += "\n" + res.trace.pretty()
    _emit(args, payload, text)
    return EXIT_OK if res.sat else EXIT_NO


_COMMANDS = {"sat": cmd_sat, "subst": cmd_subst, "oracle": cmd_oracle}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        print(f"cltlb: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"cltlb: {args.formula}:{exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ModelError, ProblemError, TraceError, EncodingError, oracle.OracleError, OSError, json.JSONDecodeError) as exc:
        print(f"cltlb: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"cltlb: solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
