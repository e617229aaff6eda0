"""Bounded satisfiability checking for CLTLB(DL).

Formulae are compiled to a QF-UFIDL constraint system, handed to an SMT
solver, and models come back as lasso-shaped traces.  ``oracle`` gives an
independent reference semantics; ``substitutability`` builds on the checker
to synthesise service mapping scripts.
"""
from .encoder import ConstraintSystem, EncodingMeta, assemble
from .formula import Formula, Term, analyze, parse, parse_file, show, to_pnf
from .oracle import enumerate_models, evaluate
from .smt import SolverConfig, SolverVerdict, check_formula, emit_smtlib, solve
from .trace import Trace

__version__ = "0.1.0"

__all__ = [
    "ConstraintSystem",
    "EncodingMeta",
    "Formula",
    "SolverConfig",
    "SolverVerdict",
    "Term",
    "Trace",
    "analyze",
    "assemble",
    "check_formula",
    "emit_smtlib",
    "enumerate_models",
    "evaluate",
    "parse",
    "parse_file",
    "show",
    "solve",
    "to_pnf",
]
