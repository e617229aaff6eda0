"""CLTLB(DL) formulae: AST, parser, printer, positive normal form and analysis.

The concrete syntax accepted by :func:`parse`::

    # comment
    var x, y;
    prop p, q;
    G (p -> X x = x + 1) & F (y <= 3)

Operator precedence, loosest first: ``->`` (right assoc), ``|``, ``&``,
the binary temporal operators ``U S R T`` (right assoc), then the unary
operators ``! X Y Z G F H O``.  Inside an arithmetic term ``X``/``Y`` (or
``next(..)``/``prev(..)``) shift a variable in time.  The sugar operators
``G F H O ->`` are rewritten into the primitive connectives while parsing.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Iterator

ZERO = "ZERO"

RELATIONS = ("<", "<=", "=", ">=", ">")

_NEGATED_REL = {"<": ">=", "<=": ">", ">=": "<", ">": "<="}
_FLIPPED_REL = {"<": ">", "<=": ">=", "=": "=", ">=": "<=", ">": "<"}


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    """An arithmetic temporal term: ``var`` read ``offset`` instants away."""

    var: str
    offset: int = 0

    @property
    def depth(self) -> int:
        return self.offset

    def shifted(self, delta: int) -> "Term":
        return Term(self.var, self.offset + delta)

    def __str__(self) -> str:
        if self.var == ZERO:
            return "0"
        op = "X " if self.offset > 0 else "Y "
        return op * abs(self.offset) + self.var


ZERO_TERM = Term(ZERO)


class Formula:
    """Base class of formula nodes.  Subclasses are frozen dataclasses, so
    equality and hashing are structural."""

    __slots__ = ()

    @property
    def children(self) -> tuple["Formula", ...]:
        return ()

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True, repr=False)
class Prop(Formula):
    name: str

    def __repr__(self):
        return f"Prop({self.name!r})"


@dataclass(frozen=True, repr=False)
class Atom(Formula):
    """``left rel right + shift``; ``right`` may be :data:`ZERO_TERM`."""

    left: Term
    rel: str
    right: Term = ZERO_TERM
    shift: int = 0

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")

    @property
    def terms(self) -> tuple[Term, Term]:
        return self.left, self.right

    def __repr__(self):
        return f"Atom({show(self)})"


@dataclass(frozen=True, repr=False)
class Constant(Formula):
    value: bool

    def __repr__(self):
        return "TRUE" if self.value else "FALSE"


TRUE = Constant(True)
FALSE = Constant(False)


@dataclass(frozen=True, repr=False)
class _Unary(Formula):
    arg: Formula

    @property
    def children(self):
        return (self.arg,)

    def __repr__(self):
        return f"{type(self).__name__}({self.arg!r})"


@dataclass(frozen=True, repr=False)
class _Binary(Formula):
    left: Formula
    right: Formula

    @property
    def children(self):
        return (self.left, self.right)

    def __repr__(self):
        return f"{type(self).__name__}({self.left!r}, {self.right!r})"


class Not(_Unary):
    pass


class Next(_Unary):
    pass


class Yesterday(_Unary):
    pass


class WeakYesterday(_Unary):
    pass


class And(_Binary):
    pass


class Or(_Binary):
    pass


class Until(_Binary):
    pass


class Since(_Binary):
    pass


class Release(_Binary):
    pass


class Trigger(_Binary):
    pass


# frozen dataclass subclasses need the decorator to pick up eq/hash
for _cls in (Not, Next, Yesterday, WeakYesterday, And, Or, Until, Since, Release, Trigger):
    dataclass(frozen=True, repr=False)(_cls)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def _balanced(op, items: list[Formula]) -> Formula:
    if len(items) == 1:
        return items[0]
    mid = len(items) // 2
    return op(_balanced(op, items[:mid]), _balanced(op, items[mid:]))


def conj(*fs: Formula) -> Formula:
    """Balanced conjunction; keeps deep encodings shallow."""
    items = [f for f in fs if f != TRUE]
    if not items:
        return TRUE
    return _balanced(And, items)


def disj(*fs: Formula) -> Formula:
    items = [f for f in fs if f != FALSE]
    if not items:
        return FALSE
    return _balanced(Or, items)


def implies(a: Formula, b: Formula) -> Formula:
    return Or(Not(a), b)


def iff(a: Formula, b: Formula) -> Formula:
    return And(implies(a, b), implies(b, a))


def always(f: Formula) -> Formula:
    return Release(FALSE, f)


def eventually(f: Formula) -> Formula:
    return Until(TRUE, f)


def historically(f: Formula) -> Formula:
    return Trigger(FALSE, f)


def once(f: Formula) -> Formula:
    return Since(TRUE, f)


def next_n(f: Formula, n: int) -> Formula:
    return reduce(lambda g, _: Next(g), range(n), f)


def atom(left: str | Term, rel: str, right: str | Term | int = 0, shift: int = 0) -> Atom:
    """Convenience constructor: ``atom("x", "<", "y", 3)`` or ``atom("x", "<=", 5)``."""
    if isinstance(left, str):
        left = Term(left)
    if isinstance(right, int):
        return Atom(left, rel, ZERO_TERM, right + shift)
    if isinstance(right, str):
        right = Term(right)
    return Atom(left, rel, right, shift)


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_UNARY_SYM = {Not: "!", Next: "X", Yesterday: "Y", WeakYesterday: "Z"}
_BINARY_SYM = {And: "&", Or: "|", Until: "U", Since: "S", Release: "R", Trigger: "T"}


def _show_atom(a: Atom) -> str:
    if a.right.var == ZERO:
        rhs = str(a.shift)
    elif a.shift > 0:
        rhs = f"{a.right} + {a.shift}"
    elif a.shift < 0:
        rhs = f"{a.right} - {-a.shift}"
    else:
        rhs = str(a.right)
    return f"({a.left} {a.rel} {rhs})"


def show(f: Formula) -> str:
    """Render ``f`` in the concrete syntax (fully parenthesized)."""
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, Constant):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        return _show_atom(f)
    if isinstance(f, _Unary):
        return f"{_UNARY_SYM[type(f)]} {show(f.arg)}"
    if isinstance(f, _Binary):
        return f"({show(f.left)} {_BINARY_SYM[type(f)]} {show(f.right)})"
    raise TypeError(f"not a formula: {f!r}")


def to_source(f: Formula) -> str:
    """Formula file text: declarations header followed by the formula."""
    info = symbols(f)
    lines = []
    if info[0]:
        lines.append("var " + ", ".join(sorted(info[0])) + ";")
    if info[1]:
        lines.append("prop " + ", ".join(sorted(info[1])) + ";")
    lines.append(show(f))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}" if line else message)


class SortError(ParseError):
    pass


class UndeclaredIdentifier(ParseError):
    pass


KEYWORDS = {
    "X", "Y", "Z", "G", "F", "H", "O", "U", "S", "R", "T",
    "true", "false", "next", "prev", "var", "prop", ZERO,
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|->|[<>=!&|()+\-,;])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str  # "int", "ident", "op", "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


_UNARY_OPS = {
    "!": Not,
    "X": Next,
    "Y": Yesterday,
    "Z": WeakYesterday,
    "G": always,
    "F": eventually,
    "H": historically,
    "O": once,
}
_TEMPORAL_OPS = {"U": Until, "S": Since, "R": Release, "T": Trigger}


class _Parser:
    def __init__(self, text: str, variables: Iterable[str] = (), propositions: Iterable[str] = ()):
        self.toks = _tokenize(text)
        self.i = 0
        self.vars = set(variables)
        self.props = set(propositions)

    # token helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: _Tok | None = None, cls=ParseError):
        tok = tok or self.tok
        return cls(msg, tok.line, tok.col)

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text or self.tok.kind == "eof":
            shown = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {shown!r}")
        return self.advance()

    # grammar
    def parse_file(self) -> Formula:
        while self.tok.text in ("var", "prop") and self.tok.kind == "ident":
            self.parse_decl()
        f = self.parse_impl()
        if self.tok.text == ";":
            self.advance()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return f

    def parse_decl(self):
        kind = self.advance().text
        while True:
            t = self.advance()
            if t.kind != "ident" or t.text in KEYWORDS:
                raise self.error(f"expected identifier in {kind} declaration", t)
            if t.text in self.vars or t.text in self.props:
                raise self.error(f"identifier {t.text!r} declared twice", t)
            (self.vars if kind == "var" else self.props).add(t.text)
            if self.tok.text == ",":
                self.advance()
                continue
            self.expect(";")
            return

    def parse_impl(self) -> Formula:
        lhs = self.parse_or()
        if self.tok.text == "->":
            self.advance()
            return implies(lhs, self.parse_impl())
        return lhs

    def parse_or(self) -> Formula:
        f = self.parse_and()
        while self.tok.text == "|":
            self.advance()
            f = Or(f, self.parse_and())
        return f

    def parse_and(self) -> Formula:
        f = self.parse_temporal()
        while self.tok.text == "&":
            self.advance()
            f = And(f, self.parse_temporal())
        return f

    def parse_temporal(self) -> Formula:
        lhs = self.parse_unary()
        op = _TEMPORAL_OPS.get(self.tok.text) if self.tok.kind == "ident" else None
        if op:
            self.advance()
            return op(lhs, self.parse_temporal())
        return lhs

    def _starts_term(self) -> bool:
        k = 0
        while self.peek(k).text in ("X", "Y") and self.peek(k).kind == "ident":
            k += 1
        t = self.peek(k)
        if t.kind == "int":
            return True
        if t.kind == "ident" and t.text in ("next", "prev"):
            return True
        if t.kind == "op" and t.text == "-" and self.peek(k + 1).kind == "int":
            return True
        return t.kind == "ident" and t.text in self.vars

    def parse_unary(self) -> Formula:
        t = self.tok
        if t.text in _UNARY_OPS and t.kind in ("ident", "op"):
            if t.text in ("X", "Y") and self._starts_term():
                return self.parse_atom()
            self.advance()
            return _UNARY_OPS[t.text](self.parse_unary())
        return self.parse_primary()

    def parse_primary(self) -> Formula:
        t = self.tok
        if t.text == "(" and t.kind == "op":
            self.advance()
            f = self.parse_impl()
            self.expect(")")
            return f
        if t.kind == "ident" and t.text in ("true", "false"):
            self.advance()
            return TRUE if t.text == "true" else FALSE
        if self._starts_term():
            return self.parse_atom()
        if t.kind == "ident" and t.text not in KEYWORDS:
            if t.text in self.props:
                self.advance()
                return Prop(t.text)
            raise self.error(f"undeclared identifier {t.text!r}", cls=UndeclaredIdentifier)
        shown = t.text or "end of input"
        raise self.error(f"expected a formula, found {shown!r}")

    def parse_term(self) -> Term:
        t = self.tok
        if t.kind == "ident" and t.text in ("X", "Y"):
            self.advance()
            return self.parse_term().shifted(1 if t.text == "X" else -1)
        if t.kind == "ident" and t.text in ("next", "prev"):
            self.advance()
            self.expect("(")
            inner = self.parse_term()
            self.expect(")")
            return inner.shifted(1 if t.text == "next" else -1)
        if t.kind == "ident" and t.text in self.vars:
            self.advance()
            return Term(t.text)
        if t.kind == "ident" and t.text in self.props:
            raise self.error(f"proposition {t.text!r} used as an arithmetic term", cls=SortError)
        if t.kind == "ident" and t.text not in KEYWORDS:
            raise self.error(f"undeclared identifier {t.text!r}", cls=UndeclaredIdentifier)
        raise self.error(f"expected an arithmetic term, found {t.text or 'end of input'!r}")

    def parse_int(self) -> int:
        sign = 1
        if self.tok.text == "-":
            self.advance()
            sign = -1
        t = self.tok
        if t.kind != "int":
            raise self.error(f"expected an integer, found {t.text!r}")
        self.advance()
        return sign * int(t.text)

    def parse_side(self) -> tuple[Term, int]:
        """``term [(+|-) int]`` or ``int``."""
        if self.tok.kind == "int" or self.tok.text == "-":
            return ZERO_TERM, self.parse_int()
        term = self.parse_term()
        if self.tok.text in ("+", "-") and self.peek().kind == "int":
            sign = 1 if self.advance().text == "+" else -1
            return term, sign * self.parse_int()
        return term, 0

    def parse_atom(self) -> Formula:
        start = self.tok
        left, lshift = self.parse_side()
        if not (self.tok.kind == "op" and self.tok.text in RELATIONS):
            what = f"variable {left.var!r}" if left.var != ZERO else "integer constant"
            raise SortError(f"{what} used as a formula (a term is not a formula)", start.line, start.col)
        rel = self.advance().text
        right, rshift = self.parse_side()
        # left + lshift rel right + rshift
        shift = rshift - lshift
        if left.var == ZERO and right.var == ZERO:
            return TRUE if _compare(0, rel, shift) else FALSE
        if left.var == ZERO:
            # 0 rel right + shift  <=>  right flip(rel) 0 - shift
            return Atom(right, _FLIPPED_REL[rel], ZERO_TERM, -shift)
        return Atom(left, rel, right, shift)


def _compare(a: int, rel: str, b: int) -> bool:
    return {
        "<": a < b,
        "<=": a <= b,
        "=": a == b,
        ">=": a >= b,
        ">": a > b,
    }[rel]


def compare(a: int, rel: str, b: int) -> bool:
    """Evaluate ``a rel b`` for one of :data:`RELATIONS`."""
    return _compare(a, rel, b)


def parse(text: str, variables: Iterable[str] = (), propositions: Iterable[str] = ()) -> Formula:
    """Parse formula source.  Identifiers are declared in the text header or
    passed in ``variables``/``propositions``."""
    return _Parser(text, variables, propositions).parse_file()


def parse_file(path) -> Formula:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


# ---------------------------------------------------------------------------
# Positive normal form
# ---------------------------------------------------------------------------

_DUAL = {
    And: Or,
    Or: And,
    Until: Release,
    Release: Until,
    Since: Trigger,
    Trigger: Since,
    Yesterday: WeakYesterday,
    WeakYesterday: Yesterday,
    Next: Next,
}


def negate_atom(a: Atom) -> Formula:
    if a.rel == "=":
        return Or(Atom(a.left, "<", a.right, a.shift), Atom(a.left, ">", a.right, a.shift))
    return Atom(a.left, _NEGATED_REL[a.rel], a.right, a.shift)


def to_pnf(f: Formula, negate: bool = False) -> Formula:
    """Push negations down to propositions (atoms absorb them)."""
    if isinstance(f, Not):
        return to_pnf(f.arg, not negate)
    if isinstance(f, Prop):
        return Not(f) if negate else f
    if isinstance(f, Atom):
        return negate_atom(f) if negate else f
    if isinstance(f, Constant):
        return Constant(f.value != negate)
    cls = _DUAL[type(f)] if negate else type(f)
    return cls(*(to_pnf(c, negate) for c in f.children))


def is_pnf(f: Formula) -> bool:
    if isinstance(f, Not):
        return isinstance(f.arg, (Prop, Atom))
    return all(is_pnf(c) for c in f.children)


# ---------------------------------------------------------------------------
# Analysis
# ---------------------------------------------------------------------------


def subformulas(f: Formula) -> list[Formula]:
    """Distinct subformulae in post-order of first occurrence."""
    seen: set[Formula] = set()
    order: list[Formula] = []
    stack: list[tuple[Formula, bool]] = [(f, False)]
    while stack:
        node, expanded = stack.pop()
        if node in seen:
            continue
        if expanded:
            seen.add(node)
            order.append(node)
            continue
        stack.append((node, True))
        for c in reversed(node.children):
            stack.append((c, False))
    return order


def terms(f: Formula) -> Iterator[Term]:
    for g in subformulas(f):
        if isinstance(g, Atom):
            for t in g.terms:
                if t.var != ZERO:
                    yield t


def symbols(f: Formula) -> tuple[set[str], set[str]]:
    """(variables, propositions) occurring in ``f``."""
    variables = {t.var for t in terms(f)}
    props = {g.name for g in subformulas(f) if isinstance(g, Prop)}
    return variables, props


@dataclass(frozen=True)
class FormulaInfo:
    min_depth: int
    max_depth: int
    m: int
    n: int
    variables: frozenset[str]
    propositions: frozenset[str]


def analyze(f: Formula) -> FormulaInfo:
    subs = subformulas(f)
    depths = [t.depth for t in terms(f)]
    variables, props = symbols(f)
    return FormulaInfo(
        min_depth=min([0, *depths]),
        max_depth=max([0, *depths]),
        m=len(subs),
        n=sum(isinstance(g, (Until, Release)) for g in subs),
        variables=frozenset(variables),
        propositions=frozenset(props),
    )


def size(f: Formula) -> int:
    """Number of AST nodes (shared subtrees counted each time)."""
    return 1 + sum(size(c) for c in f.children)
