"""Random PNF formulae for differential testing."""
from __future__ import annotations

import random

from .formula import (
    FALSE,
    TRUE,
    And,
    Atom,
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
    ZERO,
    RELATIONS,
)

_UNARY = (Next, Yesterday, WeakYesterday)
_BINARY = (And, Or, Until, Since, Release, Trigger)


def random_atom(rng: random.Random, variables, offsets=(-1, 0, 1), shifts=(-2, -1, 0, 1, 2)) -> Atom:
    x = rng.choice(variables)
    left = Term(x, rng.choice(offsets))
    if rng.random() < 0.3:
        right = Term(ZERO)
    else:
        right = Term(rng.choice(variables), rng.choice(offsets))
    return Atom(left, rng.choice(RELATIONS), right, rng.choice(shifts))


def random_pnf(
    rng: random.Random,
    max_nodes: int = 8,
    props=("p", "q"),
    variables=("x", "y"),
) -> Formula:
    """A PNF formula with at most ``max_nodes`` AST nodes."""

    def leaf() -> Formula:
        kinds = []
        if props:
            kinds += ["prop", "prop", "negprop"]
        if variables:
            kinds += ["atom", "atom"]
        kinds.append("const")
        kind = rng.choice(kinds)
        if kind == "prop":
            return Prop(rng.choice(props))
        if kind == "negprop":
            return Not(Prop(rng.choice(props)))
        if kind == "atom":
            return random_atom(rng, variables)
        return rng.choice((TRUE, FALSE))

    def cost(f: Formula) -> int:
        return 2 if isinstance(f, Not) else 1

    def build(budget: int) -> Formula:
        if budget <= 2 or rng.random() < 0.25:
            f = leaf()
            while cost(f) > budget:
                f = leaf()
            return f
        if budget >= 3 and rng.random() < 0.65:
            op = rng.choice(_BINARY)
            left_budget = rng.randint(1, budget - 2)
            left = build(left_budget)
            right = build(budget - 1 - _size(left))
            return op(left, right)
        return rng.choice(_UNARY)(build(budget - 1))

    return build(max_nodes)


def _size(f: Formula) -> int:
    return 1 + sum(_size(c) for c in f.children)


def corpus(n: int, seed: int = 0, **kw) -> list[Formula]:
    rng = random.Random(seed)
    return [random_pnf(rng, **kw) for _ in range(n)]
