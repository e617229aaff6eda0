import random

import pytest
from hypothesis import given, settings, strategies as st

from cltlb.corpus import random_pnf
from cltlb.formula import (
    Not,
    Release,
    Until,
    analyze,
    parse,
    to_pnf,
)
from cltlb.oracle import BudgetExceeded, OracleError, enumerate_models, evaluate, with_range
from cltlb.trace import Trace

COUNTER = "var x; x = 0 & G (X x = x + 1)"


def some_trace(loop=0):
    p = [True, False, True]
    return Trace.make(3, loop, {"p": p + [p[loop - 1] if loop else False], "q": [False] * 4})


@pytest.mark.parametrize("loop", [0, 1, 2])
def test_weak_yesterday_true_at_zero(loop):
    assert evaluate(parse("prop p; Z p"), some_trace(loop=loop), 0)
    assert evaluate(parse("prop p; Z !p"), some_trace(loop=loop), 0)


@pytest.mark.parametrize("loop", [0, 1, 2])
def test_yesterday_false_at_zero(loop):
    assert not evaluate(parse("prop p; Y p"), some_trace(loop=loop), 0)
    assert not evaluate(parse("prop p; Y !p"), some_trace(loop=loop), 0)


def test_past_operators_later_instants():
    t = Trace.make(3, 0, {"p": [True, False, False, True], "q": [True, True, False, False]})
    assert evaluate(parse("prop p; Y p"), t, 1)
    assert not evaluate(parse("prop p; Y p"), t, 2)
    assert evaluate(parse("prop p,q; q S p"), t, 1)
    assert not evaluate(parse("prop p,q; q S p"), t, 2)
    assert evaluate(parse("prop p; O p"), t, 2)
    assert not evaluate(parse("prop q; H q"), t, 2)
    assert evaluate(parse("prop q; H q"), t, 1)


def test_since_trigger_base_case():
    t = Trace.make(2, 0, {"p": [False, True, True], "q": [True, False, False]})
    assert evaluate(parse("prop p,q; p S q"), t, 0)
    assert not evaluate(parse("prop p,q; q S p"), t, 0)
    assert evaluate(parse("prop p,q; p T q"), t, 0)
    assert not evaluate(parse("prop p,q; q T p"), t, 0)


def test_counter_on_lasso():
    f = parse(COUNTER)
    good = Trace.make(4, 1, vars={"x": [0, 1, 2, 3, 4, 5]})
    bad = Trace.make(4, 1, vars={"x": [0, 1, 2, 3, 5, 6]})
    assert evaluate(f, good, 0)
    assert not evaluate(f, bad, 0)


def test_release_collapses_on_acyclic_traces():
    # the finite clause needs a releasing instant, so G never holds without a loop
    f = parse(COUNTER)
    assert not evaluate(f, Trace.make(4, 0, vars={"x": [0, 1, 2, 3, 4, 5]}), 0)
    assert not evaluate(f, Trace.make(4, 0, vars={"x": [0, 1, 2, 3, 5, 6]}), 0)
    t = Trace.make(2, 0, {"p": [True, True, True], "q": [False, False, True]})
    assert not evaluate(parse("prop p; G p"), t, 0)
    assert evaluate(parse("prop p,q; q R p"), t, 0)
    assert not evaluate(parse("prop p,q; q R p"), Trace.make(2, 0, {"p": [True] * 3, "q": [False] * 3}), 0)


def test_release_on_lasso_holds_forever():
    t = Trace.make(2, 1, {"p": [True, True, True], "q": [False, False, False]})
    assert evaluate(parse("prop p; G p"), t, 0)
    assert evaluate(parse("prop p,q; q R p"), t, 0)


def test_until_folds_through_the_loop():
    # q only at instant 1; from instant 2 the run wraps back to 1
    t = Trace.make(3, 1, {"p": [True, False, True, True], "q": [False, True, False, False]})
    assert evaluate(parse("prop q; F q"), t, 3)
    assert not evaluate(parse("prop q; F q"), Trace.make(3, 0, {"q": [False, True, False, False]}), 3)


def test_next_at_k():
    t = Trace.make(2, 1, {"p": [False, True, False]})
    assert evaluate(parse("prop p; X p"), t, 2)
    assert not evaluate(parse("prop p; X p"), Trace.make(2, 0, {"p": [False, True, True]}), 2)


def test_arithmetic_reads_past_window():
    f = parse("var x; Y x < x")
    t = Trace.make(2, 0, vars={"x": [-1, 0, 1, 2]}, lo=-1)
    assert all(evaluate(f, t, i) for i in range(3))
    with pytest.raises(OracleError):
        evaluate(f, Trace.make(2, 0, vars={"x": [0, 1, 2]}), 0)


def test_instant_out_of_range():
    with pytest.raises(OracleError):
        evaluate(parse("prop p; p"), some_trace(), 7)


def test_enumerate_contradiction():
    for k in (1, 2, 3):
        assert enumerate_models(parse("prop p; p & !p"), k, 0, 1).verdict == "unsat-within-range"


def test_enumerate_first_witness_eventually():
    res = enumerate_models(parse("prop p; F p"), 1, 0, 0)
    assert res.sat
    assert res.trace.loop == 0
    assert res.trace.props["p"][:2] == [True, False]


def test_enumerate_small_counter():
    res = enumerate_models(parse("var x; x = 0 & X (x = 1)"), 1, 0, 1)
    assert res.sat
    assert res.trace.loop == 0
    assert [res.trace.value("x", t) for t in (0, 1)] == [0, 1]


def test_enumerate_budget():
    f = parse("var x, y; prop p, q; p & q & x < y")
    with pytest.raises(BudgetExceeded):
        enumerate_models(f, 20, 0, 1, budget=30)


def test_enumerate_range_is_part_of_the_question():
    f = parse("var x; x > 5")
    assert not enumerate_models(f, 1, -3, 3).sat
    assert enumerate_models(f, 1, -3, 6).sat


def random_trace(rng, f, k, lasso=False):
    info = analyze(f)
    loop = rng.randint(1 if lasso else 0, k)
    props = {p: [rng.random() < 0.5 for _ in range(k + 1)] for p in info.propositions}
    if loop:
        for p in props:
            props[p][k] = props[p][loop - 1]
    width = k + info.max_depth - info.min_depth + 1
    vs = {x: [rng.randint(-2, 2) for _ in range(width)] for x in info.variables}
    return Trace.make(k, loop, props, vs, info.min_depth)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pnf_preserves_semantics(seed):
    rng = random.Random(seed)
    f = random_pnf(rng)
    t = random_trace(rng, f, rng.randint(1, 4))
    for i in range(t.k + 1):
        assert evaluate(f, t, i) == evaluate(to_pnf(Not(Not(f))), t, i)
    # negating through U/R and X is only sound on lassos
    t = random_trace(rng, f, t.k, lasso=True)
    for i in range(t.k + 1):
        assert evaluate(Not(f), t, i) == evaluate(to_pnf(Not(f)), t, i)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_release_until_duality_on_lassos(seed):
    rng = random.Random(seed)
    a, b = random_pnf(rng, max_nodes=3), random_pnf(rng, max_nodes=3)
    f = Release(a, b)
    t = random_trace(rng, Until(a, b), rng.randint(1, 4), lasso=True)
    for i in range(t.k + 1):
        assert evaluate(f, t, i) == evaluate(Not(Until(Not(a), Not(b))), t, i)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_enumeration_witnesses_are_sound(seed):
    rng = random.Random(seed)
    f = random_pnf(rng, max_nodes=6)
    k = rng.randint(1, 3)
    res = enumerate_models(f, k, -2, 2, budget=200)
    if res.sat:
        assert evaluate(f, res.trace, 0)
        assert evaluate(with_range(f, k, -2, 2), res.trace, 0)
