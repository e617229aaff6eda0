"""
Counting without approximation
==============================

A single integer that starts at 0 and grows by one at every step.  A
propositional encoding would have to fix a bit width; here the solver
works on the integers directly, so the same formula is satisfiable at any
bound and the model it returns is exact.
"""
from cltlb import parse
from cltlb.oracle import evaluate
from cltlb.smt import check_formula

f = parse("var x; x = 0 & G (X x = x + 1)")

for k in (4, 10, 25):
    verdict = check_formula(f, k)
    xs = [verdict.trace.value("x", i) for i in range(k + 1)]
    print(f"k={k:2d}  {verdict.status}  loop={verdict.trace.loop}  x = {xs}")
    # the model is checked against the reference semantics, not trusted
    assert evaluate(f, verdict.trace, 0)

# G needs a loop, and the loop must not relate x across the back edge:
# arithmetic is never folded, so the lasso is a periodic control part
# carrying an unbounded counter.
print(verdict.trace.pretty())
