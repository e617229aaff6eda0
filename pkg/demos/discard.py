"""
When keeping surplus data matters
=================================

The provider here returns a ``z`` eagerly with every call, while the
client asks for three of them before consuming an ``r``.  If surplus data
is kept (``store``) the provider can run ahead of the client.  If surplus
is thrown away (``discard``) each call has to land right before the ask it
serves, and the script needs one more step than the bound heuristic allows.
"""
from cltlb.substitutability import (
    bound_heuristic,
    check_substitutable,
    discard_counterexample_path,
    explicit_search,
    load_services,
)

services = load_services(discard_counterexample_path())
seq = ["ask", "ask", "ask", "want"]
k = bound_heuristic(services, seq)

for strategy in ("store", "discard"):
    for bound in (k, k + 1):
        res = check_substitutable(seq, services, strategy, bound)
        # brute-force search over the product of the two automata
        fewest = explicit_search(seq, services, strategy, bound)
        ops = ", ".join(res.script.actual_ops) if res.script else "-"
        print(f"{strategy:8s} k={bound}  {res.status:18s} explicit={fewest}  actual: {ops}")
