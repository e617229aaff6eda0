"""
Replacing one lyrics service with another
=========================================

A client was written against LyricWiki and calls checkSongExists,
searchSongs and getSong.  ChartLyrics offers the same data through
SearchLyric and GetLyric.  We ask the solver for a mapping script that
replays the client's calls on ChartLyrics without ever handing it data the
client has not produced yet.
"""
import time

from cltlb.substitutability import (
    bound_heuristic,
    case_study_path,
    check_substitutable,
    load_services,
    replay,
)

services = load_services(case_study_path())
seq = ["checkSongExists", "searchSongs", "getSong"]
k = bound_heuristic(services, seq)
print(f"bound from the heuristic: {k}")

t0 = time.perf_counter()
result = check_substitutable(seq, services, strategy="store", k=k)
print(f"{result.status} in {time.perf_counter() - t0:.1f} s")

script = result.script
print(script.table(services.expected.name, services.actual.name))
print("actual operations:", ", ".join(script.actual_ops))

# Counters: seen_d is how many values of type d were produced and not
# consumed, needed_d is how many the client still expects.  At the end
# nothing is owed.
owed = {c: n for c, n in script.final_counters.items() if c.startswith("needed_") and n > 0}
print("still owed to the client:", owed or "nothing")
print("replay problems:", replay(script, services, seq) or "none")
