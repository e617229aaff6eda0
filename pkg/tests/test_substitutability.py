import json
import random

import pytest

from cltlb.formula import analyze
from cltlb.oracle import evaluate
from cltlb.substitutability import (
    ModelError,
    ProblemError,
    Services,
    ServiceLTS,
    CompatibilityRelation,
    bound_heuristic,
    case_study_path,
    check_substitutable,
    compile_problem,
    discard_counterexample_path,
    explicit_search,
    load_services,
    render_script,
    replay,
    schedule_trace,
    simulate,
)

from conftest import requires_solver

SEQ = ["checkSongExists", "searchSongs", "getSong"]
# schedule of the published LyricWiki-to-ChartLyrics mapping, idle rows dropped
TABLE_MOVES = [
    ("checkSongExists", None),
    (None, "SearchLyric"),
    ("searchSongs", None),
    ("getSong", None),
    (None, "GetLyric"),
]


@pytest.fixture(scope="module")
def lyrics():
    return load_services(case_study_path())


@pytest.fixture(scope="module")
def cx():
    return load_services(discard_counterexample_path())


def nonzero(counters):
    return {c: n for c, n in counters.items() if n}


def test_case_study_models(lyrics):
    assert lyrics.actual.states == ["start", "SearchLyric_start", "end"]
    assert len(lyrics.actual.transitions) == 5
    assert lyrics.expected.states == ["start", "s1", "s2", "s3", "s4", "s5", "s6"]
    assert ("s6", "end") in lyrics.compat and ("start", "start") in lyrics.compat


def _doc(lyrics):
    return json.loads(json.dumps(lyrics.to_dict()))


def test_dangling_state(lyrics):
    doc = _doc(lyrics)
    doc["actual"]["transitions"][0]["from"] = "limbo"
    with pytest.raises(ModelError, match="limbo"):
        load_services(doc)


def test_duplicate_state(lyrics):
    doc = _doc(lyrics)
    doc["expected"]["states"].append("s1")
    with pytest.raises(ModelError, match="duplicate"):
        load_services(doc)


def test_schema_violation(lyrics):
    doc = _doc(lyrics)
    del doc["expected"]["initial"]
    with pytest.raises(ModelError, match="schema"):
        load_services(doc)
    doc = _doc(lyrics)
    doc["compatibility"]["states"].append(["s6", "nowhere"])
    with pytest.raises(ModelError, match="nowhere"):
        load_services(doc)


def test_load_from_path_and_text(lyrics):
    text = case_study_path().read_text()
    assert load_services(text).to_dict() == lyrics.to_dict()


def test_sequence_must_be_a_path(lyrics):
    with pytest.raises(ProblemError, match="not enabled"):
        compile_problem(["getSong"], lyrics)
    with pytest.raises(ProblemError, match="no operation"):
        compile_problem(["fly"], lyrics)
    with pytest.raises(ProblemError):
        compile_problem(SEQ, lyrics, strategy="hoard")


def test_bound_heuristic(lyrics):
    assert bound_heuristic(lyrics, SEQ) == 10
    assert bound_heuristic(lyrics, ["checkSongExists", "searchSongs", "searchSongs", "searchSongs"]) == 12
    one = ServiceLTS("one", ["s"], "s")
    assert bound_heuristic(Services(one, one, CompatibilityRelation.of([("s", "s")])), []) == 2


def test_counter_updates_match_the_mapping_script(lyrics):
    snaps = [nonzero(c) for _, _, c in simulate(lyrics, TABLE_MOVES)]
    assert snaps[1] == {"seen_song": 1, "seen_artist": 1, "needed_lyricsId": 1, "needed_lyricCheckSum": 1}
    assert snaps[2] == {
        "needed_song": -1, "needed_artist": -1, "needed_artistUrl": -1, "needed_songRank": -1, "needed_songUrl": -1,
    }
    assert snaps[3]["seen_song"] == snaps[3]["seen_artist"] == 1
    assert "needed_song" not in snaps[3] and "needed_artist" not in snaps[3]
    assert snaps[4]["seen_song"] == snaps[4]["seen_artist"] == 2
    assert snaps[4]["seen_lyricCheckSum"] == snaps[4]["seen_lyricsId"] == 1
    assert snaps[4]["needed_song"] == snaps[4]["needed_artist"] == 1
    assert snaps[4]["needed_lyricCorrectUrl"] == snaps[4]["needed_lyrics"] == 1
    last = simulate(lyrics, TABLE_MOVES)[-1]
    assert last[:2] == ("s6", "end")
    assert last[2]["needed_artistUrl"] == last[2]["needed_lyricRank"] == -1
    assert all(n <= 0 for c, n in last[2].items() if c.startswith("needed_"))


def test_mapping_schedule_satisfies_the_formula(lyrics):
    f, v = compile_problem(SEQ, lyrics)
    t = schedule_trace(lyrics, TABLE_MOVES, 10)
    assert evaluate(f, t, 0)
    script = render_script(t, lyrics, v, SEQ)
    assert script.actual_ops == ["SearchLyric", "GetLyric"]
    assert replay(script, lyrics, SEQ) == []
    idle_actual = [s for s in script.steps[1:] if s.actual_op is None and s.expected_state == "s5"]
    assert idle_actual and idle_actual[0].expected_op.name == "getSong"
    # a schedule that breaks the data flow is rejected by the formula
    bad = schedule_trace(lyrics, [("checkSongExists", None), (None, "SearchLyric"), ("searchSongs", None)], 10)
    assert not evaluate(f, bad, 0)


def test_render_without_activity(lyrics):
    f, v = compile_problem([], lyrics)
    t = schedule_trace(lyrics, [], 3)
    assert evaluate(f, t, 0)
    script = render_script(t, lyrics, v, [])
    assert len(script.steps) == 1 and script.actual_ops == []


def test_replay_detects_tampering(lyrics):
    f, v = compile_problem(SEQ, lyrics)
    script = render_script(schedule_trace(lyrics, TABLE_MOVES, 10), lyrics, v, SEQ)
    script.steps[2].counters["seen_song"] += 1
    assert any("counters differ" in p for p in replay(script, lyrics, SEQ))
    script.final_actual = "start"
    assert any("final" in p for p in replay(script, lyrics))


def test_simulate_rejects_overdraw(lyrics):
    with pytest.raises(ProblemError, match="overdraws"):
        simulate(lyrics, [(None, "SearchLyric")])


def test_discard_floor(cx):
    moves = [("ask", "fetch"), ("ask", "tick"), ("ask", "tick"), ("want", None)]
    assert simulate(cx, moves, "store")[-1][2]["needed_r"] == 0
    assert simulate(cx, moves, "discard")[-1][2]["needed_r"] == 1


def test_explicit_search_counterexample(cx):
    seq = ["ask", "ask", "ask", "want"]
    k = bound_heuristic(cx, seq)
    assert k == 5
    assert explicit_search(seq, cx, "store", k) == 3
    assert explicit_search(seq, cx, "discard", k) is None
    assert explicit_search(seq, cx, "discard", 6) == 3


@requires_solver
def test_case_study(lyrics, solver):
    res = check_substitutable(SEQ, lyrics, "store", config=solver)
    assert res.status == "substitutable" and res.k == 10
    s = res.script
    assert s.actual_ops == ["SearchLyric", "GetLyric"]
    assert s.expected_ops == SEQ
    assert (s.final_expected, s.final_actual) == ("s6", "end")
    fin = s.final_counters
    assert all(n <= 0 for c, n in fin.items() if c.startswith("needed_"))
    assert fin["needed_artistUrl"] == fin["needed_lyricRank"] == -1
    assert replay(s, lyrics, SEQ) == []


@requires_solver
def test_discard_counterexample(cx, solver):
    seq = ["ask", "ask", "ask", "want"]
    assert check_substitutable(seq, cx, "store", config=solver).status == "substitutable"
    assert check_substitutable(seq, cx, "discard", config=solver).status == "not-substitutable"
    res = check_substitutable(seq, cx, "discard", k=6, config=solver)
    assert res.substitutable and replay(res.script, cx, seq) == []


@requires_solver
def test_empty_final_compatibility(lyrics, solver):
    doc = lyrics.to_dict()
    doc["compatibility"]["states"] = [["start", "start"]]
    res = check_substitutable(SEQ, load_services(doc), config=solver)
    assert res.status == "not-substitutable"


@requires_solver
def test_empty_sequence(lyrics, solver):
    res = check_substitutable([], lyrics, config=solver)
    assert res.substitutable
    assert res.script.actual_ops == [] and len(res.script.steps) == 1


def random_pair(rng):
    types = ["a", "b", "c"]

    def svc(name, n_states, n_trans):
        states = [f"{name}{i}" for i in range(n_states)]
        trs, used = [], set()
        for j in range(n_trans):
            src = rng.choice(states)
            op = f"{name}op{rng.randrange(3)}"
            if (src, op) in used:
                continue
            used.add((src, op))
            trs.append({
                "from": src, "op": op, "to": rng.choice(states),
                "inputs": rng.sample(types, rng.randint(0, 2)),
                "outputs": [rng.choice(types) for _ in range(rng.randint(0, 3))],
            })
        return {"name": name, "states": states, "initial": states[0], "transitions": trs}

    e, a = svc("e", rng.randint(1, 3), 4), svc("a", rng.randint(1, 3), 4)
    pairs = [[s, t] for s in e["states"] for t in a["states"] if rng.random() < 0.6]
    services = load_services({"expected": e, "actual": a, "compatibility": {"states": pairs}})
    # random walk for the expected sequence
    seq, state = [], services.expected.initial
    for _ in range(rng.randint(0, 3)):
        options = [tr for tr in services.expected.transitions if tr.source == state]
        if not options:
            break
        tr = rng.choice(options)
        seq.append(tr.op.name)
        state = tr.target
    return services, seq


@requires_solver
@pytest.mark.slow
def test_solver_matches_explicit_search_and_strategy_dominance(solver):
    rng = random.Random(2024)
    for _ in range(25):
        services, seq = random_pair(rng)
        k = min(bound_heuristic(services, seq), 6)
        verdicts = {}
        for strategy in ("store", "discard"):
            res = check_substitutable(seq, services, strategy, k, solver)
            want = explicit_search(seq, services, strategy, k)
            assert res.substitutable == (want is not None), (services.to_dict(), seq, strategy)
            if res.substitutable:
                assert len(res.script.actual_ops) == want
                assert replay(res.script, services, seq) == []
            verdicts[strategy] = res.substitutable
        assert verdicts["store"] or not verdicts["discard"]


def test_compiled_formula_is_difference_logic(lyrics):
    f, v = compile_problem(SEQ, lyrics)
    info = analyze(f)
    assert (info.min_depth, info.max_depth) == (0, 1)
    assert set(v.counters) <= info.variables
