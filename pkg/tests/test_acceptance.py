"""Acceptance suite: one test per primary criterion, one PASS line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Everything here is offline and needs no secondary component.
"""
import json
import random
import time

import pytest

from dynsched import agents
from dynsched.agents import FixtureBackend
from dynsched.config import data_path
from dynsched.dsl import bind, ground, parse, pretty_print
from dynsched.evalharness import (
    GeneratedRun,
    Outcome,
    classify_outcome,
    interval_match,
    load_testset,
    run_testset,
    solve_patched,
)
from dynsched.model import (
    Assignment,
    Instance,
    apply_patch,
    build_model,
    checkers_for,
    evaluate_assignment,
    hamming_distance,
)
from dynsched.rag import Store
from dynsched.session import (
    SessionStore,
    accept_pending,
    diff_schedules,
    injected_perturbation,
    solve_session,
    stage_patch,
)
from dynsched.solver import SolveLimits, brute_force, solve

from conftest import random_assignment
from test_solver import _random_model

LIMITS = SolveLimits(time_limit=10.0)

MOTIVATING = json.loads(data_path("motivating_instance.json").read_text())


def _ok(name: str, detail: str = ""):
    print(f"PASS {name}" + (f" ({detail})" if detail else ""))


def test_criterion_solver_oracle_equivalence():
    """500 random models: solve == brute_force on status and objective."""
    rng = random.Random(20240811)
    started = time.monotonic()
    for i in range(500):
        model = _random_model(rng)
        got = solve(model, SolveLimits(time_limit=30))
        want = brute_force(model)
        assert got.status == want.status, f"model {i}: {got.status} vs {want.status}"
        if want.status == "Optimal":
            assert got.lower_bound == want.lower_bound == got.upper_bound, f"model {i}"
    elapsed = time.monotonic() - started
    assert elapsed < 60.0, f"took {elapsed:.1f}s"
    _ok("solver-oracle equivalence", f"500 models in {elapsed:.1f}s")


def _fidelity_instance_gsp(rng):
    w, h, t = 3, 8, 4
    return Instance.from_json(
        "gsp",
        {
            "W": w,
            "H": h,
            "T": t,
            "BMin": 2,
            "BMax": 4,
            "RMin": 1,
            "availableHours": [[rng.randint(0, 1) for _ in range(h)] for _ in range(w)],
            "workerTaskSkills": [[rng.randint(0, 1) for _ in range(t)] for _ in range(w)],
            "taskHour": [rng.randrange(h) for _ in range(t)],
        },
    )


def _fidelity_instance_nsp(rng):
    n, d, s, t = 3, 7, 4, 3
    return Instance.from_json(
        "nsp",
        {
            "N": n,
            "D": d,
            "S": s,
            "T": t,
            "availableShifts": [
                [[rng.randint(0, 1) for _ in range(s)] for _ in range(d)] for _ in range(n)
            ],
            "shiftSlot": [0, 1, 2, rng.randrange(t)],
            "shiftHours": [4, 4, 8, 8],
            "demandSlot": [[rng.randint(0, 2) for _ in range(t)] for _ in range(d)],
            "restDays": [[rng.randint(0, 1) for _ in range(d)] for _ in range(n)],
            "MinHours": 8,
            "MaxHours": 48,
            "MaxWorkingDays": 5,
        },
    )


def test_criterion_constraint_fidelity():
    """1,000 random assignments per model: grounded verdicts == checkers."""
    rng = random.Random(77)
    for make in (_fidelity_instance_gsp, _fidelity_instance_nsp):
        instance = make(rng)
        model = build_model(instance)
        checkers = checkers_for(instance.kind, instance.data)
        assert set(checkers) == set(model.group_names())
        for i in range(1000):
            a = random_assignment(model, rng)
            for gname, cons in model.constraint_groups:
                grounded_verdict = all(c.holds(a) for c in cons)
                assert checkers[gname](a) == grounded_verdict, (instance.kind, gname, i)
    _ok("constraint fidelity", "gsp 3x8x4 + nsp 3x7x4, 1000 assignments each")


def test_criterion_motivating_example_end_to_end(tmp_path):
    """The two-step prompt chain on the shipped static-nurse instance."""
    backend = FixtureBackend.from_file(data_path("fixtures/motivating.json"))
    store = Store.load(data_path("seed_store.json"))
    instance = MOTIVATING["instance"]
    n, d_count, s_count = instance["N"], instance["D"], instance["S"]
    a_nurse, d1, d2 = instance["A"], instance["D1"], instance["D2"]

    started = time.monotonic()
    sessions = SessionStore(tmp_path)
    session = sessions.create("static_nurse", instance)
    base_report = solve_session(session, LIMITS)
    assert base_report.status == "Optimal"

    class _V1:
        model = session.model
        instance = session.instance

    result1 = agents.run_pipeline(_V1, MOTIVATING["nl1"], backend, store)
    pending1 = stage_patch(
        session, "nl", MOTIVATING["nl1"], pretty_print(result1.patch),
        result1.grounded, {}, result1.attempts, LIMITS,
    )
    assert pending1.report.status == "Optimal"
    x = pending1.report.best.family_values("X")
    for d in range(d1, d2 + 1):
        for s in range(s_count):
            assert x[(a_nurse * d_count + d) * s_count + s] == 0
    accept_pending(sessions, session)

    injected = injected_perturbation(session, MOTIVATING["t_perturb"])
    merged = dict(session.instance.data)
    merged.update(injected)
    work_instance = Instance.from_json("static_nurse", merged)

    class _V2:
        model = session.model
        instance = work_instance

    result2 = agents.run_pipeline(_V2, MOTIVATING["nl2"], backend, store)
    pending2 = stage_patch(
        session, "nl", MOTIVATING["nl2"], pretty_print(result2.patch),
        result2.grounded, injected, result2.attempts, LIMITS,
    )
    assert pending2.report.status == "Optimal"
    orig = Assignment({"X": tuple(v for plane in injected["origSchedule"] for row in plane for v in row)})
    dist = hamming_distance(pending2.report.best, orig, "X")
    assert dist <= MOTIVATING["t_perturb"]
    elapsed = time.monotonic() - started
    assert elapsed < 5.0, f"chain took {elapsed:.2f}s"
    _ok("motivating example end-to-end", f"{elapsed:.2f}s, perturbation {dist} <= {MOTIVATING['t_perturb']}")


def test_criterion_perturbation_monotonicity():
    """Objective is non-decreasing in T; T=0 reproduces the reference."""
    instance_data = dict(MOTIVATING["instance"])
    orig = MOTIVATING["orig_schedule"]
    instance_data["origSchedule"] = orig
    flat_orig = tuple(v for plane in orig for row in plane for v in row)

    patch_text = (
        "param origSchedule[N,D,S]\nparam T_perturb\n"
        "constraint hamming(X, origSchedule) <= T_perturb\n"
    )
    objectives = []
    for t in (0, 1, 2, 4, None):  # None = no perturbation bound
        data = dict(instance_data)
        if t is None:
            inst = Instance.from_json("static_nurse", MOTIVATING["instance"])
            model = build_model(inst)
            report = solve(model, LIMITS)
        else:
            data["T_perturb"] = t
            inst = Instance.from_json("static_nurse", data)
            model = build_model(inst)
            _, report = solve_patched(model, inst, patch_text, LIMITS)
        assert report.status == "Optimal", t
        objectives.append(report.lower_bound)
        if t == 0:
            assert report.best.family_values("X") == flat_orig
    assert objectives == sorted(objectives), objectives
    assert objectives[0] < objectives[-1], "sweep should be non-trivial"
    _ok("perturbation monotonicity", f"objectives {objectives} for T in (0,1,2,4,inf)")


def test_criterion_hamming_grounding_exactness():
    """All 2^12 assignments of a 12-cell family match hamming_distance."""
    rng = random.Random(5)
    ref_cells = [rng.randint(0, 1) for _ in range(12)]
    ref_nested = [[ref_cells[d * 2 + s] for s in range(2)] for d in range(6)]
    inst = Instance.from_json(
        "static_nurse",
        {
            "N": 1, "D": 6, "S": 2, "M": 0,
            "P": [[[1, 1]] * 6],
            "ref": [ref_nested],
            "T": 99,
        },
    )
    model = build_model(inst)
    patch = parse("param ref[N,D,S]\nparam T\nconstraint hamming(X, ref) <= T")
    con = ground(bind(patch, model, inst), model).new_groups[0][1][0]
    offset = 99 - con.constant
    ref_assignment = Assignment({"X": tuple(ref_cells)})
    for bits in range(4096):
        vals = tuple((bits >> i) & 1 for i in range(12))
        a = Assignment({"X": vals})
        linear = sum(c * a.value(f, o) for c, f, o in con.terms) + offset
        assert linear == hamming_distance(a, ref_assignment, "X"), bits
    _ok("hamming grounding exactness", "4096/4096 assignments")


def _replay(fixture_name):
    cases = load_testset(data_path("testset.json"))
    store = Store.load(data_path("seed_store.json"))
    backend = FixtureBackend.from_file(data_path(f"fixtures/{fixture_name}.json"))
    return run_testset(cases, backend, store, LIMITS)


def test_criterion_evaluation_replay():
    """gpt4-replay reproduces the first results table; haiku the ablation."""
    table1, records1 = _replay("gpt4_replay")
    assert table1.row_counts("gsp") == (0, 0, 0, 6, 29)
    assert table1.row_counts("nsp") == (0, 1, 0, 0, 34)
    assert table1.totals() == (0, 1, 0, 6, 63)

    table1b, records1b = _replay("gpt4_replay")
    assert table1b.to_json() == table1.to_json()
    assert [r.outcome for r in records1b] == [r.outcome for r in records1]

    table2, _ = _replay("haiku_replay")
    assert table2.row_counts("gsp") == (5, 3, 1, 5, 21)
    assert table2.row_counts("nsp") == (7, 1, 5, 0, 22)
    assert table2.totals() == (12, 4, 6, 5, 43)
    _ok("evaluation replay", "tables reproduced, deterministic across runs")


def test_criterion_interval_match_vectors():
    assert interval_match(0, 10, 4, 12) is True
    assert interval_match(0, 10, 5, 15) is False
    assert interval_match(10, 10, 10, 10) is True
    rng = random.Random(11)
    for _ in range(1000):
        lb1, lb2 = rng.randint(-50, 50), rng.randint(-50, 50)
        ub1 = lb1 + rng.randint(0, 40)
        ub2 = lb2 + rng.randint(0, 40)
        assert interval_match(lb1, ub1, lb2, ub2) == interval_match(lb2, ub2, lb1, ub1)
    _ok("interval_match unit vectors", "3 pinned cases + 1000 symmetric tuples")


def test_criterion_dsl_round_trip():
    corpus = json.loads(data_path("patch_corpus.json").read_text())["patches"]
    assert len(corpus) == 20
    for text in corpus:
        patch = parse(text)
        assert parse(pretty_print(patch)) == patch
    from test_dsl import gen_patch

    rng = random.Random(2024)
    for _ in range(200):
        patch = gen_patch(rng)
        assert parse(pretty_print(patch)) == patch
    _ok("dsl round trip", "20 corpus patches + 200 random ASTs")


def test_criterion_self_match():
    """Every case evaluated against its own target patch is a Match."""
    cases = load_testset(data_path("testset.json"))
    matches = 0
    for case in cases:
        instance = Instance.from_json(case.kind, case.instance_data)
        model = build_model(instance)
        _, target_report = solve_patched(model, instance, case.target_patch, LIMITS)
        _, gen_report = solve_patched(model, instance, case.target_patch, LIMITS)
        outcome = classify_outcome(target_report, GeneratedRun(None, gen_report))
        assert outcome == Outcome.MATCH, case.id
        matches += 1
    assert matches == 70
    _ok("self-match", "70/70")
