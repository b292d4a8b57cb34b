"""Sessions: diffs, schedule export, persistence replay."""
import pytest

from dynsched.model import Assignment, build_model, hamming_distance
from dynsched.model.core import GroundedPatch, LinearConstraint
from dynsched.session import (
    NoSchedule,
    SessionStore,
    canonical_patch_text,
    diff_schedules,
    export_schedule,
    render_schedule_text,
    solve_session,
    stage_patch,
    accept_pending,
)
from dynsched.solver import SolveLimits

from conftest import nsp_instance, static_nurse_instance, random_assignment

LIMITS = SolveLimits(time_limit=10)


class TestDiff:
    def test_identical_schedules_empty(self):
        a = Assignment({"X": (1, 0, 1, 0)})
        assert diff_schedules(a, a, "X", (2, 2)) == []

    def test_single_change(self):
        a = Assignment({"X": (1, 0, 1, 0)})
        b = Assignment({"X": (1, 1, 1, 0)})
        assert diff_schedules(a, b, "X", (2, 2)) == [((0, 1), 0, 1)]

    def test_length_equals_hamming_on_random_pairs(self, rng):
        model = build_model(nsp_instance())
        fam = model.family("nurseDayShift")
        for _ in range(50):
            a = random_assignment(model, rng)
            b = random_assignment(model, rng)
            diff = diff_schedules(a, b, fam.name, fam.dims)
            assert len(diff) == hamming_distance(a, b, fam.name)

    def test_row_major_order(self):
        a = Assignment({"X": (0, 0, 0, 0)})
        b = Assignment({"X": (1, 0, 1, 1)})
        indices = [idx for idx, _, _ in diff_schedules(a, b, "X", (2, 2))]
        assert indices == sorted(indices)


class TestExport:
    def test_single_cell_grid(self, tmp_path):
        store = SessionStore(tmp_path)
        session = store.create("static_nurse", {"N": 1, "D": 1, "S": 1, "M": 1, "P": [[[1]]]})
        solve_session(session, LIMITS)
        doc = export_schedule(session)
        assert doc["rows"] == [["s0"]]
        assert doc["objective"] == 1
        assert "s0" in render_schedule_text(doc)

    def test_unsolved_session_has_no_schedule(self, tmp_path):
        store = SessionStore(tmp_path)
        session = store.create("static_nurse", {"N": 1, "D": 1, "S": 1, "M": 1, "P": [[[1]]]})
        with pytest.raises(NoSchedule):
            export_schedule(session)

    def test_nsp_grid_has_at_most_one_shift_per_cell(self, tmp_path):
        store = SessionStore(tmp_path)
        session = store.create("nsp", dict(nsp_instance().data))
        solve_session(session, LIMITS)
        doc = export_schedule(session)
        assert len(doc["rows"]) == 2 and len(doc["rows"][0]) == 7
        from dynsched.model import evaluate_assignment

        assert evaluate_assignment(session.model, session.schedule).feasible


class TestPersistence:
    def test_replay_reproduces_model_and_report(self, tmp_path):
        store = SessionStore(tmp_path)
        data = dict(static_nurse_instance(n=3, d=3, s=2, m=1).data)
        data["P"] = [[list(r) for r in row] for row in data["P"]]
        session = store.create("static_nurse", data)
        solve_session(session, LIMITS)
        cons = (LinearConstraint(((1, "X", 0),), "==", 0),)
        stage_patch(
            session,
            "dsl",
            "constraint X[0,0,0] == 0",
            canonical_patch_text("constraint X[0,0,0] == 0"),
            GroundedPatch(new_groups=(("dyn_1", cons),)),
            {},
            1,
            LIMITS,
        )
        accept_pending(store, session)
        report_before = solve_session(session, LIMITS)

        reloaded_store = SessionStore(tmp_path)
        replayed = reloaded_store.get(session.id)
        assert replayed.model == session.model
        assert len(replayed.history) == 1
        report_after = solve_session(replayed, LIMITS)
        assert report_after == report_before

    def test_accept_requires_pending(self, tmp_path):
        store = SessionStore(tmp_path)
        session = store.create("static_nurse", {"N": 1, "D": 1, "S": 1, "M": 1, "P": [[[1]]]})
        with pytest.raises(NoSchedule):
            accept_pending(store, session)


def test_canonical_patch_text_round_trips():
    text = "constraint   forall s in 0..3:\n  X[0, 0, s] == 0"
    canonical = canonical_patch_text(text)
    assert canonical == "constraint forall s in 0..3: X[0, 0, s] == 0\n"
    assert canonical_patch_text(canonical) == canonical


def test_accept_refuses_infeasible_pending(tmp_path):
    store = SessionStore(tmp_path)
    session = store.create("static_nurse", {"N": 1, "D": 1, "S": 1, "M": 1, "P": [[[1]]]})
    solve_session(session, LIMITS)
    # pin the only cell to 0: coverage becomes unsatisfiable
    cons = (LinearConstraint(((1, "X", 0),), "==", 0),)
    pending = stage_patch(
        session, "dsl", "constraint X[0,0,0] == 0",
        "constraint X[0,0,0] == 0\n",
        GroundedPatch(new_groups=(("dyn_1", cons),)), {}, 1, LIMITS,
    )
    assert pending.report.status == "Infeasible"
    with pytest.raises(NoSchedule):
        accept_pending(store, session)
    assert session.history == []
