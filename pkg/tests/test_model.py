"""Model IR, instance schemas, and the three model builders."""
import random

import pytest
from hypothesis import given, strategies as st

from dynsched.model import (
    Assignment,
    Instance,
    SchemaError,
    PartialAssignment,
    FamilyMismatch,
    UnknownGroup,
    apply_patch,
    build_model,
    evaluate_assignment,
    hamming_distance,
)
from dynsched.model.core import GroundedPatch, LinearConstraint
from dynsched.solver import brute_force

from conftest import gsp_instance, nsp_instance, static_nurse_instance


class TestSchema:
    def test_missing_key_names_offender(self):
        with pytest.raises(SchemaError) as err:
            Instance.from_json("nsp", {"N": 2})
        assert "D" in str(err.value)

    def test_non_binary_availability_rejected(self):
        with pytest.raises(SchemaError) as err:
            gsp_instance(availableHours=[[1, 1, 2, 1, 1, 1], [1, 1, 1, 1, 1, 0]])
        assert "availableHours" in str(err.value)

    def test_bad_dimension_rejected(self):
        with pytest.raises(SchemaError):
            gsp_instance(taskHour=[1, 3, 5])

    def test_task_hour_out_of_range(self):
        with pytest.raises(SchemaError):
            gsp_instance(taskHour=[1, 6])

    def test_dynamic_keys_pass_through(self):
        inst = gsp_instance(A=0, H1=2, H2=4)
        assert inst.data["A"] == 0


class TestNspBuild:
    def test_family_and_group_sizes(self):
        model = build_model(nsp_instance())
        fams = {f.name: f.size for f in model.var_families}
        assert fams == {
            "nurseDayShift": 56,
            "nurseDaySlot": 42,
            "surplus": 21,
            "shortfall": 21,
        }
        sizes = {g: len(cs) for g, cs in model.constraint_groups}
        assert sizes == {
            "Availability": 56,
            "MaxOneShiftPerDay": 14,
            "ShiftSlotLink": 42,
            "Demand": 21,
            "MinHours": 2,
            "MaxHours": 2,
            "RestDays": 56,
            "MaxWorkingDays": 2,
            "NoNDAM": 12,
        }

    def test_surplus_bounded_by_nurse_count(self):
        model = build_model(nsp_instance())
        sur = model.family("surplus")
        assert (sur.lo, sur.hi) == (0, 2)

    def test_short_horizon_has_empty_weekly_group(self):
        inst = nsp_instance(
            D=5,
            availableShifts=[[[1] * 4] * 5] * 2,
            demandSlot=[[1, 1, 0]] * 5,
            restDays=[[0] * 5] * 2,
        )
        model = build_model(inst)
        assert model.group("MaxWorkingDays") == ()


class TestGspBuild:
    def test_no_tasks_means_no_task_variables(self):
        inst = Instance.from_json(
            "gsp",
            {
                "W": 1,
                "H": 3,
                "T": 0,
                "BMin": 1,
                "BMax": 3,
                "RMin": 1,
                "availableHours": [[1, 1, 1]],
                "workerTaskSkills": [[]],
                "taskHour": [],
            },
        )
        model = build_model(inst)
        assert model.num_variables() == 9
        assert {f.name for f in model.var_families} == {
            "workerHours",
            "startBlock",
            "endBlock",
        }
        report = brute_force(model)
        assert report.status == "Optimal"
        assert report.lower_bound == 0
        assert all(v == 0 for v in report.best.family_values("workerHours"))

    def test_min_block_boundary_pins_late_starts(self):
        model = build_model(gsp_instance())
        # h >= H - BMin: startBlock forced to zero (paper code boundary)
        cons = model.group("MinBlockLength")
        eqs = [c for c in cons if c.relation == "=="]
        assert len(eqs) == 2 * 2  # per worker: h in {4, 5}


class TestStaticNurseBuild:
    def test_single_cell_forced(self):
        model = build_model(static_nurse_instance(n=1, d=1, s=1, m=1))
        report = brute_force(model)
        assert report.status == "Optimal"
        assert report.best.family_values("X") == (1,)
        assert report.lower_bound == 1

    def test_two_nurse_coverage(self):
        model = build_model(static_nurse_instance(n=2, d=1, s=1, m=0))
        report = brute_force(model)
        assert report.status == "Optimal"
        assert report.lower_bound == 1


def _gsp_tiny():
    return Instance.from_json(
        "gsp",
        {
            "W": 1,
            "H": 3,
            "T": 1,
            "BMin": 1,
            "BMax": 3,
            "RMin": 1,
            "availableHours": [[1, 1, 1]],
            "workerTaskSkills": [[1]],
            "taskHour": [0],
        },
    )


def _all_zero(model, **overrides):
    arrays = {}
    for fam in model.var_families:
        arrays[fam.name] = tuple(overrides.get(fam.name, (0,) * fam.size))
    return Assignment(arrays)


class TestEvaluateAssignment:
    def test_unassigned_task_penalty(self):
        model = build_model(_gsp_tiny())
        a = _all_zero(model, unassignedTask=(1,))
        report = evaluate_assignment(model, a)
        assert report.feasible
        assert report.objective == 1000

    def test_unassigned_violation_located(self):
        model = build_model(_gsp_tiny())
        a = _all_zero(model)
        report = evaluate_assignment(model, a)
        assert not report.feasible
        assert report.violated == (("UnassignedTask", 0),)

    def test_empty_constraints_always_feasible(self, rng):
        from dynsched.model.core import ModelIR, Objective, LinearExpr, VariableFamily

        model = ModelIR(
            "free",
            {},
            (VariableFamily("b", (4,)),),
            (),
            Objective("minimize", LinearExpr(())),
        )
        for _ in range(20):
            a = Assignment({"b": tuple(rng.randint(0, 1) for _ in range(4))})
            assert evaluate_assignment(model, a).feasible

    def test_partial_assignment_rejected(self):
        model = build_model(_gsp_tiny())
        with pytest.raises(PartialAssignment):
            evaluate_assignment(model, Assignment({"workerHours": (0, 0, 0)}))


class TestHamming:
    def test_identity(self):
        a = Assignment({"b": (1, 0, 1, 0, 1, 1)})
        assert hamming_distance(a, a, "b") == 0

    def test_single_flip(self):
        a = Assignment({"b": (1, 0, 1, 0, 1, 1)})
        b = Assignment({"b": (1, 0, 0, 0, 1, 1)})
        assert hamming_distance(a, b, "b") == 1

    def test_complement(self):
        a = Assignment({"b": (1, 0, 1, 0, 1, 1)})
        b = Assignment({"b": tuple(1 - v for v in a.family_values("b"))})
        assert hamming_distance(a, b, "b") == 6

    def test_dimension_mismatch(self):
        a = Assignment({"b": (1, 0)})
        b = Assignment({"b": (1, 0, 0)})
        with pytest.raises(FamilyMismatch):
            hamming_distance(a, b, "b")

    @given(
        st.lists(st.integers(0, 1), min_size=5, max_size=5),
        st.lists(st.integers(0, 1), min_size=5, max_size=5),
        st.lists(st.integers(0, 1), min_size=5, max_size=5),
    )
    def test_metric_properties(self, xs, ys, zs):
        a = Assignment({"f": tuple(xs)})
        b = Assignment({"f": tuple(ys)})
        c = Assignment({"f": tuple(zs)})
        dab = hamming_distance(a, b, "f")
        assert dab >= 0
        assert (dab == 0) == (xs == ys)
        assert dab == hamming_distance(b, a, "f")
        assert hamming_distance(a, c, "f") <= dab + hamming_distance(b, c, "f")


class TestApplyPatch:
    def test_empty_patch_is_identity(self):
        model = build_model(static_nurse_instance())
        assert apply_patch(model, GroundedPatch()) == model

    def test_unavailability_patch_grounds_four_constraints(self):
        # nurse A=0 off days 0..1 over 2 shifts; 3 nurses keep coverage feasible
        model = build_model(static_nurse_instance(n=3, d=3, s=2))
        cons = tuple(
            LinearConstraint(((1, "X", (0 * 3 + d) * 2 + s),), "==", 0)
            for d in (0, 1)
            for s in (0, 1)
        )
        patched = apply_patch(model, GroundedPatch(new_groups=(("dyn_1", cons),)))
        assert len(patched.group("dyn_1")) == 4
        report = brute_force(patched)
        x = report.best.family_values("X")
        for d in (0, 1):
            for s in (0, 1):
                assert x[(0 * 3 + d) * 2 + s] == 0

    def test_relax_removes_group_only(self):
        model = build_model(nsp_instance())
        patched = apply_patch(model, GroundedPatch(relaxed=("NoNDAM",)))
        assert "NoNDAM" not in patched.group_names()
        for name, cons in model.constraint_groups:
            if name != "NoNDAM":
                assert patched.group(name) == cons

    def test_relax_unknown_group(self):
        model = build_model(nsp_instance())
        with pytest.raises(UnknownGroup):
            apply_patch(model, GroundedPatch(relaxed=("Bogus",)))

    def test_apply_then_relax_roundtrip(self):
        model = build_model(static_nurse_instance())
        cons = (LinearConstraint(((1, "X", 0),), "==", 0),)
        patched = apply_patch(model, GroundedPatch(new_groups=(("dyn_1", cons),)))
        undone = apply_patch(patched, GroundedPatch(relaxed=("dyn_1",)))
        assert undone == model

    def test_original_model_not_mutated(self):
        model = build_model(static_nurse_instance())
        before = model.group_names()
        apply_patch(model, GroundedPatch(relaxed=("ShiftCoverage",)))
        assert model.group_names() == before
