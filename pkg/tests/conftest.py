"""Shared instances and helpers for the test suite."""
from __future__ import annotations

import random

import pytest

from dynsched.model import Assignment, Instance, build_model


def gsp_instance(**extra) -> Instance:
    data = {
        "W": 2,
        "H": 6,
        "T": 2,
        "BMin": 2,
        "BMax": 4,
        "RMin": 1,
        "availableHours": [[1, 1, 1, 1, 1, 1], [1, 1, 1, 1, 1, 0]],
        "workerTaskSkills": [[1, 0], [1, 1]],
        "taskHour": [1, 3],
    }
    data.update(extra)
    return Instance.from_json("gsp", data)


def nsp_instance(**extra) -> Instance:
    data = {
        "N": 2,
        "D": 7,
        "S": 4,
        "T": 3,
        "availableShifts": [[[1] * 4] * 7, [[1] * 4] * 7],
        "shiftSlot": [0, 1, 2, 0],
        "shiftHours": [4, 4, 8, 8],
        "demandSlot": [[1, 1, 0]] * 7,
        "restDays": [[0] * 7, [0] * 7],
        "MinHours": 0,
        "MaxHours": 40,
        "MaxWorkingDays": 5,
    }
    data.update(extra)
    return Instance.from_json("nsp", data)


def static_nurse_instance(n=2, d=3, s=2, m=0, pref=None, **extra) -> Instance:
    if pref is None:
        pref = [[[1] * s for _ in range(d)] for _ in range(n)]
    data = {"N": n, "D": d, "S": s, "M": m, "P": pref}
    data.update(extra)
    return Instance.from_json("static_nurse", data)


def random_assignment(model, rng: random.Random) -> Assignment:
    arrays = {}
    for fam in model.var_families:
        arrays[fam.name] = tuple(rng.randint(fam.lo, fam.hi) for _ in range(fam.size))
    return Assignment(arrays)


@pytest.fixture
def rng():
    return random.Random(20240811)
