#!/usr/bin/env python3
"""Regenerates all shipped data: seed store, test corpus, replay fixtures.

Everything is deterministic. The script replays the real pipeline against
scripted responses while recording prompts, then asserts that evaluating
the recorded fixtures reproduces the expected outcome tables before
writing anything. Run from the repo root:

    python scripts/make_fixtures.py
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from dynsched import agents, evalharness
from dynsched.agents import RecordingBackend
from dynsched.evalharness import Outcome, load_testset, run_testset
from dynsched.rag import Store
from dynsched.solver import SolveLimits

DATA = ROOT / "src" / "dynsched" / "data"
FIXTURES = DATA / "fixtures"

LIMITS = SolveLimits(time_limit=10.0)

# ---------------------------------------------------------------------------
# corpus instances
# ---------------------------------------------------------------------------

GSP_BASE = {
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

# the base optimum: worker0 covers task 0 with block h1-h2, worker1 covers
# task 1 with block h3-h4 (verified below)
GSP_ORIG = [[0, 1, 1, 0, 0, 0], [0, 0, 0, 1, 1, 0]]

NSP_BASE = {
    "N": 2,
    "D": 7,
    "S": 3,
    "T": 3,
    "availableShifts": [[[1, 1, 1]] * 7, [[1, 1, 1]] * 7],
    "shiftSlot": [0, 1, 2],
    "shiftHours": [8, 8, 8],
    "demandSlot": [[1, 1, 0]] * 7,
    "restDays": [[0] * 7, [0] * 7],
    "MinHours": 0,
    "MaxHours": 56,
    "MaxWorkingDays": 7,
}

NSP_ORIG = [
    [[1, 0, 0]] * 7,  # nurse 0 works AM every day
    [[0, 1, 0]] * 7,  # nurse 1 works PM every day
]


def inst(base: dict, **extra) -> dict:
    data = json.loads(json.dumps(base))
    data.update(extra)
    return data


INSTANCES = {
    "gsp-unavail": inst(GSP_BASE, A=0, H1=2, H2=4),
    "gsp-dayoff": inst(GSP_BASE),
    "gsp-minhours": inst(GSP_BASE, A=0, MinHoursA=3),
    "gsp-fair": inst(GSP_BASE),
    "gsp-perturb": inst(GSP_BASE, origSchedule=GSP_ORIG, T_perturb=2),
    "gsp-together": inst(GSP_BASE),
    "gsp-taskcover": inst(GSP_BASE),
    "nsp-dayoff": inst(NSP_BASE, K=0, D1=2),
    "nsp-unavail": inst(NSP_BASE, A=1, D1=4, D2=5),
    "nsp-mindays": inst(NSP_BASE, MinDays0=7),
    "nsp-perturb": inst(NSP_BASE, origSchedule=NSP_ORIG, T_perturb=2),
    "nsp-nond": inst(NSP_BASE),
    "nsp-fixshift": inst(NSP_BASE),
    "nsp-nosurplus": inst(NSP_BASE),
}

# ---------------------------------------------------------------------------
# case groups: id -> (kind, instance ref, target patch, [5 phrasings])
# ---------------------------------------------------------------------------

GROUPS: dict[str, dict] = {
    "gsp-unavail": {
        "kind": "gsp",
        "target": (
            "param A\nparam H1\nparam H2\n"
            "constraint forall h in H1..H2: workerHours[A,h] == 0\n"
        ),
        "nl": [
            "Add a constraint such that worker A does not work from hours H1 to H2.",
            "Worker A must not be assigned any hour from H1 up to H2.",
            "Please ensure worker A is off between hour H1 and hour H2.",
            "Keep worker A free of assignments in the hours H1 through H2.",
            "No hours between H1 and H2 may be given to worker A.",
        ],
    },
    "gsp-dayoff": {
        "kind": "gsp",
        "target": "constraint workerHours[1,4] == 0\n",
        "nl": [
            "Worker 1 cannot work at hour 4.",
            "Do not assign hour 4 to worker 1.",
            "Worker 1 must have hour 4 off.",
            "Hour 4 is unavailable for worker 1.",
            "Make sure worker 1 is not scheduled at hour 4.",
        ],
    },
    "gsp-minhours": {
        "kind": "gsp",
        "target": (
            "param A\nparam MinHoursA\n"
            "constraint sum(h in 0..H : workerHours[A,h]) >= MinHoursA\n"
        ),
        "nl": [
            "Worker A must work at least MinHoursA hours in total.",
            "Guarantee worker A a total of at least MinHoursA working hours.",
            "The total hours assigned to worker A must be MinHoursA or more.",
            "Worker A needs no fewer than MinHoursA hours overall.",
            "Assign worker A at least MinHoursA hours across the horizon.",
        ],
    },
    "gsp-fair": {
        "kind": "gsp",
        "target": (
            "constraint sum(h in 0..H : workerHours[0,h]) >= "
            "sum(h in 0..H : workerHours[1,h])\n"
        ),
        "nl": [
            "Worker 0 must work at least as many hours as worker 1.",
            "The total hours of worker 0 must not be below the total hours of worker 1.",
            "Ensure worker 0's workload is greater than or equal to worker 1's.",
            "Worker 1 may not work more hours than worker 0.",
            "Keep worker 0's total hours at or above worker 1's total.",
        ],
    },
    "gsp-perturb": {
        "kind": "gsp",
        "target": (
            "param origSchedule[W,H]\nparam T_perturb\n"
            "constraint hamming(workerHours, origSchedule) <= T_perturb\n"
        ),
        "nl": [
            "Add a constraint such that the schedule does not change too much from the original schedule. The number of changes must not exceed T_perturb.",
            "The new schedule may differ from origSchedule in at most T_perturb cells.",
            "Limit schedule changes against the original schedule to T_perturb.",
            "Keep the repaired schedule within T_perturb changes of origSchedule.",
            "At most T_perturb assignments may change relative to the original schedule.",
        ],
    },
    "gsp-together": {
        "kind": "gsp",
        "target": (
            "constraint sum(h in 0..H : workerHours[0,h]) == "
            "sum(h in 0..H : workerHours[1,h])\n"
        ),
        "nl": [
            "Workers 0 and 1 must work the same total number of hours.",
            "Balance the workload: worker 0 and worker 1 get equal total hours.",
            "The two workers must end up with identical total hours.",
            "Give worker 0 exactly as many hours as worker 1.",
            "Total assigned hours must be equal between the two workers.",
        ],
    },
    "gsp-taskcover": {
        "kind": "gsp",
        "target": "constraint forall t in 0..T: unassignedTask[t] == 0\n",
        "nl": [
            "Every task must be assigned; unassigned tasks are not allowed.",
            "No task may remain without a worker.",
            "All tasks have to be covered by some worker.",
            "Forbid leaving any task unassigned.",
            "Each task must be assigned to a worker, without exception.",
        ],
    },
    "nsp-dayoff": {
        "kind": "nsp",
        "target": (
            "param K\nparam D1\n"
            "constraint forall s in 0..S: nurseDayShift[K,D1,s] == 0\n"
        ),
        "nl": [
            "Nurse K is not available to work on day D1.",
            "Nurse K cannot work on day D1.",
            "Do not assign nurse K any shift on day D1.",
            "On day D1, nurse K is unavailable for every shift.",
            "Make sure nurse K has day D1 off.",
        ],
    },
    "nsp-unavail": {
        "kind": "nsp",
        "target": (
            "param A\nparam D1\nparam D2\n"
            "constraint forall d in D1..D2+1, s in 0..S: nurseDayShift[A,d,s] == 0\n"
        ),
        "nl": [
            "Add a constraint such that nurse A is not available from day D1 to D2.",
            "Nurse A is on leave from day D1 through day D2.",
            "Nurse A cannot take any shift between days D1 and D2 inclusive.",
            "Block every assignment of nurse A on days D1 to D2.",
            "From day D1 until day D2, nurse A must not work.",
        ],
    },
    "nsp-mindays": {
        "kind": "nsp",
        "target": (
            "param MinDays0\n"
            "constraint sum(d in 0..D, s in 0..S : nurseDayShift[0,d,s]) >= MinDays0\n"
        ),
        "nl": [
            "Nurse 0 must be scheduled on at least MinDays0 days.",
            "Guarantee nurse 0 a minimum of MinDays0 working days.",
            "Nurse 0 has to work MinDays0 days or more in total.",
            "Schedule nurse 0 for no fewer than MinDays0 days.",
            "The number of days nurse 0 works must reach MinDays0.",
        ],
    },
    "nsp-perturb": {
        "kind": "nsp",
        "target": (
            "param origSchedule[N,D,S]\nparam T_perturb\n"
            "constraint hamming(nurseDayShift, origSchedule) <= T_perturb\n"
        ),
        "nl": [
            "The number of changes to the schedule should not exceed T_perturb.",
            "Stay within T_perturb changes of the original roster.",
            "The repaired roster may differ from origSchedule in at most T_perturb cells.",
            "Keep schedule perturbation below or equal to T_perturb.",
            "Limit roster changes against the original schedule to T_perturb.",
        ],
    },
    "nsp-nond": {
        "kind": "nsp",
        "target": "constraint forall d in 0..D: nurseDayShift[1,d,2] == 0\n",
        "nl": [
            "Nurse 1 must never take the night shift.",
            "Do not give nurse 1 any night shifts.",
            "Night shifts are off limits for nurse 1.",
            "Nurse 1 cannot be assigned shift 2 on any day.",
            "Keep nurse 1 out of the night shift on every day.",
        ],
    },
    "nsp-fixshift": {
        "kind": "nsp",
        "target": "constraint nurseDayShift[0,0,0] == 1\n",
        "nl": [
            "Nurse 0 must work the morning shift on day 0.",
            "Assign the day-0 morning shift to nurse 0.",
            "On day 0, nurse 0 takes shift 0.",
            "Fix nurse 0 into the morning shift of day 0.",
            "Day 0, shift 0 has to go to nurse 0.",
        ],
    },
    "nsp-nosurplus": {
        "kind": "nsp",
        "target": "constraint forall d in 0..D, t in 0..T: surplus[d,t] == 0\n",
        "nl": [
            "Do not overstaff: no surplus is allowed on any day or slot.",
            "Overstaffing is forbidden on every day and slot.",
            "Surplus staffing must be zero everywhere.",
            "Never assign more nurses than the demand requires.",
            "The surplus must be zero for each day and each slot.",
        ],
    },
}

GROUP_ORDER = [
    "gsp-unavail",
    "gsp-dayoff",
    "gsp-minhours",
    "gsp-fair",
    "gsp-perturb",
    "gsp-together",
    "gsp-taskcover",
    "nsp-dayoff",
    "nsp-unavail",
    "nsp-mindays",
    "nsp-perturb",
    "nsp-nond",
    "nsp-fixshift",
    "nsp-nosurplus",
]

# ---------------------------------------------------------------------------
# flawed responses per backend (everything else answers the target patch)
# ---------------------------------------------------------------------------

WRONG_FEASIBLE = {
    # objective differs from the target's; all verified by assertion below
    "gsp-fair": (
        "constraint sum(h in 0..H : workerHours[0,h]) >= "
        "sum(h in 0..H : workerHours[1,h]) + 1\n"
    ),
    "gsp-minhours": (
        "param A\nparam MinHoursA\n"
        "constraint sum(h in 0..H : workerHours[A,h]) >= MinHoursA + 1\n"
    ),
    "gsp-together": (
        "constraint forall h in 0..H: workerHours[0,h] == workerHours[1,h]\n"
    ),
    "gsp-perturb": (
        "param origSchedule[W,H]\nparam T_perturb\n"
        "constraint hamming(workerHours, origSchedule) >= T_perturb + 1\n"
    ),
    "gsp-dayoff": "constraint workerHours[1,3] == 0\n",
    "gsp-unavail": (
        "param H1\nparam H2\n"
        "constraint forall h in H1..H2: workerHours[1,h] == 0\n"
    ),
    "gsp-taskcover": "constraint forall t in 0..T: unassignedTask[t] == 1\n",
}

SYNTAX_BAD = [
    "constraint forall d in 0..D nurseDayShift[1,d,2] == 0\n",
    "constraint forall d in 0..D: nurseDayShift[1,d,2] = 0\n",
    "constraint forall d in 0..D: nurseDayShift[1 d 2] == 0\n",
]

GSP_SYNTAX_BAD = [
    "constraint sum(h in 0..H) workerHours[0,h] >= 1\n",
    "constraint sum(h in 0..H : workerHours[0,h] >= 1\n",
    "constraint total(workerHours[0]) >= 1\n",
]

INFEASIBLE_GSP = "constraint forall h in 0..H: workerHours[0,h] == 1\n"
INFEASIBLE_NSP = "constraint forall s in 0..S: nurseDayShift[0,2,s] == 1\n"

KEYERROR_GSP = [
    "param reducedHours\nconstraint sum(h in 0..H : workerHours[0,h]) <= reducedHours\n",
    "param MaxConsecutiveHours\nconstraint sum(h in 0..H : workerHours[0,h]) <= MaxConsecutiveHours\n",
    "param WorkerLimit\nconstraint sum(h in 0..H : workerHours[1,h]) <= WorkerLimit\n",
    "param MinWorkHours\nconstraint sum(h in 0..H : workerHours[0,h]) >= MinWorkHours\n",
    "param BlockCap\nconstraint sum(h in 0..H : workerHours[0,h]) <= BlockCap\n",
]

KEYERROR_NSP = [
    "param MaxConsecutiveAMShifts\nconstraint sum(d in 0..D : nurseDaySlot[0,d,0]) <= MaxConsecutiveAMShifts\n",
    "param reducedHours\nconstraint sum(d in 0..D, s in 0..S : nurseDayShift[0,d,s]) <= reducedHours\n",
    "param NurseLimit\nconstraint sum(d in 0..D, s in 0..S : nurseDayShift[1,d,s]) <= NurseLimit\n",
    "param D3\nconstraint forall s in 0..S: nurseDayShift[0,D3,s] == 0\n",
    "param ShiftCap\nconstraint sum(d in 0..D : nurseDayShift[0,d,0]) <= ShiftCap\n",
    "param MinRestDays\nconstraint sum(d in 0..D, s in 0..S : nurseDayShift[0,d,s]) <= 7 - MinRestDays\n",
    "param WeekendLimit\nconstraint sum(s in 0..S : nurseDayShift[0,5,s]) <= WeekendLimit\n",
]

# case id -> behavior; "match" is the default for unlisted cases
GPT4_FLAWS: dict[str, tuple[str, object]] = {
    "gsp-fair.1": ("wrong", None),
    "gsp-fair.3": ("wrong", None),
    "gsp-minhours.2": ("wrong", None),
    "gsp-together.4": ("wrong", None),
    "gsp-perturb.3": ("wrong", None),
    "gsp-dayoff.2": ("wrong", None),
    "nsp-nond.3": ("syntax", SYNTAX_BAD),
}

HAIKU_FLAWS: dict[str, tuple[str, object]] = {
    # gsp: 5 keyerror, 3 syntax, 1 infeasible, 5 wrong-feasible
    "gsp-unavail.1": ("keyerror", KEYERROR_GSP[0]),
    "gsp-dayoff.4": ("keyerror", KEYERROR_GSP[1]),
    "gsp-minhours.0": ("keyerror", KEYERROR_GSP[3]),
    "gsp-perturb.2": ("keyerror", KEYERROR_GSP[2]),
    "gsp-taskcover.3": ("keyerror", KEYERROR_GSP[4]),
    "gsp-fair.0": ("syntax", GSP_SYNTAX_BAD),
    "gsp-together.2": ("syntax", GSP_SYNTAX_BAD),
    "gsp-unavail.4": ("syntax", GSP_SYNTAX_BAD),
    "gsp-dayoff.0": ("infeasible", INFEASIBLE_GSP),
    "gsp-fair.2": ("wrong", None),
    "gsp-minhours.3": ("wrong", None),
    "gsp-together.1": ("wrong", None),
    "gsp-perturb.4": ("wrong", None),
    "gsp-unavail.3": ("wrong", None),
    # nsp: 7 keyerror, 1 syntax, 5 infeasible
    "nsp-dayoff.1": ("keyerror", KEYERROR_NSP[0]),
    "nsp-unavail.2": ("keyerror", KEYERROR_NSP[1]),
    "nsp-mindays.3": ("keyerror", KEYERROR_NSP[2]),
    "nsp-perturb.0": ("keyerror", KEYERROR_NSP[3]),
    "nsp-nond.4": ("keyerror", KEYERROR_NSP[4]),
    "nsp-fixshift.2": ("keyerror", KEYERROR_NSP[5]),
    "nsp-nosurplus.1": ("keyerror", KEYERROR_NSP[6]),
    "nsp-dayoff.3": ("syntax", SYNTAX_BAD),
    "nsp-unavail.0": ("infeasible", INFEASIBLE_NSP),
    "nsp-mindays.1": ("infeasible", INFEASIBLE_NSP),
    "nsp-perturb.2": ("infeasible", INFEASIBLE_NSP),
    "nsp-fixshift.4": ("infeasible", INFEASIBLE_NSP),
    "nsp-nosurplus.3": ("infeasible", INFEASIBLE_NSP),
}

EXPECTED_GPT4 = {"gsp": (0, 0, 0, 6, 29), "nsp": (0, 1, 0, 0, 34)}
EXPECTED_HAIKU = {"gsp": (5, 3, 1, 5, 21), "nsp": (7, 1, 5, 0, 22)}


def build_testset() -> dict:
    cases = []
    for group in GROUP_ORDER:
        spec = GROUPS[group]
        for k, nl in enumerate(spec["nl"]):
            cases.append(
                {
                    "id": f"{group}.{k}",
                    "kind": spec["kind"],
                    "instance": group,
                    "nl_constraint": nl,
                    "target_patch": spec["target"],
                    "group": group,
                }
            )
    return {"version": 1, "instances": INSTANCES, "cases": cases}


def plan_response_for(target_patch: str, nl: str) -> str:
    """A well-formed three-section plan derived from the target patch."""
    params = []
    for line in target_patch.splitlines():
        line = line.strip()
        if line.startswith("param "):
            name = line.split()[1].split("[")[0]
            params.append(f"{name}: value read from the instance data")
    lines = ["New Parameters:"]
    lines.extend(params if params else ["None"])
    lines.append("New Variables:")
    lines.append("None")
    lines.append("New Constraints:")
    lines.append(nl)
    return "\n".join(lines) + "\n"


class QueueBackend:
    """Scripted backend: answers from a queue, in order."""

    name = "scripted"

    def __init__(self):
        self.queue: list[str] = []

    def push(self, *responses: str):
        self.queue.extend(responses)

    def complete(self, prompt: str) -> str:
        if not self.queue:
            raise AssertionError("scripted backend ran out of responses")
        return self.queue.pop(0)


def seed_store() -> Store:
    """Database-set examples: GSP pairs for the planning and coding stages."""
    store = Store()
    gsp_blurb = (
        "You are tasked to solve a worker scheduling problem. Workers are "
        "assigned directly to hours and to single-hour tasks, subject to "
        "availability, skill, block-length, and rest constraints."
    )
    pairs = [
        (
            "Formulate a constraint such that worker A does not work from hours H1 to H2.",
            "New Parameters:\nA: worker affected from hours H1 to H2\n"
            "H1: start of the blocked hours\nH2: end of the blocked hours\n"
            "New Variables:\nNone\n"
            "New Constraints:\nworkerHours[A,h] = 0 for each h in range(H1,H2)\n",
            "param A\nparam H1\nparam H2\n"
            "constraint forall h in H1..H2: workerHours[A,h] == 0\n",
        ),
        (
            "Worker B must work at least MinB hours in total.",
            "New Parameters:\nB: worker with a minimum workload\nMinB: minimum total hours\n"
            "New Variables:\nNone\n"
            "New Constraints:\nsum of workerHours[B,h] over h >= MinB\n",
            "param B\nparam MinB\n"
            "constraint sum(h in 0..H : workerHours[B,h]) >= MinB\n",
        ),
        (
            "The schedule must stay within T_perturb changes of the original schedule.",
            "New Parameters:\norigSchedule: the original worker-hour schedule\n"
            "T_perturb: maximum number of changed cells\n"
            "New Variables:\nNone\n"
            "New Constraints:\nhamming distance between workerHours and origSchedule <= T_perturb\n",
            "param origSchedule[W,H]\nparam T_perturb\n"
            "constraint hamming(workerHours, origSchedule) <= T_perturb\n",
        ),
        (
            "Every task has to be assigned to some worker.",
            "New Parameters:\nNone\n"
            "New Variables:\nNone\n"
            "New Constraints:\nunassignedTask[t] = 0 for every task t\n",
            "constraint forall t in 0..T: unassignedTask[t] == 0\n",
        ),
    ]
    items = []
    for i, (nl, plan_out, patch_out) in enumerate(pairs):
        items.append(("planning", f"{gsp_blurb}\nNew Constraint:\n{nl}", plan_out, f"seed-plan-{i}"))
        items.append(("coding", f"{nl}\n{plan_out}", patch_out, f"seed-code-{i}"))
    store.add_many(items)
    return store


def record_fixture(name: str, testset_path: Path, flaws: dict, store: Store, expected: dict) -> dict:
    cases = load_testset(testset_path)
    scripted = QueueBackend()
    backend = RecordingBackend(scripted)

    for case in cases:
        behavior, payload = flaws.get(case.id, ("match", None))
        scripted.push(plan_response_for(case.target_patch, case.nl_constraint))
        if behavior == "match":
            scripted.push(case.target_patch)
        elif behavior == "wrong":
            scripted.push(WRONG_FEASIBLE[case.group])
        elif behavior == "infeasible":
            scripted.push(payload)
        elif behavior == "keyerror":
            # hallucinated parameter: bind fails, both repairs repeat it
            text = payload
            scripted.push(text, text.replace("constraint", "constraint ", 1), text + "# retry\n")
        elif behavior == "syntax":
            scripted.push(*payload)
        else:
            raise AssertionError(behavior)

    table, records = run_testset(cases, backend, store, LIMITS)
    for kind, want in expected.items():
        got = table.row_counts(kind)
        if got != want:
            detail = {r.case_id: (r.outcome.value, r.gen_error) for r in records if r.kind == kind}
            raise AssertionError(f"{name}: {kind} row {got} != expected {want}\n{detail}")
    assert not scripted.queue, f"{name}: {len(scripted.queue)} scripted responses unused"
    print(f"{name}: table verified")
    print(table.render_text())
    return {"version": 1, "name": name, "records": backend.records}


def motivating_chain() -> tuple[dict, dict]:
    """Fixture + instance data for the motivating static-nurse prompt chain."""
    N, D, S, M = 4, 7, 3, 3
    pref = [
        [[0 if (n + d + s) % 4 == 3 else 1 for s in range(S)] for d in range(D)]
        for n in range(N)
    ]
    instance = {"N": N, "D": D, "S": S, "M": M, "P": pref, "A": 0, "D1": 1, "D2": 3}

    # suboptimal feasible roster for the perturbation sweep: nurse (d+s+1)%N
    # takes shift s on day d, deliberately crossing preference holes
    orig = [[[0] * S for _ in range(D)] for _ in range(N)]
    for d in range(D):
        for s in range(S):
            orig[(d + s + 1) % N][d][s] = 1

    nl1 = "Add a constraint such that nurse A is not available from day D1 to D2."
    patch1 = (
        "param A\nparam D1\nparam D2\n"
        "constraint forall d in D1..D2+1, s in 0..S: X[A,d,s] == 0\n"
    )
    nl2 = (
        "Add a constraint such that the schedule generated does not change too "
        "much from the original schedule. The number of changes to the schedule "
        "should not exceed T."
    )
    patch2 = (
        "param origSchedule[N,D,S]\nparam T_perturb\n"
        "constraint hamming(X, origSchedule) <= T_perturb\n"
    )

    from dynsched.model import Instance, build_model, apply_patch
    from dynsched.dsl import bind, ground, parse
    from dynsched.solver import solve
    from dynsched.session import SessionStore, solve_session, stage_patch, accept_pending, injected_perturbation
    import tempfile

    store = seed_store()
    scripted = QueueBackend()
    backend = RecordingBackend(scripted)
    scripted.push(plan_response_for(patch1, nl1), patch1)
    scripted.push(plan_response_for(patch2, nl2), patch2)

    with tempfile.TemporaryDirectory() as tmp:
        sessions = SessionStore(tmp)
        session = sessions.create("static_nurse", instance)
        report0 = solve_session(session, LIMITS)
        assert report0.status == "Optimal", report0
        base_obj = report0.lower_bound

        class _V1:
            model = session.model
            instance = session.instance

        res1 = agents.run_pipeline(_V1, nl1, backend, store, 3)
        pending1 = stage_patch(
            session, "nl", nl1, patch1, res1.grounded, {}, res1.attempts, LIMITS
        )
        assert pending1.report.status == "Optimal"
        accept_pending(sessions, session)

        injected = injected_perturbation(session, 6)
        merged = dict(session.instance.data)
        merged.update(injected)
        work_instance = Instance.from_json("static_nurse", merged)

        class _V2:
            model = session.model
            instance = work_instance

        res2 = agents.run_pipeline(_V2, nl2, backend, store, 3)
        pending2 = stage_patch(
            session, "nl", nl2, patch2, res2.grounded, injected, res2.attempts, LIMITS
        )
        assert pending2.report.status == "Optimal"
        print(
            f"motivating chain verified: base obj {base_obj}, "
            f"patched obj {pending1.report.lower_bound}, "
            f"perturbed obj {pending2.report.lower_bound}"
        )

    fixture = {"version": 1, "name": "motivating", "records": backend.records}
    extras = {
        "instance": instance,
        "orig_schedule": orig,
        "nl1": nl1,
        "nl2": nl2,
        "t_perturb": 6,
    }
    return fixture, extras


def ui_demo_fixture(extras: dict) -> dict:
    """Fixture for the planner UI tests: one NL constraint whose first patch
    is malformed, fixed on the second coding attempt."""
    from dynsched.model import Instance, build_model

    instance = Instance.from_json("static_nurse", extras["instance"])
    model = build_model(instance)

    nl = "Nurse 3 is not available on day 6."
    bad = "constraint forall s in 0..S X[3,6,s] == 0\n"  # missing ':'
    good = "constraint forall s in 0..S: X[3,6,s] == 0\n"

    store = seed_store()
    scripted = QueueBackend()
    backend = RecordingBackend(scripted)
    scripted.push(plan_response_for(good, nl), bad, good)

    class _View:
        pass

    _View.model = model
    _View.instance = instance
    result = agents.run_pipeline(_View, nl, backend, store, 3)
    assert result.attempts == 2, result.attempts
    assert not scripted.queue
    print("ui-demo fixture verified: attempts = 2")
    return {
        "version": 1,
        "name": "ui-demo",
        "records": backend.records,
        "nl": nl,
    }


PATCH_CORPUS = [
    "param A\nparam H1\nparam H2\nconstraint forall h in H1..H2: workerHours[A,h] == 0\n",
    "param origSchedule[N,D,S]\nparam T_perturb\nconstraint hamming(nurseDayShift, origSchedule) <= T_perturb\n",
    "constraint forall t in 0..T: unassignedTask[t] == 0\n",
    "constraint sum(h in 0..H : workerHours[0,h]) >= sum(h in 0..H : workerHours[1,h])\n",
    "var extraShift[N,D] : bool\nconstraint forall n in 0..N, d in 0..D: extraShift[n,d] <= 1\n",
    "var overtime[W] : int(0, 12)\nconstraint forall w in 0..W: overtime[w] <= 10\n",
    "relax NoNDAM\n",
    "relax MaxWorkingDays\nconstraint forall n in 0..N: sum(d in 0..D, s in 0..S : nurseDayShift[n,d,s]) <= 6\n",
    "constraint forall d in 0..D, t in 0..T: surplus[d,t] == 0\n",
    "constraint forall n in 0..N: sum(d in 0..D, s in 0..S : nurseDayShift[n,d,s] * shiftHours[s]) <= 40\n",
    "constraint nurseDayShift[0,0,0] == 1\n",
    "constraint forall s in 0..S: nurseDayShift[K,D1,s] == 0\n",
    "param Quota\nconstraint sum(n in 0..N, d in 0..D, s in 0..S : nurseDayShift[n,d,s]) >= Quota\n",
    "constraint (sum(h in 0..H : workerHours[0,h]) - sum(h in 0..H : workerHours[1,h])) <= 2\n",
    "constraint 2 * sum(h in 0..H : workerHours[0,h]) >= 3\n",
    "constraint forall w in 0..W, h in 0..H: workerHours[w,h] <= availableHours[w,h]\n",
    "constraint sum(d in 0..D : sum(s in 0..S : nurseDayShift[1,d,s])) <= 5\n",
    "param Cap\nvar slack[D] : int(0, 9)\nconstraint forall d in 0..D: sum(s in 0..S : nurseDayShift[0,d,s]) - slack[d] <= Cap\n",
    "constraint forall h in 2..5: workerHours[1,h] == workerHours[0,h]\n",
    "constraint sum(t in 0..T : unassignedTask[t]) <= 1 - 1 + 1\n",
]


def main() -> int:
    DATA.mkdir(parents=True, exist_ok=True)
    FIXTURES.mkdir(parents=True, exist_ok=True)

    store = seed_store()
    store.save(DATA / "seed_store.json")
    print(f"seed store: {len(store.examples)} examples")

    testset = build_testset()
    testset_path = DATA / "testset.json"
    testset_path.write_text(json.dumps(testset, indent=1))
    print(f"testset: {len(testset['cases'])} cases")

    gpt4 = record_fixture("gpt4-replay", testset_path, GPT4_FLAWS, store, EXPECTED_GPT4)
    (FIXTURES / "gpt4_replay.json").write_text(json.dumps(gpt4, indent=1))

    haiku = record_fixture("haiku-replay", testset_path, HAIKU_FLAWS, store, EXPECTED_HAIKU)
    (FIXTURES / "haiku_replay.json").write_text(json.dumps(haiku, indent=1))

    fixture, extras = motivating_chain()
    (FIXTURES / "motivating.json").write_text(json.dumps(fixture, indent=1))
    (DATA / "motivating_instance.json").write_text(json.dumps(extras, indent=1))

    ui_demo = ui_demo_fixture(extras)
    (FIXTURES / "ui_demo.json").write_text(json.dumps(ui_demo, indent=1))

    # validate the patch corpus round-trips before shipping it
    from dynsched.dsl import parse, pretty_print

    for text in PATCH_CORPUS:
        assert parse(pretty_print(parse(text))) == parse(text), text
    (DATA / "patch_corpus.json").write_text(json.dumps({"version": 1, "patches": PATCH_CORPUS}, indent=1))
    print(f"patch corpus: {len(PATCH_CORPUS)} patches")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
