"""Instance schema validation and builders for the three scheduling models.

Instance JSON keys follow the solver input files verbatim:

* gsp: W, H, T, BMin, BMax, RMin, availableHours[W][H],
  workerTaskSkills[W][T], taskHour[T]
* nsp: N, D, S, T, availableShifts[N][D][S], shiftSlot[S], shiftHours[S],
  demandSlot[D][T], restDays[N][D], MinHours, MaxHours, MaxWorkingDays
* static_nurse: N, D, S, M, P[N][D][S]

Additional top-level keys (A, H1, H2, K, D1, D2, T_perturb, origSchedule,
...) are dynamic parameters consumed by patches and pass through untouched.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from .core import (
    Assignment,
    LinearConstraint,
    LinearExpr,
    ModelIR,
    Objective,
    SchemaError,
    VariableFamily,
    merge_terms,
)

KINDS = ("gsp", "nsp", "static_nurse")

UNASSIGNED_PENALTY = 1000  # weight per unassigned task in the gsp objective

# Slot numbering: morning, afternoon, night.
AM, PM, ND = 0, 1, 2


@dataclass(frozen=True)
class Instance:
    """A problem kind plus its (validated) data dictionary.

    Arrays are stored as nested tuples so instances are immutable and
    structurally comparable.
    """

    kind: str
    data: Mapping[str, Any]

    @staticmethod
    def from_json(kind: str, data: Mapping[str, Any]) -> "Instance":
        if kind not in KINDS:
            raise SchemaError("kind", f"unknown problem kind {kind!r}")
        frozen = {k: _freeze(v) for k, v in data.items()}
        inst = Instance(kind, frozen)
        validate_instance(inst)
        return inst


def _freeze(value):
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    return value


def _require_int(data, key, minimum=None):
    if key not in data:
        raise SchemaError(key, "missing required key")
    v = data[key]
    if not isinstance(v, int) or isinstance(v, bool):
        raise SchemaError(key, f"expected an integer, got {type(v).__name__}")
    if minimum is not None and v < minimum:
        raise SchemaError(key, f"must be >= {minimum}, got {v}")
    return v


def _require_array(data, key, dims, binary=False, lo=None, hi=None):
    if key not in data:
        raise SchemaError(key, "missing required key")

    def check(value, remaining, path):
        if not remaining:
            if not isinstance(value, int) or isinstance(value, bool):
                raise SchemaError(key, f"entry {path} is not an integer")
            if binary and value not in (0, 1):
                raise SchemaError(key, f"entry {path} must be 0 or 1, got {value}")
            if lo is not None and value < lo:
                raise SchemaError(key, f"entry {path} below {lo}")
            if hi is not None and value >= hi:
                raise SchemaError(key, f"entry {path} must be < {hi}, got {value}")
            return
        if not isinstance(value, tuple) or len(value) != remaining[0]:
            raise SchemaError(
                key, f"expected array of length {remaining[0]} at {path or 'top level'}"
            )
        for i, sub in enumerate(value):
            check(sub, remaining[1:], path + (i,))

    check(data[key], tuple(dims), ())
    return data[key]


def validate_instance(instance: Instance) -> None:
    data = instance.data
    if instance.kind == "gsp":
        w = _require_int(data, "W", 1)
        h = _require_int(data, "H", 1)
        t = _require_int(data, "T", 0)
        _require_int(data, "BMin", 1)
        _require_int(data, "BMax", 1)
        _require_int(data, "RMin", 0)
        _require_array(data, "availableHours", (w, h), binary=True)
        _require_array(data, "workerTaskSkills", (w, t), binary=True)
        _require_array(data, "taskHour", (t,), lo=0, hi=h)
    elif instance.kind == "nsp":
        n = _require_int(data, "N", 1)
        d = _require_int(data, "D", 1)
        s = _require_int(data, "S", 1)
        t = _require_int(data, "T", 1)
        _require_array(data, "availableShifts", (n, d, s), binary=True)
        _require_array(data, "shiftSlot", (s,), lo=0, hi=t)
        _require_array(data, "shiftHours", (s,), lo=0)
        _require_array(data, "demandSlot", (d, t), lo=0)
        _require_array(data, "restDays", (n, d), binary=True)
        _require_int(data, "MinHours", 0)
        _require_int(data, "MaxHours", 0)
        _require_int(data, "MaxWorkingDays", 0)
    else:  # static_nurse
        n = _require_int(data, "N", 1)
        d = _require_int(data, "D", 1)
        s = _require_int(data, "S", 1)
        _require_int(data, "M", 0)
        _require_array(data, "P", (n, d, s), binary=True)


def build_model(instance: Instance) -> ModelIR:
    """Ground the instance into the full constraint model for its kind."""
    validate_instance(instance)
    if instance.kind == "gsp":
        return _build_gsp(instance)
    if instance.kind == "nsp":
        return _build_nsp(instance)
    return _build_static_nurse(instance)


def _le(terms, rhs) -> LinearConstraint:
    return LinearConstraint(merge_terms(terms), "<=", rhs)


def _ge(terms, rhs) -> LinearConstraint:
    return LinearConstraint(merge_terms(terms), ">=", rhs)


def _eq(terms, rhs) -> LinearConstraint:
    return LinearConstraint(merge_terms(terms), "==", rhs)


def _build_gsp(instance: Instance) -> ModelIR:
    d = instance.data
    W, H, T = d["W"], d["H"], d["T"]
    bmin, bmax, rmin = d["BMin"], d["BMax"], d["RMin"]
    avail, skills, task_hour = d["availableHours"], d["workerTaskSkills"], d["taskHour"]

    x = VariableFamily("workerHours", (W, H))
    s = VariableFamily("startBlock", (W, H))
    e = VariableFamily("endBlock", (W, H))
    families = [x, s, e]
    if T > 0:
        y = VariableFamily("workerTasks", (W, T))
        u = VariableFamily("unassignedTask", (T,))
        families += [y, u]

    def xo(w, h):
        return x.offset_of((w, h))

    availability = [
        _le([(1, "workerHours", xo(w, h))], avail[w][h])
        for w in range(W)
        for h in range(H)
    ]
    skill = [
        _le([(1, "workerTasks", y.offset_of((w, t)))], skills[w][t])
        for w in range(W)
        for t in range(T)
    ]
    precedence = [
        _le(
            [(1, "workerTasks", y.offset_of((w, t))), (-1, "workerHours", xo(w, task_hour[t]))],
            0,
        )
        for w in range(W)
        for t in range(T)
    ]
    no_multi = [
        _le(
            [(1, "workerTasks", y.offset_of((w, t))) for t in range(T) if task_hour[t] == h],
            1,
        )
        for w in range(W)
        for h in range(H)
    ]

    start_block = []
    for w in range(W):
        start_block.append(
            _eq([(1, "startBlock", s.offset_of((w, 0))), (-1, "workerHours", xo(w, 0))], 0)
        )
        for h in range(1, H):
            # s[w,h] >= x[w,h] - x[w,h-1]
            start_block.append(
                _ge(
                    [
                        (1, "startBlock", s.offset_of((w, h))),
                        (-1, "workerHours", xo(w, h)),
                        (1, "workerHours", xo(w, h - 1)),
                    ],
                    0,
                )
            )
    end_block = []
    for w in range(W):
        for h in range(H - 1):
            # e[w,h] >= x[w,h] - x[w,h+1]
            end_block.append(
                _ge(
                    [
                        (1, "endBlock", e.offset_of((w, h))),
                        (-1, "workerHours", xo(w, h)),
                        (1, "workerHours", xo(w, h + 1)),
                    ],
                    0,
                )
            )
        end_block.append(
            _eq(
                [(1, "endBlock", e.offset_of((w, H - 1))), (-1, "workerHours", xo(w, H - 1))],
                0,
            )
        )

    # Minimum block length: the aggregate form where the window fits, with
    # startBlock pinned to zero too close to the horizon.
    min_block = []
    for w in range(W):
        for h in range(max(0, H - bmin)):
            min_block.append(
                _ge(
                    [(1, "workerHours", xo(w, hp)) for hp in range(h, h + bmin)]
                    + [(-bmin, "startBlock", s.offset_of((w, h)))],
                    0,
                )
            )
        for h in range(max(0, H - bmin), H):
            min_block.append(_eq([(1, "startBlock", s.offset_of((w, h)))], 0))

    # Maximum block length: sum(1 - x[w,h..h+BMax]) >= s[w,h] wherever the
    # window fits, i.e. s + sum(x) <= BMax + 1.
    max_block = [
        _le(
            [(1, "startBlock", s.offset_of((w, h)))]
            + [(1, "workerHours", xo(w, hp)) for hp in range(h, h + bmax + 1)],
            bmax + 1,
        )
        for w in range(W)
        for h in range(max(0, H - bmax))
    ]

    min_rest = [
        _le(
            [(1, "endBlock", e.offset_of((w, h))), (1, "workerHours", xo(w, hp))],
            1,
        )
        for w in range(W)
        for h in range(H)
        for hp in range(h + 1, min(H, h + rmin + 1))
    ]

    unassigned = [
        _ge(
            [(1, "workerTasks", y.offset_of((w, t))) for w in range(W)]
            + [(1, "unassignedTask", u.offset_of((t,)))],
            1,
        )
        for t in range(T)
    ]

    groups = (
        ("Availability", tuple(availability)),
        ("SkillRequirement", tuple(skill)),
        ("TaskHourPrecedence", tuple(precedence)),
        ("NoMultiTask", tuple(no_multi)),
        ("StartBlock", tuple(start_block)),
        ("EndBlock", tuple(end_block)),
        ("MinBlockLength", tuple(min_block)),
        ("MaxBlockLength", tuple(max_block)),
        ("MinRest", tuple(min_rest)),
        ("UnassignedTask", tuple(unassigned)),
    )

    obj_terms = [(1, "workerHours", xo(w, h)) for w in range(W) for h in range(H)]
    if T > 0:
        obj_terms += [
            (UNASSIGNED_PENALTY, "unassignedTask", u.offset_of((t,))) for t in range(T)
        ]
    return ModelIR(
        name="gsp",
        params=dict(instance.data),
        var_families=tuple(families),
        constraint_groups=groups,
        objective=Objective("minimize", LinearExpr(merge_terms(obj_terms))),
    )


def _build_nsp(instance: Instance) -> ModelIR:
    d = instance.data
    N, D, S, T = d["N"], d["D"], d["S"], d["T"]
    avail, shift_slot, shift_hours = d["availableShifts"], d["shiftSlot"], d["shiftHours"]
    demand, rest = d["demandSlot"], d["restDays"]
    min_hours, max_hours, max_days = d["MinHours"], d["MaxHours"], d["MaxWorkingDays"]

    x = VariableFamily("nurseDayShift", (N, D, S))
    y = VariableFamily("nurseDaySlot", (N, D, T))
    # surplus/shortfall cannot exceed the nurse count for any sane demand.
    surplus = VariableFamily("surplus", (D, T), kind="int", lo=0, hi=N)
    shortfall = VariableFamily("shortfall", (D, T), kind="int", lo=0, hi=N)

    def xo(n, day, s_):
        return x.offset_of((n, day, s_))

    def yo(n, day, t_):
        return y.offset_of((n, day, t_))

    availability = [
        _le([(1, "nurseDayShift", xo(n, day, s_))], avail[n][day][s_])
        for n in range(N)
        for day in range(D)
        for s_ in range(S)
    ]
    one_shift = [
        _le([(1, "nurseDayShift", xo(n, day, s_)) for s_ in range(S)], 1)
        for n in range(N)
        for day in range(D)
    ]
    # Slot indicator can only be on when some shift of that slot is assigned.
    slot_link = [
        _le(
            [(1, "nurseDaySlot", yo(n, day, t_))]
            + [(-1, "nurseDayShift", xo(n, day, s_)) for s_ in range(S) if shift_slot[s_] == t_],
            0,
        )
        for n in range(N)
        for day in range(D)
        for t_ in range(T)
    ]
    demand_eq = [
        _eq(
            [(1, "nurseDaySlot", yo(n, day, t_)) for n in range(N)]
            + [
                (-1, "surplus", surplus.offset_of((day, t_))),
                (1, "shortfall", shortfall.offset_of((day, t_))),
            ],
            demand[day][t_],
        )
        for day in range(D)
        for t_ in range(T)
    ]
    min_h = [
        _ge(
            [
                (shift_hours[s_], "nurseDayShift", xo(n, day, s_))
                for day in range(D)
                for s_ in range(S)
            ],
            min_hours,
        )
        for n in range(N)
    ]
    max_h = [
        _le(
            [
                (shift_hours[s_], "nurseDayShift", xo(n, day, s_))
                for day in range(D)
                for s_ in range(S)
            ],
            max_hours,
        )
        for n in range(N)
    ]
    rest_days = [
        _le([(1, "nurseDayShift", xo(n, day, s_))], 1 - rest[n][day])
        for n in range(N)
        for day in range(D)
        for s_ in range(S)
    ]
    # Weekly cap applies to each full week; trailing days are unconstrained.
    weeks = D // 7
    max_working = [
        _le(
            [
                (1, "nurseDayShift", xo(n, wk * 7 + day, s_))
                for day in range(7)
                for s_ in range(S)
            ],
            max_days,
        )
        for n in range(N)
        for wk in range(weeks)
    ]
    no_nd_am = []
    if T > ND:
        no_nd_am = [
            _le(
                [(1, "nurseDaySlot", yo(n, day, ND)), (1, "nurseDaySlot", yo(n, day + 1, AM))],
                1,
            )
            for n in range(N)
            for day in range(D - 1)
        ]

    groups = (
        ("Availability", tuple(availability)),
        ("MaxOneShiftPerDay", tuple(one_shift)),
        ("ShiftSlotLink", tuple(slot_link)),
        ("Demand", tuple(demand_eq)),
        ("MinHours", tuple(min_h)),
        ("MaxHours", tuple(max_h)),
        ("RestDays", tuple(rest_days)),
        ("MaxWorkingDays", tuple(max_working)),
        ("NoNDAM", tuple(no_nd_am)),
    )
    obj_terms = [
        (1, "surplus", surplus.offset_of((day, t_)))
        for day in range(D)
        for t_ in range(T)
    ] + [
        (1, "shortfall", shortfall.offset_of((day, t_)))
        for day in range(D)
        for t_ in range(T)
    ]
    return ModelIR(
        name="nsp",
        params=dict(instance.data),
        var_families=(x, y, surplus, shortfall),
        constraint_groups=groups,
        objective=Objective("minimize", LinearExpr(merge_terms(obj_terms))),
    )


def _build_static_nurse(instance: Instance) -> ModelIR:
    d = instance.data
    N, D, S, M, pref = d["N"], d["D"], d["S"], d["M"], d["P"]
    x = VariableFamily("X", (N, D, S))

    def xo(n, day, s_):
        return x.offset_of((n, day, s_))

    coverage = [
        _eq([(1, "X", xo(n, day, s_)) for n in range(N)], 1)
        for day in range(D)
        for s_ in range(S)
    ]
    one_per_day = [
        _le([(1, "X", xo(n, day, s_)) for s_ in range(S)], 1)
        for n in range(N)
        for day in range(D)
    ]
    min_shifts = [
        _ge([(1, "X", xo(n, day, s_)) for day in range(D) for s_ in range(S)], M)
        for n in range(N)
    ]
    groups = (
        ("ShiftCoverage", tuple(coverage)),
        ("OneShiftPerDay", tuple(one_per_day)),
        ("MinShiftsPerNurse", tuple(min_shifts)),
    )
    obj_terms = [
        (pref[n][day][s_], "X", xo(n, day, s_))
        for n in range(N)
        for day in range(D)
        for s_ in range(S)
    ]
    return ModelIR(
        name="static_nurse",
        params=dict(instance.data),
        var_families=(x,),
        constraint_groups=groups,
        objective=Objective("maximize", LinearExpr(merge_terms(obj_terms))),
    )


def schedule_family(kind: str) -> str:
    """The family holding the user-facing schedule for each problem kind."""
    return {"gsp": "workerHours", "nsp": "nurseDayShift", "static_nurse": "X"}[kind]


def assignment_to_nested(model: ModelIR, assignment: Assignment, family: str):
    """Reshape a family's flat values into nested lists matching its dims."""
    fam = model.family(family)
    vals = assignment.family_values(family)

    def build(dims, base):
        if len(dims) == 1:
            return list(vals[base : base + dims[0]])
        stride = 1
        for d_ in dims[1:]:
            stride *= d_
        return [build(dims[1:], base + i * stride) for i in range(dims[0])]

    return build(list(fam.dims), 0)
