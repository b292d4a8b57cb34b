"""Independent procedural validators for every constraint group.

These are deliberately written as plain loops over the instance data with
hand-rolled index arithmetic, so they share no code with the grounded
LinearConstraint path. Tests require the two routes to agree on random
assignments (double-entry validation).
"""
from __future__ import annotations

from typing import Callable, Mapping

from .core import Assignment

Checker = Callable[[Assignment], bool]


def checkers_for(kind: str, data: Mapping) -> dict[str, Checker]:
    if kind == "gsp":
        return gsp_checkers(data)
    if kind == "nsp":
        return nsp_checkers(data)
    if kind == "static_nurse":
        return static_nurse_checkers(data)
    raise ValueError(f"unknown kind {kind!r}")


def gsp_checkers(data: Mapping) -> dict[str, Checker]:
    W, H, T = data["W"], data["H"], data["T"]
    bmin, bmax, rmin = data["BMin"], data["BMax"], data["RMin"]
    avail, skills, task_hour = data["availableHours"], data["workerTaskSkills"], data["taskHour"]

    def x(a, w, h):
        return a.family_values("workerHours")[w * H + h]

    def s(a, w, h):
        return a.family_values("startBlock")[w * H + h]

    def e(a, w, h):
        return a.family_values("endBlock")[w * H + h]

    def y(a, w, t):
        return a.family_values("workerTasks")[w * T + t]

    def u(a, t):
        return a.family_values("unassignedTask")[t]

    def availability(a):
        return all(x(a, w, h) <= avail[w][h] for w in range(W) for h in range(H))

    def skill(a):
        return all(y(a, w, t) <= skills[w][t] for w in range(W) for t in range(T))

    def precedence(a):
        return all(y(a, w, t) <= x(a, w, task_hour[t]) for w in range(W) for t in range(T))

    def no_multi(a):
        for w in range(W):
            for h in range(H):
                if sum(y(a, w, t) for t in range(T) if task_hour[t] == h) > 1:
                    return False
        return True

    def start_block(a):
        for w in range(W):
            if s(a, w, 0) != x(a, w, 0):
                return False
            for h in range(1, H):
                if s(a, w, h) < x(a, w, h) - x(a, w, h - 1):
                    return False
        return True

    def end_block(a):
        for w in range(W):
            if e(a, w, H - 1) != x(a, w, H - 1):
                return False
            for h in range(H - 1):
                if e(a, w, h) < x(a, w, h) - x(a, w, h + 1):
                    return False
        return True

    def min_block(a):
        for w in range(W):
            for h in range(max(0, H - bmin)):
                if sum(x(a, w, hp) for hp in range(h, h + bmin)) < bmin * s(a, w, h):
                    return False
            for h in range(max(0, H - bmin), H):
                if s(a, w, h) != 0:
                    return False
        return True

    def max_block(a):
        for w in range(W):
            for h in range(max(0, H - bmax)):
                if sum(1 - x(a, w, hp) for hp in range(h, h + bmax + 1)) < s(a, w, h):
                    return False
        return True

    def min_rest(a):
        for w in range(W):
            for h in range(H):
                for hp in range(h + 1, min(H, h + rmin + 1)):
                    if e(a, w, h) > 1 - x(a, w, hp):
                        return False
        return True

    def unassigned(a):
        return all(
            sum(y(a, w, t) for w in range(W)) >= 1 - u(a, t) for t in range(T)
        )

    return {
        "Availability": availability,
        "SkillRequirement": skill,
        "TaskHourPrecedence": precedence,
        "NoMultiTask": no_multi,
        "StartBlock": start_block,
        "EndBlock": end_block,
        "MinBlockLength": min_block,
        "MaxBlockLength": max_block,
        "MinRest": min_rest,
        "UnassignedTask": unassigned,
    }


def nsp_checkers(data: Mapping) -> dict[str, Checker]:
    N, D, S, T = data["N"], data["D"], data["S"], data["T"]
    avail, shift_slot, shift_hours = data["availableShifts"], data["shiftSlot"], data["shiftHours"]
    demand, rest = data["demandSlot"], data["restDays"]
    min_hours, max_hours, max_days = data["MinHours"], data["MaxHours"], data["MaxWorkingDays"]

    def x(a, n, d, s_):
        return a.family_values("nurseDayShift")[(n * D + d) * S + s_]

    def y(a, n, d, t_):
        return a.family_values("nurseDaySlot")[(n * D + d) * T + t_]

    def sur(a, d, t_):
        return a.family_values("surplus")[d * T + t_]

    def sho(a, d, t_):
        return a.family_values("shortfall")[d * T + t_]

    def availability(a):
        return all(
            x(a, n, d, s_) <= avail[n][d][s_]
            for n in range(N)
            for d in range(D)
            for s_ in range(S)
        )

    def one_shift(a):
        return all(
            sum(x(a, n, d, s_) for s_ in range(S)) <= 1
            for n in range(N)
            for d in range(D)
        )

    def slot_link(a):
        for n in range(N):
            for d in range(D):
                for t_ in range(T):
                    cover = sum(x(a, n, d, s_) for s_ in range(S) if shift_slot[s_] == t_)
                    if y(a, n, d, t_) > cover:
                        return False
        return True

    def demand_eq(a):
        for d in range(D):
            for t_ in range(T):
                assigned = sum(y(a, n, d, t_) for n in range(N))
                if assigned != demand[d][t_] + sur(a, d, t_) - sho(a, d, t_):
                    return False
        return True

    def hours(a, n):
        return sum(
            shift_hours[s_] * x(a, n, d, s_) for d in range(D) for s_ in range(S)
        )

    def min_h(a):
        return all(hours(a, n) >= min_hours for n in range(N))

    def max_h(a):
        return all(hours(a, n) <= max_hours for n in range(N))

    def rest_days(a):
        return all(
            x(a, n, d, s_) <= 1 - rest[n][d]
            for n in range(N)
            for d in range(D)
            for s_ in range(S)
        )

    def max_working(a):
        for n in range(N):
            for wk in range(D // 7):
                worked = sum(
                    x(a, n, wk * 7 + d, s_) for d in range(7) for s_ in range(S)
                )
                if worked > max_days:
                    return False
        return True

    def no_nd_am(a):
        if T <= 2:
            return True
        for n in range(N):
            for d in range(D - 1):
                if y(a, n, d, 2) + y(a, n, d + 1, 0) > 1:
                    return False
        return True

    return {
        "Availability": availability,
        "MaxOneShiftPerDay": one_shift,
        "ShiftSlotLink": slot_link,
        "Demand": demand_eq,
        "MinHours": min_h,
        "MaxHours": max_h,
        "RestDays": rest_days,
        "MaxWorkingDays": max_working,
        "NoNDAM": no_nd_am,
    }


def static_nurse_checkers(data: Mapping) -> dict[str, Checker]:
    N, D, S, M = data["N"], data["D"], data["S"], data["M"]

    def x(a, n, d, s_):
        return a.family_values("X")[(n * D + d) * S + s_]

    def coverage(a):
        return all(
            sum(x(a, n, d, s_) for n in range(N)) == 1
            for d in range(D)
            for s_ in range(S)
        )

    def one_per_day(a):
        return all(
            sum(x(a, n, d, s_) for s_ in range(S)) <= 1
            for n in range(N)
            for d in range(D)
        )

    def min_shifts(a):
        return all(
            sum(x(a, n, d, s_) for d in range(D) for s_ in range(S)) >= M
            for n in range(N)
        )

    return {
        "ShiftCoverage": coverage,
        "OneShiftPerDay": one_per_day,
        "MinShiftsPerNurse": min_shifts,
    }


def _runs(row: list[int]) -> list[tuple[int, int]]:
    """Maximal runs of consecutive 1s as (start, end) inclusive."""
    runs = []
    start = None
    for h, v in enumerate(row):
        if v and start is None:
            start = h
        elif not v and start is not None:
            runs.append((start, h - 1))
            start = None
    if start is not None:
        runs.append((start, len(row) - 1))
    return runs


def max_block_property_window(x_row: list[int], bmax: int) -> bool:
    """Block-length cap via the hour-window form: for a block starting at h
    (where the window fits) some hour in [h, h+bmax] must be off."""
    H = len(x_row)
    for start, _ in _runs(x_row):
        if start <= H - bmax - 1:
            if all(x_row[hp] for hp in range(start, start + bmax + 1)):
                return False
    return True


def max_block_property_endblock(x_row: list[int], bmax: int) -> bool:
    """Block-length cap via the end-indicator form: a block starting at h
    must end within [h, h+bmax)."""
    H = len(x_row)
    ends = {end for _, end in _runs(x_row)}
    for start, _ in _runs(x_row):
        if not any(hp in ends for hp in range(start, min(H, start + bmax))):
            return False
    return True
