"""Exact, deterministic branch-and-bound over the model IR.

Search is single threaded and depth first, branching variables in family
declaration order (row-major within a family); booleans take value 1 first,
bounded integers split their domain at the midpoint with the lower half
explored first. Bounds propagation runs to fixpoint at every node and the
node bound is the coefficient-sign relaxation of the objective over the
propagated domains, sharpened by at-most-one/exactly-one cliques (a set of
variables of which at most one can be 1 contributes a single term, not the
sum of all of them). The incumbent objective is fed back into propagation
as a cutoff row. Both refinements keep desk-scale rostering models
tractable without changing the search order or the reported semantics.

``brute_force`` is the independent test oracle: exhaustive lexicographic
enumeration, vectorized in chunks.
"""
from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model.core import Assignment, ModelIR

INF = math.inf

# Solver presets used by the original experiments, kept for reference runs.
PRESET_GSP_TIME_LIMIT = 180.0
PRESET_NSP_TIME_LIMIT = 120.0
DEFAULT_TIME_LIMIT = 10.0


class TooLarge(Exception):
    """brute_force guard: the domain product exceeds the enumeration cap."""


@dataclass(frozen=True)
class SolveLimits:
    time_limit: float = DEFAULT_TIME_LIMIT
    node_limit: Optional[int] = None

    def __post_init__(self):
        if not self.time_limit > 0:
            raise ValueError("time_limit must be positive")
        if self.node_limit is not None and self.node_limit <= 0:
            raise ValueError("node_limit must be positive")


@dataclass(frozen=True)
class SolveReport:
    """Search outcome with proven bounds in true objective space.

    For minimization lower_bound <= optimum <= upper_bound whenever an
    optimum exists (mirrored for maximization, where the incumbent provides
    the lower bound). Infeasible reports carry (+inf, +inf) for minimization
    and (-inf, -inf) for maximization. ``wall_time`` is excluded from
    equality comparisons so completed searches compare deterministically.
    """

    status: str  # Optimal | Feasible | Infeasible | Unknown
    best: Optional[Assignment]
    lower_bound: float
    upper_bound: float
    nodes: int
    wall_time: float = field(compare=False, default=0.0)

    @property
    def objective(self) -> Optional[int]:
        if self.best is None:
            return None
        if self.status == "Optimal":
            return int(self.lower_bound)
        return None

    def stats(self) -> dict:
        return {
            "status": self.status,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "nodes": self.nodes,
            "wall_time": self.wall_time,
        }


def _flatten(model: ModelIR):
    """Variable order: family declaration order, then row-major offset."""
    names = []
    lo = []
    hi = []
    index = {}
    for fam in model.var_families:
        for off in range(fam.size):
            index[(fam.name, off)] = len(names)
            names.append((fam.name, off))
            lo.append(fam.lo)
            hi.append(fam.hi)
    return names, lo, hi, index


def _rows_from_model(model: ModelIR, index):
    """Normalize all constraints to sum(c*v) <= rhs form."""
    rows = []
    for _, cons in model.constraint_groups:
        for con in cons:
            terms = [(c, index[(f, o)]) for c, f, o in con.terms]
            if con.relation in ("<=", "=="):
                rows.append((terms, con.constant))
            if con.relation in (">=", "=="):
                rows.append(([(-c, v) for c, v in terms], -con.constant))
    return rows


def _assignment_from(model: ModelIR, values) -> Assignment:
    arrays = {}
    pos = 0
    for fam in model.var_families:
        arrays[fam.name] = tuple(values[pos : pos + fam.size])
        pos += fam.size
    return Assignment(arrays)


class _Search:
    def __init__(self, model: ModelIR, limits: SolveLimits):
        self.model = model
        self.limits = limits
        self.names, root_lo, root_hi, self.index = _flatten(model)
        self.n = len(self.names)
        rows = _rows_from_model(model, self.index)

        self.maximize = model.objective.sense == "maximize"
        sign = -1 if self.maximize else 1
        merged: dict[int, int] = {}
        for c, f, o in model.objective.expr.terms:
            v = self.index[(f, o)]
            merged[v] = merged.get(v, 0) + sign * c
        self.obj_terms = [(c, v) for v, c in merged.items() if c != 0]
        self.obj_const = sign * model.objective.expr.constant

        # The cutoff row threads the incumbent back into propagation.
        self.cut_row = len(rows)
        rows.append((list(self.obj_terms), 0))
        self.rows = rows
        self.rhs = [r for _, r in rows]
        self.cut_active = False

        self.var_rows: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for rid, (terms, _) in enumerate(rows):
            for c, v in terms:
                self.var_rows[v].append((rid, c))

        self.root_lo = root_lo
        self.root_hi = root_hi
        self.is_bool = [
            root_lo[v] == 0 and root_hi[v] == 1 and self._fam_kind(v) == "bool"
            for v in range(self.n)
        ]
        self.obj_coef = merged
        self.cliques = self._collect_cliques(merged)
        claimed = {v for _, _, members in self.cliques for v in members}
        self.loose_terms = [(c, v) for c, v in self.obj_terms if v not in claimed]

    def _fam_kind(self, v: int) -> str:
        fname = self.names[v][0]
        return self.model.family(fname).kind

    def _collect_cliques(self, obj_coef: dict[int, int]):
        """At-most-one / exactly-one groups of binary variables that carry
        negative objective coefficients; each variable claimed once."""
        cliques = []
        claimed: set[int] = set()
        for _, group in self.model.constraint_groups:
            for con in group:
                if con.constant != 1 or con.relation not in ("<=", "=="):
                    continue
                vs = []
                ok = len(con.terms) > 1
                for c, f, o in con.terms:
                    v = self.index[(f, o)]
                    if c != 1 or not self.is_bool[v]:
                        ok = False
                        break
                    vs.append(v)
                if not ok:
                    continue
                members = [v for v in vs if v in obj_coef and v not in claimed]
                if not members or min(obj_coef[v] for v in members) >= 0:
                    continue
                cliques.append((con.relation == "==", tuple(vs), tuple(members)))
                claimed.update(members)
        return cliques

    def _initial_minact(self, lo, hi):
        minact = []
        for terms, _ in self.rows:
            acc = 0
            for c, v in terms:
                acc += c * lo[v] if c > 0 else c * hi[v]
            minact.append(acc)
        return minact

    def _propagate(self, lo, hi, minact, queue) -> bool:
        """Bounds propagation to fixpoint; False means infeasible."""
        rhs = self.rhs
        rows = self.rows
        var_rows = self.var_rows
        in_queue = set(queue)
        dq = deque(queue)
        while dq:
            rid = dq.popleft()
            in_queue.discard(rid)
            if rid == self.cut_row and not self.cut_active:
                continue
            terms, _ = rows[rid]
            slack = rhs[rid] - minact[rid]
            if slack < 0:
                return False
            for c, v in terms:
                lov, hiv = lo[v], hi[v]
                if lov == hiv:
                    continue
                if c > 0:
                    termmin = c * lov
                    allowed = slack + termmin  # max value c*v may take
                    bound = allowed // c
                    if bound < hiv:
                        if bound < lov:
                            return False
                        delta_rows = var_rows[v]
                        old_hi = hiv
                        hi[v] = bound
                        for rid2, c2 in delta_rows:
                            if c2 < 0:
                                minact[rid2] += c2 * (bound - old_hi)
                                if rid2 not in in_queue:
                                    in_queue.add(rid2)
                                    dq.append(rid2)
                            elif rid2 not in in_queue:
                                in_queue.add(rid2)
                                dq.append(rid2)
                else:
                    termmin = c * hiv
                    allowed = slack + termmin
                    bound = -(allowed // -c)  # ceil(allowed / c) for c < 0
                    if bound > lov:
                        if bound > hiv:
                            return False
                        delta_rows = var_rows[v]
                        old_lo = lov
                        lo[v] = bound
                        for rid2, c2 in delta_rows:
                            if c2 > 0:
                                minact[rid2] += c2 * (bound - old_lo)
                                if rid2 not in in_queue:
                                    in_queue.add(rid2)
                                    dq.append(rid2)
                            elif rid2 not in in_queue:
                                in_queue.add(rid2)
                                dq.append(rid2)
        return True

    def _bound(self, lo, hi) -> int:
        """Coefficient-sign relaxation of the objective, with variables
        covered by an at-most-one clique contributing a single term."""
        acc = self.obj_const
        for c, v in self.loose_terms:
            acc += c * lo[v] if c > 0 else c * hi[v]
        coef = self.obj_coef
        for is_eq, all_vs, members in self.cliques:
            member_set = set(members)
            forced = 0
            any_forced = False
            for v in all_vs:
                if lo[v] == 1:
                    any_forced = True
                    if v in member_set:
                        forced += coef[v]
            if any_forced:
                acc += forced
                continue
            best = None
            for v in members:
                if hi[v] == 1:
                    c = coef[v]
                    if best is None or c < best:
                        best = c
            if best is None:
                continue
            if is_eq and not any(
                hi[v] == 1 for v in all_vs if v not in member_set
            ):
                # the single 1 must land on a claimed member
                acc += best
            else:
                acc += min(0, best)
        return acc

    def run(self) -> SolveReport:
        start = time.monotonic()
        lo = list(self.root_lo)
        hi = list(self.root_hi)
        minact = self._initial_minact(lo, hi)

        incumbent = None
        incumbent_obj = None
        nodes = 0
        interrupted = False

        # Stack entries: (lo, hi, minact, ptr, rows-to-repropagate, inherited bound)
        stack = [(lo, hi, minact, 0, list(range(len(self.rows))), -INF)]

        while stack:
            if self.limits.node_limit is not None and nodes >= self.limits.node_limit:
                interrupted = True
                break
            if time.monotonic() - start > self.limits.time_limit:
                interrupted = True
                break
            lo, hi, minact, ptr, dirty, inherited = stack.pop()
            nodes += 1
            if not self._propagate(lo, hi, minact, dirty):
                continue
            bound = self._bound(lo, hi)
            if incumbent_obj is not None and bound >= incumbent_obj:
                continue
            while ptr < self.n and lo[ptr] == hi[ptr]:
                ptr += 1
            if ptr == self.n:
                # Fully fixed and propagation-consistent: a feasible solution.
                incumbent = list(lo)
                incumbent_obj = bound
                self.rhs[self.cut_row] = incumbent_obj - self.obj_const - 1
                self.cut_active = True
                continue
            v = ptr
            mid = (lo[v] + hi[v]) // 2
            dirty_rows = [rid for rid, _ in self.var_rows[v]]
            # Booleans explore value 1 first; integers explore the lower
            # half of the midpoint split first. The second child is pushed
            # first (stack order).
            lo_hi_half, hi_hi_half = list(lo), list(hi)
            ma_hi_half = list(minact)
            old_lo = lo_hi_half[v]
            lo_hi_half[v] = mid + 1
            for rid, c in self.var_rows[v]:
                if c > 0:
                    ma_hi_half[rid] += c * (mid + 1 - old_lo)
            upper = (lo_hi_half, hi_hi_half, ma_hi_half, ptr, dirty_rows, bound)

            old_hi = hi[v]
            hi[v] = mid
            for rid, c in self.var_rows[v]:
                if c < 0:
                    minact[rid] += c * (mid - old_hi)
            lower = (lo, hi, minact, ptr, dirty_rows, bound)

            if self.is_bool[v]:
                stack.append(lower)
                stack.append(upper)
            else:
                stack.append(upper)
                stack.append(lower)

        wall = time.monotonic() - start

        if not interrupted:
            if incumbent is not None:
                obj = incumbent_obj
                return self._report("Optimal", incumbent, obj, obj, nodes, wall)
            inf_b = INF if not self.maximize else -INF
            return SolveReport("Infeasible", None, inf_b, inf_b, nodes, wall)

        remaining = [b for *_, b in stack]
        if incumbent is not None:
            proven = min(remaining + [incumbent_obj])
            return self._report(
                "Feasible", incumbent, proven, incumbent_obj, nodes, wall
            )
        proven = min(remaining) if remaining else -INF
        if self.maximize:
            return SolveReport("Unknown", None, -INF, -proven, nodes, wall)
        return SolveReport("Unknown", None, proven, INF, nodes, wall)

    def _report(self, status, values, lb_int, ub_int, nodes, wall) -> SolveReport:
        best = _assignment_from(self.model, values)
        if self.maximize:
            return SolveReport(status, best, -ub_int, -lb_int, nodes, wall)
        return SolveReport(status, best, lb_int, ub_int, nodes, wall)


def solve(model: ModelIR, limits: SolveLimits = SolveLimits()) -> SolveReport:
    """Deterministic exact search; identical inputs give identical reports."""
    return _Search(model, limits).run()


BRUTE_FORCE_CAP = 2**20
_CHUNK = 2**15


def brute_force(model: ModelIR) -> SolveReport:
    """Enumerate every assignment in lexicographic order (test oracle).

    Ties are broken by first-found, i.e. the lexicographically smallest
    optimal assignment wins.
    """
    start = time.monotonic()
    names, lo, hi, index = _flatten(model)
    n = len(names)
    sizes = [h - l + 1 for l, h in zip(lo, hi)]
    total = math.prod(sizes) if n else 1
    if total > BRUTE_FORCE_CAP:
        raise TooLarge(f"domain product {total} exceeds {BRUTE_FORCE_CAP}")

    maximize = model.objective.sense == "maximize"
    cons = [c for _, group in model.constraint_groups for c in group]

    if n == 0:
        ok = all(_const_holds(c) for c in cons)
        obj = model.objective.expr.constant
        wall = time.monotonic() - start
        if ok:
            return SolveReport("Optimal", Assignment({}), obj, obj, 1, wall)
        b = -INF if maximize else INF
        return SolveReport("Infeasible", None, b, b, 1, wall)

    # Mixed-radix decode: variable 0 is the most significant digit.
    strides = [0] * n
    acc = 1
    for j in range(n - 1, -1, -1):
        strides[j] = acc
        acc *= sizes[j]

    lo_np = np.array(lo, dtype=np.int64)
    strides_np = np.array(strides, dtype=np.int64)
    sizes_np = np.array(sizes, dtype=np.int64)

    obj_coefs = np.zeros(n, dtype=np.int64)
    for c, f, o in model.objective.expr.terms:
        obj_coefs[index[(f, o)]] += c

    con_rows = []
    for con in cons:
        coefs = np.zeros(n, dtype=np.int64)
        for c, f, o in con.terms:
            coefs[index[(f, o)]] += c
        con_rows.append((coefs, con.relation, con.constant))

    best_obj = None
    best_idx = None
    for chunk_start in range(0, total, _CHUNK):
        idx = np.arange(chunk_start, min(chunk_start + _CHUNK, total), dtype=np.int64)
        vals = (idx[:, None] // strides_np[None, :]) % sizes_np[None, :] + lo_np[None, :]
        feas = np.ones(len(idx), dtype=bool)
        for coefs, rel, rhs in con_rows:
            lhs = vals @ coefs
            if rel == "<=":
                feas &= lhs <= rhs
            elif rel == ">=":
                feas &= lhs >= rhs
            else:
                feas &= lhs == rhs
        if not feas.any():
            continue
        objs = vals @ obj_coefs + model.objective.expr.constant
        objs = np.where(feas, objs, np.iinfo(np.int64).max if not maximize else np.iinfo(np.int64).min)
        j = int(np.argmax(objs)) if maximize else int(np.argmin(objs))
        cand = int(objs[j])
        better = (
            best_obj is None
            or (maximize and cand > best_obj)
            or (not maximize and cand < best_obj)
        )
        if better:
            best_obj = cand
            best_idx = int(idx[j])

    wall = time.monotonic() - start
    if best_obj is None:
        b = -INF if maximize else INF
        return SolveReport("Infeasible", None, b, b, total, wall)
    digits = []
    rem = best_idx
    for j in range(n):
        digits.append(rem // strides[j] % sizes[j] + lo[j])
    best = _assignment_from(model, digits)
    return SolveReport("Optimal", best, best_obj, best_obj, total, wall)


def _const_holds(con) -> bool:
    if con.relation == "<=":
        return 0 <= con.constant
    if con.relation == ">=":
        return 0 >= con.constant
    return 0 == con.constant
