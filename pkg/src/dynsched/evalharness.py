"""Automatic evaluation: outcome classification and test-set aggregation.

Each case solves its hand-written target patch and the pipeline-generated
patch under identical limits and classifies the pair into exactly one
outcome. A generated run is a Match when both runs are optimal with equal
objectives, or both are at least feasible with bound intervals overlapping
at least half their union.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

from . import agents
from .agents import FixExhausted, PatchResult, PlanParseError, error_kind
from .dsl import BindError, BoundsViolation, ParseError, Patch, bind, ground, parse
from .dsl.ast import (
    BinOp,
    ConstraintDecl,
    DimDom,
    HammingExpr,
    IndexedRef,
    IntLit,
    NameRef,
    ParamDecl,
    SumExpr,
    VarDecl,
)
from .model import Instance, apply_patch, build_model
from .model.core import ModelIR
from .rag import Store
from .solver import SolveLimits, SolveReport, solve


class Outcome(Enum):
    DATA_KEY_ERROR = "KeyError"
    SYNTAX_ERROR = "Syntax Error"
    INFEASIBLE = "Infeasible"
    FEASIBLE_NOT_MATCH = "Feasible (Not Match)"
    MATCH = "Match"


OUTCOME_ORDER = (
    Outcome.DATA_KEY_ERROR,
    Outcome.SYNTAX_ERROR,
    Outcome.INFEASIBLE,
    Outcome.FEASIBLE_NOT_MATCH,
    Outcome.MATCH,
)


def interval_match(lb1, ub1, lb2, ub2) -> bool:
    """Overlap of [lb1,ub1] and [lb2,ub2] covers at least half their union.

    A degenerate union (both intervals the same point) is a match. Symmetric
    in the two intervals.
    """
    if lb1 > ub1 or lb2 > ub2:
        raise ValueError("interval bounds must satisfy lb <= ub")
    inter = max(0, min(ub1, ub2) - max(lb1, lb2))
    union = max(ub1, ub2) - min(lb1, lb2)
    if union == 0:
        return True
    if math.isinf(union):
        return math.isinf(inter)
    return inter / union >= 0.5


@dataclass(frozen=True)
class GeneratedRun:
    """What the pipeline produced for a case: an error kind or a solved report."""

    error_kind: Optional[str] = None
    report: Optional[SolveReport] = None


def classify_outcome(target_report: SolveReport, gen: GeneratedRun) -> Outcome:
    """Total classification with the documented precedence."""
    if gen.error_kind in ("UnknownParameter", "UnknownVariable"):
        return Outcome.DATA_KEY_ERROR
    if gen.error_kind is not None:
        return Outcome.SYNTAX_ERROR
    report = gen.report
    if report.status == "Infeasible":
        return Outcome.INFEASIBLE
    if target_report.status == "Optimal" and report.status == "Optimal":
        if target_report.lower_bound == report.lower_bound:
            return Outcome.MATCH
        return Outcome.FEASIBLE_NOT_MATCH
    if target_report.status in ("Optimal", "Feasible") and report.status in ("Optimal", "Feasible"):
        if interval_match(
            target_report.lower_bound,
            target_report.upper_bound,
            report.lower_bound,
            report.upper_bound,
        ):
            return Outcome.MATCH
        return Outcome.FEASIBLE_NOT_MATCH
    # anything left (e.g. an Unknown status on either side) is a non-match
    return Outcome.FEASIBLE_NOT_MATCH


def detect_hallucinated_params(patch: Patch, instance: Instance, model: ModelIR) -> list[str]:
    """Identifiers resolvable neither in the instance data nor the model.

    Covers both explicit param declarations and free identifiers used in
    constraint expressions; sorted for stable output.
    """
    known_families = {f.name for f in model.var_families}
    declared_vars = set()
    declared_params = set()
    missing: set[str] = set()

    def known_value(name: str) -> bool:
        return name in instance.data or name in model.params or name in declared_params

    for decl in patch.decls:
        if isinstance(decl, ParamDecl):
            if decl.name not in instance.data and decl.name not in model.params:
                missing.add(decl.name)
            declared_params.add(decl.name)
        elif isinstance(decl, VarDecl):
            declared_vars.add(decl.name)

    def walk(expr, scope):
        if isinstance(expr, IntLit):
            return
        if isinstance(expr, NameRef):
            if expr.name not in scope and not known_value(expr.name):
                missing.add(expr.name)
            return
        if isinstance(expr, IndexedRef):
            if (
                expr.name not in known_families
                and expr.name not in declared_vars
                and not known_value(expr.name)
            ):
                missing.add(expr.name)
            for arg in expr.args:
                walk(arg, scope)
            return
        if isinstance(expr, BinOp):
            walk(expr.left, scope)
            walk(expr.right, scope)
            return
        if isinstance(expr, SumExpr):
            inner = set(scope)
            for b in expr.binders:
                _walk_binder(b, inner)
                inner.add(b.name)
            walk(expr.body, inner)
            return
        if isinstance(expr, HammingExpr):
            if expr.var_name not in known_families and expr.var_name not in declared_vars:
                missing.add(expr.var_name)
            if not known_value(expr.ref_name):
                missing.add(expr.ref_name)
            return

    def _walk_binder(b, scope):
        if isinstance(b.domain, DimDom):
            if b.domain.name not in scope and not known_value(b.domain.name):
                missing.add(b.domain.name)
        else:
            walk(b.domain.lo, scope)
            walk(b.domain.hi, scope)

    for decl in patch.decls:
        if isinstance(decl, ConstraintDecl):
            scope: set[str] = set()
            for b in decl.quantifiers:
                _walk_binder(b, scope)
                scope.add(b.name)
            walk(decl.lhs, scope)
            walk(decl.rhs, scope)

    return sorted(missing)


# --- test set ----------------------------------------------------------------


@dataclass(frozen=True)
class TestCase:
    id: str
    kind: str
    instance_data: dict
    nl_constraint: str
    target_patch: str
    group: str


def load_testset(path) -> list[TestCase]:
    payload = json.loads(Path(path).read_text())
    if payload.get("version") != 1:
        raise ValueError(f"unsupported testset version {payload.get('version')!r}")
    instances = payload.get("instances", {})
    cases = []
    for raw in payload["cases"]:
        data = raw["instance"]
        if isinstance(data, str):
            data = instances[data]
        cases.append(
            TestCase(
                id=raw["id"],
                kind=raw["kind"],
                instance_data=data,
                nl_constraint=raw["nl_constraint"],
                target_patch=raw["target_patch"],
                group=raw.get("group", raw["id"]),
            )
        )
    return cases


@dataclass
class CaseRecord:
    case_id: str
    kind: str
    group: str
    outcome: Outcome
    attempts: int
    hallucinated: list[str]
    target_status: str
    target_bounds: tuple[float, float]
    gen_status: Optional[str]
    gen_bounds: Optional[tuple[float, float]]
    gen_error: Optional[str]
    patch_text: Optional[str]
    target_patch_text: str
    wall_time: float
    transcript: tuple = field(default=(), repr=False)

    def to_json(self) -> dict:
        return {
            "case_id": self.case_id,
            "kind": self.kind,
            "group": self.group,
            "outcome": self.outcome.value,
            "attempts": self.attempts,
            "hallucinated": self.hallucinated,
            "target_status": self.target_status,
            "target_bounds": list(self.target_bounds),
            "gen_status": self.gen_status,
            "gen_bounds": list(self.gen_bounds) if self.gen_bounds else None,
            "gen_error": self.gen_error,
            "patch_text": self.patch_text,
            "target_patch_text": self.target_patch_text,
            "wall_time": self.wall_time,
        }


@dataclass
class ResultsTable:
    rows: dict[str, dict[Outcome, int]]

    @staticmethod
    def empty() -> "ResultsTable":
        return ResultsTable(rows={})

    def add(self, kind: str, outcome: Outcome):
        row = self.rows.setdefault(kind, {o: 0 for o in OUTCOME_ORDER})
        row[outcome] += 1

    def row_counts(self, kind: str) -> tuple[int, ...]:
        row = self.rows.get(kind, {o: 0 for o in OUTCOME_ORDER})
        return tuple(row[o] for o in OUTCOME_ORDER)

    def totals(self) -> tuple[int, ...]:
        return tuple(
            sum(self.row_counts(kind)[i] for kind in self.rows)
            for i in range(len(OUTCOME_ORDER))
        )

    def render_text(self) -> str:
        headers = [o.value for o in OUTCOME_ORDER] + ["Total"]
        width = max(len(h) for h in headers) + 2
        name_w = max([len(k) for k in self.rows] + [5]) + 2
        lines = ["".ljust(name_w) + "".join(h.rjust(width) for h in headers)]
        for kind in sorted(self.rows):
            counts = self.row_counts(kind)
            cells = [str(c).rjust(width) for c in counts]
            cells.append(str(sum(counts)).rjust(width))
            lines.append(kind.upper().ljust(name_w) + "".join(cells))
        totals = self.totals()
        cells = [str(c).rjust(width) for c in totals]
        cells.append(str(sum(totals)).rjust(width))
        lines.append("Total".ljust(name_w) + "".join(cells))
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "columns": [o.value for o in OUTCOME_ORDER],
            "rows": {k: list(self.row_counts(k)) for k in sorted(self.rows)},
            "totals": list(self.totals()),
        }


class _EvalSession:
    """Just enough session surface for prompt assembly."""

    def __init__(self, model: ModelIR, instance: Instance):
        self.model = model
        self.instance = instance


def solve_patched(model: ModelIR, instance: Instance, patch_text: str, limits: SolveLimits):
    """parse -> bind -> ground -> apply -> solve for a patch text."""
    patch = parse(patch_text)
    bound = bind(patch, model, instance)
    grounded = ground(bound, model)
    patched = apply_patch(model, grounded)
    return patch, solve(patched, limits)


def run_case(
    case: TestCase,
    backend,
    store: Optional[Store],
    limits: SolveLimits,
    max_attempts: int = agents.DEFAULT_MAX_ATTEMPTS,
) -> CaseRecord:
    started = time.monotonic()
    instance = Instance.from_json(case.kind, case.instance_data)
    model = build_model(instance)
    _, target_report = solve_patched(model, instance, case.target_patch, limits)

    session = _EvalSession(model, instance)
    gen_error = None
    gen_report = None
    attempts = 0
    patch_text = None
    halluc: list[str] = []
    transcript: tuple = ()
    try:
        result: PatchResult = agents.run_pipeline(
            session, case.nl_constraint, backend, store, max_attempts
        )
        attempts = result.attempts
        transcript = result.transcript
        patch_text = result.transcript[-1][1]
        halluc = detect_hallucinated_params(result.patch, instance, model)
        try:
            patched = apply_patch(model, result.grounded)
            gen_report = solve(patched, limits)
        except Exception as exc:  # per-case failures become outcomes
            gen_error = type(exc).__name__
    except FixExhausted as exc:
        gen_error = exc.last_kind
        attempts = len(exc.transcript)
        transcript = exc.transcript
        patch_text = exc.transcript[-1][1] if exc.transcript else None
        halluc = _hallucinated_from_text(patch_text, instance, model)
    except (PlanParseError, agents.BackendError) as exc:
        gen_error = type(exc).__name__
    except (ParseError, BindError, BoundsViolation) as exc:
        gen_error = error_kind(exc)

    outcome = classify_outcome(target_report, GeneratedRun(gen_error, gen_report))
    return CaseRecord(
        case_id=case.id,
        kind=case.kind,
        group=case.group,
        outcome=outcome,
        attempts=attempts,
        hallucinated=halluc,
        target_status=target_report.status,
        target_bounds=(target_report.lower_bound, target_report.upper_bound),
        gen_status=gen_report.status if gen_report else None,
        gen_bounds=(gen_report.lower_bound, gen_report.upper_bound) if gen_report else None,
        gen_error=gen_error,
        patch_text=patch_text,
        target_patch_text=case.target_patch,
        wall_time=time.monotonic() - started,
        transcript=transcript,
    )


def _hallucinated_from_text(text, instance, model) -> list[str]:
    if not text:
        return []
    try:
        return detect_hallucinated_params(parse(agents.strip_fences(text)), instance, model)
    except ParseError:
        return []


def run_testset(
    cases,
    backend,
    store: Optional[Store] = None,
    limits: SolveLimits = SolveLimits(),
    max_attempts: int = agents.DEFAULT_MAX_ATTEMPTS,
) -> tuple[ResultsTable, list[CaseRecord]]:
    """Evaluate every case; per-case failures become outcomes, never aborts."""
    table = ResultsTable.empty()
    records = []
    for case in cases:
        record = run_case(case, backend, store, limits, max_attempts)
        table.add(case.kind, record.outcome)
        records.append(record)
    return table, records


def write_report(outdir, table: ResultsTable, records: list[CaseRecord]) -> list[str]:
    """Write the delimited results, per-case records, and figures.

    Returns the list of files written (relative names).
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    (outdir / "results.txt").write_text(table.render_text() + "\n")
    written.append("results.txt")

    with open(outdir / "results.csv", "w") as fh:
        fh.write("kind," + ",".join(o.value for o in OUTCOME_ORDER) + ",Total\n")
        for kind in sorted(table.rows):
            counts = table.row_counts(kind)
            fh.write(f"{kind}," + ",".join(map(str, counts)) + f",{sum(counts)}\n")
        totals = table.totals()
        fh.write("total," + ",".join(map(str, totals)) + f",{sum(totals)}\n")
    written.append("results.csv")

    (outdir / "per_case.json").write_text(
        json.dumps([r.to_json() for r in records], indent=2)
    )
    written.append("per_case.json")

    written.extend(_render_figures(outdir, table, records))
    return written


def _render_figures(outdir: Path, table: ResultsTable, records) -> list[str]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    kinds = sorted(table.rows)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    x = range(len(OUTCOME_ORDER))
    width = 0.8 / max(1, len(kinds))
    for i, kind in enumerate(kinds):
        counts = table.row_counts(kind)
        ax.bar([xi + i * width for xi in x], counts, width, label=kind.upper())
    ax.set_xticks([xi + width * (len(kinds) - 1) / 2 for xi in x])
    ax.set_xticklabels([o.value for o in OUTCOME_ORDER], rotation=20, ha="right")
    ax.set_ylabel("cases")
    ax.set_title("Automatic evaluation outcomes")
    ax.legend()
    fig.tight_layout()
    fig.savefig(outdir / "outcomes.png", dpi=120)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6, 4))
    attempts = [r.attempts for r in records if r.attempts]
    if attempts:
        bins = range(1, max(attempts) + 2)
        ax.hist(attempts, bins=bins, align="left", rwidth=0.8, color="#4878cf")
        ax.set_xticks(range(1, max(attempts) + 1))
    ax.set_xlabel("coding attempts")
    ax.set_ylabel("cases")
    ax.set_title("Patch-fixing attempts per case")
    fig.tight_layout()
    fig.savefig(outdir / "attempts.png", dpi=120)
    plt.close(fig)
    return ["outcomes.png", "attempts.png"]
