"""Pipeline sessions: the mutable unit of interactive rescheduling.

A session owns an instance, the current model (base model plus every
accepted patch in history order), and the current schedule. Patches are
only committed after a successful ground + solve (accept-on-solve), so a
failing patch can never corrupt a session. Persistence is an append-only
history file per session; models are derived by replay, never serialized.
"""
from __future__ import annotations

import datetime as _dt
import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .dsl import bind, ground, parse, pretty_print
from .model import (
    Assignment,
    FamilyMismatch,
    Instance,
    apply_patch,
    assignment_to_nested,
    build_model,
    evaluate_assignment,
    schedule_family,
)
from .model.core import ModelIR
from .solver import SolveLimits, SolveReport, solve


class NoSchedule(Exception):
    """The session has no current schedule yet."""


class UnknownSession(KeyError):
    pass


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def diff_schedules(old: Assignment, new: Assignment, family: str, dims) -> list[tuple]:
    """Changed cells in row-major order: (index tuple, old value, new value).

    The result length equals the Hamming distance between the schedules.
    """
    if not (old.has_family(family) and new.has_family(family)):
        raise FamilyMismatch(f"family {family} missing from a schedule")
    a = old.family_values(family)
    b = new.family_values(family)
    if len(a) != len(b):
        raise FamilyMismatch(f"family {family}: sizes differ")
    out = []
    for off, (va, vb) in enumerate(zip(a, b)):
        if va != vb:
            out.append((_index_of(off, dims), va, vb))
    return out


def _index_of(offset: int, dims) -> tuple[int, ...]:
    idx = []
    for ext in reversed(tuple(dims)):
        idx.append(offset % ext)
        offset //= ext
    return tuple(reversed(idx))


@dataclass
class HistoryStep:
    mode: str  # "nl" | "dsl"
    text: str  # what the planner typed
    patch_text: str  # canonical patch applied
    injected: dict  # dynamic keys merged into the instance for this step
    attempts: int
    status: str
    objective: Optional[int]
    accepted_at: str

    def to_json(self) -> dict:
        return {
            "type": "step",
            "mode": self.mode,
            "text": self.text,
            "patch_text": self.patch_text,
            "injected": self.injected,
            "attempts": self.attempts,
            "status": self.status,
            "objective": self.objective,
            "accepted_at": self.accepted_at,
        }


@dataclass
class PendingStep:
    mode: str
    text: str
    patch_text: str
    injected: dict
    attempts: int
    model: ModelIR
    instance: Instance
    report: SolveReport
    plan_sections: Optional[dict]
    transcript: tuple
    diff: list


@dataclass
class PipelineSession:
    id: str
    kind: str
    instance: Instance
    base_model: ModelIR
    model: ModelIR
    created_at: str
    updated_at: str
    history: list[HistoryStep] = field(default_factory=list)
    schedule: Optional[Assignment] = None
    last_report: Optional[SolveReport] = None
    pending: Optional[PendingStep] = None
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def schedule_family(self) -> str:
        return schedule_family(self.kind)

    def require_schedule(self) -> Assignment:
        if self.schedule is None:
            raise NoSchedule(f"session {self.id} has no schedule; run solve first")
        return self.schedule


def export_schedule(session: PipelineSession) -> dict:
    """Tabular schedule document: one row per worker/nurse, one column per
    day/hour, cells carrying the shift id or an hour mark."""
    schedule = session.require_schedule()
    model = session.model
    fam = model.family(session.schedule_family())
    vals = schedule.family_values(fam.name)
    kind = session.kind

    if kind == "gsp":
        w_count, h_count = fam.dims
        headers = [f"h{h}" for h in range(h_count)]
        rows = []
        for w in range(w_count):
            rows.append(["x" if vals[w * h_count + h] else "" for h in range(h_count)])
        labels = [f"worker{w}" for w in range(w_count)]
    else:
        n_count, d_count, s_count = fam.dims
        headers = [f"d{d}" for d in range(d_count)]
        rows = []
        for n in range(n_count):
            row = []
            for d in range(d_count):
                cell = ""
                for s in range(s_count):
                    if vals[(n * d_count + d) * s_count + s]:
                        cell = f"s{s}"
                        break
                row.append(cell)
            rows.append(row)
        labels = [f"nurse{n}" for n in range(n_count)]

    evaluation = evaluate_assignment(model, schedule)
    report = session.last_report
    return {
        "kind": kind,
        "family": fam.name,
        "row_labels": labels,
        "columns": headers,
        "rows": rows,
        "objective": evaluation.objective,
        "feasible": evaluation.feasible,
        "status": report.status if report else None,
    }


def render_schedule_text(doc: dict) -> str:
    width = max(
        [len(c) for c in doc["columns"]]
        + [len(str(cell)) for row in doc["rows"] for cell in row]
        + [2]
    ) + 1
    label_w = max(len(r) for r in doc["row_labels"]) + 2
    lines = ["".ljust(label_w) + "".join(c.rjust(width) for c in doc["columns"])]
    for label, row in zip(doc["row_labels"], doc["rows"]):
        lines.append(label.ljust(label_w) + "".join(str(c).rjust(width) for c in row))
    lines.append(f"objective: {doc['objective']}  status: {doc['status']}")
    return "\n".join(lines)


class SessionStore:
    """Disk-backed registry of sessions (one append-only JSONL per session)."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, PipelineSession] = {}
        self._lock = threading.Lock()
        self._load_existing()

    def _path(self, session_id: str) -> Path:
        return self.directory / f"{session_id}.jsonl"

    def _load_existing(self):
        for path in sorted(self.directory.glob("*.jsonl")):
            try:
                session = self._replay(path)
            except Exception:
                continue  # unreadable session files are skipped, not fatal
            self._sessions[session.id] = session

    def _replay(self, path: Path) -> PipelineSession:
        lines = [json.loads(line) for line in path.read_text().splitlines() if line.strip()]
        head = lines[0]
        assert head["type"] == "create"
        instance = Instance.from_json(head["kind"], head["instance"])
        base_model = build_model(instance)
        session = PipelineSession(
            id=head["id"],
            kind=head["kind"],
            instance=instance,
            base_model=base_model,
            model=base_model,
            created_at=head["created_at"],
            updated_at=head["created_at"],
        )
        for raw in lines[1:]:
            if raw["type"] != "step":
                continue
            injected = raw.get("injected") or {}
            if injected:
                merged = dict(session.instance.data)
                merged.update(injected)
                session.instance = Instance.from_json(session.kind, merged)
            patch = parse(raw["patch_text"])
            bound = bind(patch, session.model, session.instance)
            grounded = ground(bound, session.model)
            session.model = apply_patch(session.model, grounded)
            session.history.append(
                HistoryStep(
                    mode=raw["mode"],
                    text=raw["text"],
                    patch_text=raw["patch_text"],
                    injected=injected,
                    attempts=raw.get("attempts", 1),
                    status=raw.get("status", ""),
                    objective=raw.get("objective"),
                    accepted_at=raw.get("accepted_at", head["created_at"]),
                )
            )
            session.updated_at = raw.get("accepted_at", session.updated_at)
        return session

    def create(self, kind: str, data: dict) -> PipelineSession:
        instance = Instance.from_json(kind, data)
        model = build_model(instance)
        session_id = f"sess-{uuid.uuid4().hex[:12]}"
        now = _now()
        session = PipelineSession(
            id=session_id,
            kind=kind,
            instance=instance,
            base_model=model,
            model=model,
            created_at=now,
            updated_at=now,
        )
        with self._lock:
            self._sessions[session_id] = session
        with open(self._path(session_id), "w") as fh:
            fh.write(
                json.dumps(
                    {
                        "type": "create",
                        "id": session_id,
                        "kind": kind,
                        "instance": data,
                        "created_at": now,
                    }
                )
                + "\n"
            )
        return session

    def get(self, session_id: str) -> PipelineSession:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSession(session_id) from None

    def ids(self) -> list[str]:
        return sorted(self._sessions)

    def append_step(self, session: PipelineSession, step: HistoryStep):
        with open(self._path(session.id), "a") as fh:
            fh.write(json.dumps(step.to_json()) + "\n")


def solve_session(session: PipelineSession, limits: SolveLimits) -> SolveReport:
    """Solve the current model and adopt the schedule when one was found."""
    with session.lock:
        report = solve(session.model, limits)
        session.last_report = report
        if report.best is not None:
            session.schedule = report.best
        session.updated_at = _now()
        return report


def stage_patch(
    session: PipelineSession,
    mode: str,
    text: str,
    patch_text: str,
    grounded,
    injected: dict,
    attempts: int,
    limits: SolveLimits,
    plan_sections=None,
    transcript=(),
) -> PendingStep:
    """Apply + solve a candidate patch without committing it."""
    if injected:
        merged = dict(session.instance.data)
        merged.update(injected)
        instance = Instance.from_json(session.kind, merged)
    else:
        instance = session.instance
    model = apply_patch(session.model, grounded)
    report = solve(model, limits)
    diff = []
    if report.best is not None and session.schedule is not None:
        fam = session.model.family(session.schedule_family())
        diff = diff_schedules(session.schedule, report.best, fam.name, fam.dims)
    pending = PendingStep(
        mode=mode,
        text=text,
        patch_text=patch_text,
        injected=injected,
        attempts=attempts,
        model=model,
        instance=instance,
        report=report,
        plan_sections=plan_sections,
        transcript=transcript,
        diff=diff,
    )
    session.pending = pending
    return pending


def accept_pending(store: SessionStore, session: PipelineSession) -> HistoryStep:
    with session.lock:
        pending = session.pending
        if pending is None:
            raise NoSchedule("nothing to accept: no pending patch")
        if pending.report.best is None:
            # accept-on-solve: a patch without a schedule cannot be committed
            raise NoSchedule(
                f"cannot accept: patched model solve was {pending.report.status}"
            )
        objective = evaluate_assignment(pending.model, pending.report.best).objective
        step = HistoryStep(
            mode=pending.mode,
            text=pending.text,
            patch_text=pending.patch_text,
            injected=pending.injected,
            attempts=pending.attempts,
            status=pending.report.status,
            objective=objective,
            accepted_at=_now(),
        )
        session.model = pending.model
        session.instance = pending.instance
        session.schedule = pending.report.best
        session.last_report = pending.report
        session.history.append(step)
        session.pending = None
        session.updated_at = step.accepted_at
        store.append_step(session, step)
        return step


def discard_pending(session: PipelineSession):
    with session.lock:
        session.pending = None


def injected_perturbation(session: PipelineSession, t_perturb: int) -> dict:
    """Dynamic keys for a perturbation bound: the current schedule plus T."""
    schedule = session.require_schedule()
    return {
        "origSchedule": assignment_to_nested(
            session.model, schedule, session.schedule_family()
        ),
        "T_perturb": t_perturb,
    }


def canonical_patch_text(text: str) -> str:
    """Normalize patch text to its pretty-printed parse for persistence."""
    return pretty_print(parse(text))
