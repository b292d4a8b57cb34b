"""HTTP JSON API for the planner UI and scripted use."""
from __future__ import annotations

import math
from typing import Any, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from . import agents, evalharness
from .agents import BackendError, FixExhausted, PlanParseError
from .config import AppConfig, make_backend
from .dsl import BindError, BoundsViolation, ParseError, bind, ground, parse
from .model import SchemaError
from .rag import Store
from .session import (
    NoSchedule,
    SessionStore,
    UnknownSession,
    accept_pending,
    canonical_patch_text,
    discard_pending,
    export_schedule,
    injected_perturbation,
    solve_session,
    stage_patch,
)
from .solver import SolveLimits


class CreateSessionRequest(BaseModel):
    kind: str
    instance: dict


class SolveRequest(BaseModel):
    time_limit: Optional[float] = Field(default=None, gt=0)
    node_limit: Optional[int] = Field(default=None, gt=0)


class ConstraintRequest(BaseModel):
    mode: str  # "nl" | "dsl"
    text: str
    t_perturb: Optional[int] = Field(default=None, ge=0)


class EvalRequest(BaseModel):
    testset: str
    backend: str = "fixture"
    fixture: Optional[str] = None
    time_limit: Optional[float] = None


def _jsonable(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def report_dict(report) -> dict:
    return {
        "status": report.status,
        "lower_bound": _jsonable(report.lower_bound),
        "upper_bound": _jsonable(report.upper_bound),
        "nodes": report.nodes,
        "wall_time": report.wall_time,
    }


def _diff_entries(diff) -> list[dict]:
    return [
        {"index": list(idx), "old": old, "new": new} for idx, old, new in diff
    ]


def create_app(
    config: AppConfig,
    backend=None,
    store: Optional[Store] = None,
    sessions: Optional[SessionStore] = None,
) -> FastAPI:
    app = FastAPI(title="dynsched", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    if backend is None:
        backend = make_backend(config)
    if store is None:
        seed = config.resolved_seed_store()
        store = Store.load(seed) if seed.exists() else Store()
    if sessions is None:
        sessions = SessionStore(config.sessions_dir)

    state = {"config": config, "backend": backend, "store": store, "sessions": sessions}
    app.state.dynsched = state

    def limits(time_limit=None, node_limit=None) -> SolveLimits:
        return SolveLimits(
            time_limit=time_limit or config.time_limit, node_limit=node_limit
        )

    def get_session(session_id: str):
        try:
            return sessions.get(session_id)
        except UnknownSession:
            raise HTTPException(404, detail={"error": "UnknownSession", "message": session_id})

    def fail(status: int, exc: Exception):
        kind = agents.error_kind(exc) if isinstance(exc, (ParseError, BindError, BoundsViolation)) else type(exc).__name__
        detail: dict[str, Any] = {"error": kind, "message": str(exc)}
        span = getattr(exc, "span", None)
        if span is not None:
            detail["span"] = {
                "line": span.line,
                "col": span.col,
                "end_line": span.end_line,
                "end_col": span.end_col,
            }
        elif isinstance(exc, ParseError):
            detail["span"] = {
                "line": exc.line,
                "col": exc.col,
                "end_line": exc.line,
                "end_col": exc.col,
            }
        raise HTTPException(status, detail=detail)

    @app.get("/health")
    def health():
        return {"ok": True}

    @app.post("/sessions")
    def create_session(req: CreateSessionRequest):
        try:
            session = sessions.create(req.kind, req.instance)
        except SchemaError as exc:
            fail(400, exc)
        return {"id": session.id, "kind": session.kind, "created_at": session.created_at}

    @app.post("/sessions/{session_id}/solve")
    def solve_endpoint(session_id: str, req: SolveRequest):
        session = get_session(session_id)
        report = solve_session(session, limits(req.time_limit, req.node_limit))
        return {"report": report_dict(report), "has_schedule": session.schedule is not None}

    @app.post("/sessions/{session_id}/constraints")
    def add_constraint(session_id: str, req: ConstraintRequest):
        session = get_session(session_id)
        if req.mode not in ("nl", "dsl"):
            raise HTTPException(422, detail={"error": "BadMode", "message": req.mode})
        injected = {}
        try:
            if req.t_perturb is not None:
                injected = injected_perturbation(session, req.t_perturb)
                merged = dict(session.instance.data)
                merged.update(injected)
                from .model import Instance as _Instance

                work_instance = _Instance.from_json(session.kind, merged)
            else:
                work_instance = session.instance

            class _View:
                model = session.model
                instance = work_instance

            if req.mode == "nl":
                result = agents.run_pipeline(
                    _View, req.text, backend, store, config.max_attempts
                )
                patch_text = canonical_patch_text(result.transcript[-1][1])
                grounded = result.grounded
                attempts = result.attempts
                plan_sections = (
                    {
                        "new_params": list(result.plan.new_params),
                        "new_vars": list(result.plan.new_vars),
                        "new_constraints_text": result.plan.new_constraints_text,
                    }
                    if result.plan
                    else None
                )
                transcript = result.transcript
            else:
                patch = parse(req.text)
                bound = bind(patch, session.model, work_instance)
                grounded = ground(bound, session.model)
                patch_text = canonical_patch_text(req.text)
                attempts = 1
                plan_sections = None
                transcript = ()
        except NoSchedule as exc:
            fail(409, exc)
        except (ParseError, BindError, BoundsViolation) as exc:
            fail(422, exc)
        except FixExhausted as exc:
            raise HTTPException(
                422,
                detail={
                    "error": "FixExhausted",
                    "message": str(exc),
                    "last_error": exc.last_kind,
                    "attempts": len(exc.transcript),
                    "transcript": [
                        {"prompt": p[:400], "response": r, "note": n}
                        for p, r, n in exc.transcript
                    ],
                },
            )
        except (PlanParseError, BackendError) as exc:
            fail(422, exc)
        except SchemaError as exc:
            fail(400, exc)

        pending = stage_patch(
            session,
            req.mode,
            req.text,
            patch_text,
            grounded,
            injected,
            attempts,
            limits(),
            plan_sections,
            transcript,
        )
        return {
            "patch_text": pending.patch_text,
            "plan": pending.plan_sections,
            "attempts": pending.attempts,
            "report": report_dict(pending.report),
            "diff": _diff_entries(pending.diff),
            "hamming": len(pending.diff),
            "injected": {k: v for k, v in pending.injected.items() if k != "origSchedule"},
        }

    @app.post("/sessions/{session_id}/accept")
    def accept(session_id: str):
        session = get_session(session_id)
        try:
            step = accept_pending(sessions, session)
        except NoSchedule as exc:
            fail(409, exc)
        return {"accepted": True, "history_length": len(session.history), "status": step.status}

    @app.post("/sessions/{session_id}/discard")
    def discard(session_id: str):
        session = get_session(session_id)
        discard_pending(session)
        return {"discarded": True}

    @app.get("/sessions/{session_id}/schedule")
    def schedule(session_id: str):
        session = get_session(session_id)
        try:
            return export_schedule(session)
        except NoSchedule as exc:
            fail(409, exc)

    @app.get("/sessions/{session_id}/diff")
    def diff(session_id: str):
        session = get_session(session_id)
        pending = session.pending
        if pending is None:
            return {"diff": [], "hamming": 0, "pending": False}
        return {
            "diff": _diff_entries(pending.diff),
            "hamming": len(pending.diff),
            "pending": True,
        }

    @app.get("/sessions/{session_id}/trace")
    def trace(session_id: str):
        session = get_session(session_id)
        pending = session.pending
        if pending is None:
            return {"pending": False, "plan": None, "transcript": [], "attempts": 0}
        return {
            "pending": True,
            "plan": pending.plan_sections,
            "attempts": pending.attempts,
            "patch_text": pending.patch_text,
            "transcript": [
                {"prompt": p, "response": r, "note": n} for p, r, n in pending.transcript
            ],
        }

    @app.get("/sessions/{session_id}/history")
    def history(session_id: str):
        session = get_session(session_id)
        return {
            "id": session.id,
            "kind": session.kind,
            "created_at": session.created_at,
            "updated_at": session.updated_at,
            "steps": [step.to_json() for step in session.history],
        }

    @app.post("/eval/run")
    def eval_run(req: EvalRequest):
        eval_backend = backend
        if req.backend == "fixture" and req.fixture:
            eval_backend = agents.FixtureBackend.from_file(req.fixture)
        cases = evalharness.load_testset(req.testset)
        table, records = evalharness.run_testset(
            cases,
            eval_backend,
            store,
            SolveLimits(time_limit=req.time_limit or config.time_limit),
            config.max_attempts,
        )
        return {
            "table": table.to_json(),
            "cases": [r.to_json() for r in records],
        }

    return app
