"""Command-line interface.

Verbs: solve, constrain, eval, paraphrase, serve, export. Global flags pick
the config file, backend, time limit, and RNG seed. The eval verb writes
the results table (text + CSV), per-case records (JSON), and figures (PNG)
into its output directory.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import agents, evalharness
from .config import data_path, load_config, make_backend
from .dsl import bind, ground, parse
from .model import Instance, apply_patch, build_model
from .rag import Store
from .session import (
    SessionStore,
    canonical_patch_text,
    export_schedule,
    injected_perturbation,
    render_schedule_text,
    solve_session,
    stage_patch,
    accept_pending,
)
from .solver import SolveLimits


def _global_flags(parser, suppress=False):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="JSON config file")
    parser.add_argument(
        "--backend", choices=["fixture", "http"], default=default, help="LLM backend override"
    )
    parser.add_argument(
        "--fixture", default=default, help="fixture transcript file for the fixture backend"
    )
    parser.add_argument(
        "--time-limit", type=float, default=default, help="solver time limit in seconds"
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=argparse.SUPPRESS if suppress else 0,
        help="seed for any randomized helpers",
    )


def _build_parser() -> argparse.ArgumentParser:
    # global flags are accepted both before and after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    p = argparse.ArgumentParser(prog="dynsched", description=__doc__)
    _global_flags(p)
    sub = p.add_subparsers(dest="command", required=True)

    def add_parser(name, **kwargs):
        return sub.add_parser(name, parents=[common], **kwargs)

    sp = add_parser("solve", help="create a session from an instance file and solve it")
    sp.add_argument("instance", help="instance JSON file")
    sp.add_argument("--kind", required=True, choices=["gsp", "nsp", "static_nurse"])
    sp.add_argument("--session-dir", default="./sessions")

    cp = add_parser("constrain", help="add a constraint to a session (NL or DSL)")
    cp.add_argument("session_id")
    cp.add_argument("--session-dir", default="./sessions")
    group = cp.add_mutually_exclusive_group(required=True)
    group.add_argument("--nl", help="natural-language constraint text")
    group.add_argument("--dsl", help="patch file in the constraint language")
    cp.add_argument("--t-perturb", type=int, help="perturbation bound vs the current schedule")
    cp.add_argument("--dry-run", action="store_true", help="stage only; do not accept")

    ep = add_parser("eval", help="run the automatic evaluation over a test set")
    ep.add_argument("--testset", default=str(data_path("testset.json")))
    ep.add_argument("--out", default="./eval-out", help="report output directory")

    pp = add_parser("paraphrase", help="generate paraphrases of a constraint description")
    pp.add_argument("text")
    pp.add_argument("-n", type=int, default=4)

    vp = add_parser("serve", help="run the HTTP API")
    vp.add_argument("--host", default="127.0.0.1")
    vp.add_argument("--port", type=int, default=8787)
    vp.add_argument("--session-dir", default="./sessions")

    xp = add_parser("export", help="export a session's schedule as CSV")
    xp.add_argument("session_id")
    xp.add_argument("--session-dir", default="./sessions")
    xp.add_argument("--out", help="output CSV path (default: stdout)")
    return p


def _config_from_args(args):
    cfg = load_config(args.config)
    updates = {}
    if args.backend:
        updates["backend"] = args.backend
    if args.fixture:
        updates["fixture_path"] = args.fixture
    if args.time_limit:
        updates["time_limit"] = args.time_limit
    if updates:
        from dataclasses import replace

        cfg = replace(cfg, **updates)
    return cfg


def _seed_store(cfg) -> Store:
    path = cfg.resolved_seed_store()
    return Store.load(path) if path.exists() else Store()


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    random.seed(args.seed)
    cfg = _config_from_args(args)
    limits = SolveLimits(time_limit=cfg.time_limit)

    if args.command == "solve":
        data = json.loads(Path(args.instance).read_text())
        sessions = SessionStore(args.session_dir)
        session = sessions.create(args.kind, data)
        report = solve_session(session, limits)
        print(f"session: {session.id}")
        print(f"status: {report.status}  bounds: [{report.lower_bound}, {report.upper_bound}]  nodes: {report.nodes}")
        if session.schedule is not None:
            print(render_schedule_text(export_schedule(session)))
        return 0

    if args.command == "constrain":
        sessions = SessionStore(args.session_dir)
        session = sessions.get(args.session_id)
        if session.schedule is None:
            # reloaded sessions re-derive their schedule before diffing
            solve_session(session, limits)
        injected = {}
        if args.t_perturb is not None:
            injected = injected_perturbation(session, args.t_perturb)
        work_instance = session.instance
        if injected:
            merged = dict(session.instance.data)
            merged.update(injected)
            work_instance = Instance.from_json(session.kind, merged)

        if args.nl:
            backend = make_backend(cfg)
            store = _seed_store(cfg)

            class _View:
                model = session.model
                instance = work_instance

            result = agents.run_pipeline(_View, args.nl, backend, store, cfg.max_attempts)
            patch_text = canonical_patch_text(result.transcript[-1][1])
            grounded = result.grounded
            attempts = result.attempts
            text = args.nl
            mode = "nl"
        else:
            text = Path(args.dsl).read_text()
            patch = parse(text)
            bound = bind(patch, session.model, work_instance)
            grounded = ground(bound, session.model)
            patch_text = canonical_patch_text(text)
            attempts = 1
            mode = "dsl"

        pending = stage_patch(
            session, mode, text, patch_text, grounded, injected, attempts, limits
        )
        print(f"patch ({attempts} attempt(s)):\n{pending.patch_text}")
        print(f"status: {pending.report.status}  changed cells: {len(pending.diff)}")
        if pending.report.best is None:
            print("patched model has no schedule; discarding")
            session.pending = None
            return 1
        if args.dry_run:
            print("dry run: not accepted")
            session.pending = None
            return 0
        accept_pending(sessions, session)
        print("accepted")
        return 0

    if args.command == "eval":
        backend = make_backend(cfg)
        store = _seed_store(cfg)
        cases = evalharness.load_testset(args.testset)
        table, records = evalharness.run_testset(cases, backend, store, limits, cfg.max_attempts)
        print(table.render_text())
        written = evalharness.write_report(args.out, table, records)
        print(f"report written to {args.out}: {', '.join(written)}")
        return 0

    if args.command == "paraphrase":
        backend = make_backend(cfg)
        variants = agents.paraphrase(args.text, args.n, backend)
        for i, v in enumerate(variants, 1):
            print(f"{i}. {v}")
        print("note: review paraphrases by hand before adding them to a test set")
        return 0

    if args.command == "serve":
        import uvicorn

        from dataclasses import replace

        from .service import create_app

        cfg = replace(cfg, sessions_dir=args.session_dir)
        app = create_app(cfg)
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
        return 0

    if args.command == "export":
        sessions = SessionStore(args.session_dir)
        session = sessions.get(args.session_id)
        if session.schedule is None:
            # schedules are derived, never persisted: re-solve on demand
            solve_session(session, limits)
        doc = export_schedule(session)
        lines = ["," + ",".join(doc["columns"])]
        for label, row in zip(doc["row_labels"], doc["rows"]):
            lines.append(label + "," + ",".join(str(c) for c in row))
        lines.append(f"# objective,{doc['objective']}")
        lines.append(f"# status,{doc['status']}")
        text = "\n".join(lines) + "\n"
        if args.out:
            Path(args.out).write_text(text)
            print(f"wrote {args.out}")
        else:
            sys.stdout.write(text)
        return 0

    return 2


if __name__ == "__main__":
    raise SystemExit(main())
