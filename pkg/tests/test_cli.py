"""CLI verbs end to end (in-process)."""
import json

import pytest

from dynsched.cli import main
from dynsched.config import data_path


@pytest.fixture()
def gsp_file(tmp_path):
    data = {
        "W": 1,
        "H": 4,
        "T": 1,
        "BMin": 1,
        "BMax": 3,
        "RMin": 1,
        "availableHours": [[1, 1, 1, 1]],
        "workerTaskSkills": [[1]],
        "taskHour": [1],
    }
    path = tmp_path / "gsp.json"
    path.write_text(json.dumps(data))
    return path


def _session_id(capsys):
    out = capsys.readouterr().out
    for line in out.splitlines():
        if line.startswith("session: "):
            return line.split(": ", 1)[1], out
    raise AssertionError(f"no session id in output:\n{out}")


def test_solve_and_export(tmp_path, gsp_file, capsys):
    sdir = str(tmp_path / "sessions")
    assert main(["solve", str(gsp_file), "--kind", "gsp", "--session-dir", sdir]) == 0
    sid, out = _session_id(capsys)
    assert "status: Optimal" in out

    out_csv = tmp_path / "sched.csv"
    assert main(["export", sid, "--session-dir", sdir, "--out", str(out_csv)]) == 0
    text = out_csv.read_text()
    assert text.startswith(",h0,h1,h2,h3")
    assert "# status,Optimal" in text


def test_constrain_dsl_accepts(tmp_path, gsp_file, capsys):
    sdir = str(tmp_path / "sessions")
    main(["solve", str(gsp_file), "--kind", "gsp", "--session-dir", sdir])
    sid, _ = _session_id(capsys)
    patch = tmp_path / "p.dsl"
    patch.write_text("constraint workerHours[0,3] == 0\n")
    rc = main(["constrain", sid, "--session-dir", sdir, "--dsl", str(patch)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "accepted" in out


def test_eval_writes_report(tmp_path, capsys):
    payload = json.loads(data_path("testset.json").read_text())
    payload["cases"] = [c for c in payload["cases"] if c["group"] == "gsp-dayoff"]
    subset = tmp_path / "subset.json"
    subset.write_text(json.dumps(payload))
    out_dir = tmp_path / "report"
    rc = main(
        [
            "--backend",
            "fixture",
            "--fixture",
            str(data_path("fixtures/gpt4_replay.json")),
            "eval",
            "--testset",
            str(subset),
            "--out",
            str(out_dir),
        ]
    )
    out = capsys.readouterr().out
    assert rc == 0
    assert "Match" in out
    assert (out_dir / "results.csv").exists()
    assert (out_dir / "outcomes.png").exists()


def test_paraphrase_with_inline_fixture(tmp_path, capsys):
    from dynsched.agents import build_paraphrase_prompt, prompt_hash

    prompt = build_paraphrase_prompt("Nurse K cannot work on day D1.", 2)
    fixture = {
        "version": 1,
        "name": "para",
        "records": [
            {
                "prompt_sha256": prompt_hash(prompt),
                "stage": "paraphrase",
                "response": "1. Nurse K is off on day D1.\n2. Day D1 is blocked for nurse K.",
            }
        ],
    }
    path = tmp_path / "fixture.json"
    path.write_text(json.dumps(fixture))
    rc = main(
        [
            "--backend",
            "fixture",
            "--fixture",
            str(path),
            "paraphrase",
            "Nurse K cannot work on day D1.",
            "-n",
            "2",
        ]
    )
    out = capsys.readouterr().out
    assert rc == 0
    assert "1. Nurse K is off on day D1." in out
    assert "review" in out


def test_constrain_nl_via_fixture(tmp_path, capsys):
    motivating = json.loads(data_path("motivating_instance.json").read_text())
    inst_file = tmp_path / "inst.json"
    inst_file.write_text(json.dumps(motivating["instance"]))
    sdir = str(tmp_path / "sessions")
    main(["solve", str(inst_file), "--kind", "static_nurse", "--session-dir", sdir])
    sid, _ = _session_id(capsys)
    ui_demo = json.loads(data_path("fixtures/ui_demo.json").read_text())
    rc = main(
        [
            "constrain",
            sid,
            "--session-dir",
            sdir,
            "--nl",
            ui_demo["nl"],
            "--backend",
            "fixture",
            "--fixture",
            str(data_path("fixtures/ui_demo.json")),
        ]
    )
    out = capsys.readouterr().out
    assert rc == 0
    assert "2 attempt(s)" in out
    assert "X[3, 6, s] == 0" in out
    assert "accepted" in out
