"""CLI: exit codes, stderr/stdout separation, JSON mode, the serve command."""

import json
import os
import shutil
import signal
import socket
import subprocess
import sys
import time
import urllib.request
from pathlib import Path

import pytest

from casegen import fixture_path
from casegen.cli import main

PERFECT_SCRIPT = """\
perform check_vitals
tick 30
perform give_oxygen
perform record_ecg
answer record_ecg c1
perform call_cathlab
tick 60
diagnose pathology=mi;medical_ward=cardiology;prescription=aspirin,heparin;pre_emergency_care=monitoring
"""

# skip give_oxygen (missed required, -10) and waste time on wait_and_see
# (useless, -5): 100 - 15 = 85 by the penalty formula
FLAWED_SCRIPT = """\
perform check_vitals
perform record_ecg
answer record_ecg c1
perform call_cathlab
perform wait_and_see
diagnose pathology=mi;medical_ward=cardiology;prescription=aspirin,heparin;pre_emergency_care=monitoring
"""


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def medical_bundle(tmp_path, capsys):
    out = tmp_path / "bundle"
    code, _, err = run_cli(
        ["compile", str(fixture_path("medical_emergency")), "-o", str(out)], capsys
    )
    assert code == 0, err
    return out


def test_scaffold_then_compile_round_trip(tmp_path, capsys):
    target = tmp_path / "wb"
    code, out, err = run_cli(
        ["scaffold", str(target), "--skin", "mechanics"], capsys
    )
    assert code == 0
    code, out, err = run_cli(
        ["compile", str(target), "-o", str(tmp_path / "bundle")], capsys
    )
    assert code == 0
    assert err == ""
    code, _, _ = run_cli(["scaffold", str(target), "--skin", "mechanics"], capsys)
    assert code == 1  # path collision


def test_compile_broken_workbook_exits_1_with_cell_diagnostic(tmp_path, capsys):
    workbook = tmp_path / "wb"
    shutil.copytree(fixture_path("medical_emergency"), workbook)
    actions = (workbook / "actions.csv").read_text(encoding="utf-8")
    (workbook / "actions.csv").write_text(
        actions.replace("visible", "hiden", 1), encoding="utf-8"
    )
    code, out, err = run_cli(
        ["compile", str(workbook), "-o", str(tmp_path / "bundle")], capsys
    )
    assert code == 1
    assert "actions.csv:2:initial_state" in err
    assert not (tmp_path / "bundle").exists()  # no bundle on errors


def test_validate_warnings_do_not_fail_unless_strict(tmp_path, capsys):
    workbook = tmp_path / "wb"
    shutil.copytree(fixture_path("medical_emergency"), workbook)
    meta = workbook / "meta.csv"
    lines = meta.read_text(encoding="utf-8").splitlines()
    lines[0] += ",comment"
    meta.write_text("\n".join(lines) + "\n", encoding="utf-8")

    code, _, err = run_cli(["validate", str(workbook)], capsys)
    assert code == 0
    assert "unknown column 'comment'" in err

    code, _, _ = run_cli(["validate", str(workbook), "--strict"], capsys)
    assert code == 1


def test_validate_reports_lint_warnings(tmp_path, capsys):
    workbook = tmp_path / "wb"
    shutil.copytree(fixture_path("medical_emergency"), workbook)
    actions = (workbook / "actions.csv").read_text(encoding="utf-8")
    (workbook / "actions.csv").write_text(
        actions.replace(
            "on_correct { show(call_cathlab) }; on_wrong { add(accuracy, -5) }",
            "on_wrong { add(accuracy, -5) }",
        ),
        encoding="utf-8",
    )
    code, _, err = run_cli(["validate", str(workbook)], capsys)
    assert code == 0
    assert "unreachable card 'call_cathlab'" in err


def test_simulate_perfect_play_gives_grade_100(medical_bundle, tmp_path, capsys):
    script = tmp_path / "play.txt"
    script.write_text(PERFECT_SCRIPT, encoding="utf-8")
    code, out, err = run_cli(["simulate", str(medical_bundle), str(script)], capsys)
    assert code == 0, err
    report = json.loads(out)
    assert report["grade"] == 100.0
    assert report["elapsed_seconds"] == 90.0


def test_simulate_flawed_play_gives_85_under_defaults(medical_bundle, tmp_path, capsys):
    script = tmp_path / "play.txt"
    script.write_text(FLAWED_SCRIPT, encoding="utf-8")
    code, out, _ = run_cli(["simulate", str(medical_bundle), str(script)], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["grade"] == 85.0
    assert report["missed_required"] == ["give_oxygen"]
    assert report["useless_performed"] == ["wait_and_see"]


def test_simulate_twice_is_byte_identical(medical_bundle, tmp_path, capsys):
    script = tmp_path / "play.txt"
    script.write_text(PERFECT_SCRIPT, encoding="utf-8")
    _, first, _ = run_cli(["simulate", str(medical_bundle), str(script)], capsys)
    _, second, _ = run_cli(["simulate", str(medical_bundle), str(script)], capsys)
    assert first == second


def test_simulate_accepts_zip_bundles(tmp_path, capsys):
    out = tmp_path / "bundle.zip"
    code, _, _ = run_cli(
        ["compile", str(fixture_path("medical_emergency")), "-o", str(out)], capsys
    )
    assert code == 0 and out.is_file()
    script = tmp_path / "play.txt"
    script.write_text(PERFECT_SCRIPT, encoding="utf-8")
    code, stdout, _ = run_cli(["simulate", str(out), str(script)], capsys)
    assert code == 0
    assert json.loads(stdout)["grade"] == 100.0


def test_simulate_bad_inputs_are_usage_errors(medical_bundle, tmp_path, capsys):
    script = tmp_path / "bad.txt"
    script.write_text("jump somewhere\n", encoding="utf-8")
    code, _, err = run_cli(["simulate", str(medical_bundle), str(script)], capsys)
    assert code == 2
    assert "unknown operation" in err

    code, _, _ = run_cli(
        ["simulate", str(tmp_path / "missing"), str(script)], capsys
    )
    assert code == 2

    illegal = tmp_path / "illegal.txt"
    illegal.write_text("perform call_cathlab\ndiagnose pathology=mi\n")
    code, _, err = run_cli(["simulate", str(medical_bundle), str(illegal)], capsys)
    assert code == 1
    assert "illegal play" in err


def test_json_format_emits_single_documents(tmp_path, capsys):
    target = tmp_path / "wb"
    code, out, _ = run_cli(
        ["scaffold", str(target), "--skin", "law", "--format", "json"], capsys
    )
    assert code == 0 and json.loads(out)["skin"] == "law"

    code, out, _ = run_cli(
        ["compile", str(target), "-o", str(tmp_path / "b"), "--format", "json"],
        capsys,
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["case_id"] == "new-legal-case"
    assert doc["diagnostics"] == []

    code, out, _ = run_cli(["validate", str(target), "--format", "json"], capsys)
    assert code == 0 and json.loads(out) == {"diagnostics": []}

    script = tmp_path / "s.txt"
    script.write_text(
        "perform study_facts\nperform study_rules\nanswer study_rules c1\n"
        "diagnose qualification=correct_q\n",
        encoding="utf-8",
    )
    code, out, _ = run_cli(
        ["simulate", str(tmp_path / "b"), str(script), "--format", "json"], capsys
    )
    assert code == 0
    assert json.loads(out)["grade"] == 100.0


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate"])  # missing arguments
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_serve_rejects_bad_store_path(tmp_path, capsys):
    bogus = tmp_path / "file"
    bogus.write_text("x")
    code, _, err = run_cli(["serve", "--store", str(bogus)], capsys)
    assert code == 2
    assert "not a directory" in err


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def test_serve_answers_requests_and_shuts_down_cleanly(tmp_path):
    port = _free_port()
    env = dict(os.environ, CASEGEN_STORE=str(tmp_path / "store"))
    process = subprocess.Popen(
        [sys.executable, "-m", "casegen.cli", "serve", "--port", str(port)],
        env=env,
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        cwd=tmp_path,
    )
    try:
        url = f"http://127.0.0.1:{port}/api/v1/cases"
        body = None
        for _ in range(100):
            try:
                with urllib.request.urlopen(url, timeout=1) as response:
                    body = json.loads(response.read())
                break
            except OSError:
                time.sleep(0.1)
        assert body == {"cases": []}
        process.send_signal(signal.SIGTERM)
        # uvicorn re-raises the signal after a graceful shutdown, so both a
        # zero exit and death-by-SIGTERM-after-cleanup count as clean
        assert process.wait(timeout=10) in (0, -signal.SIGTERM)
        stderr = process.stderr.read().decode()
        assert "Traceback" not in stderr
        # traces/config intact: the store directory survives untouched
        assert (tmp_path / "store" / "sessions").is_dir()
    finally:
        if process.poll() is None:
            process.kill()
