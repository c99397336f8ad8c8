"""Command-line interface tests (all against the simulated device)."""

import json

import pytest

from fivebar_haptics.cli import execute


def run_cli(capsys, *argv):
    code = execute(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_ik_reference(capsys):
    code, out, _ = run_cli(capsys, "ik", "0", "-22")
    assert code == 0
    values = dict(token.split("=") for token in out.split())
    assert float(values["alpha_left"]) == pytest.approx(84.0, abs=0.5)
    assert float(values["alpha_right"]) == pytest.approx(84.0, abs=0.5)


def test_ik_unreachable(capsys):
    code, _out, err = run_cli(capsys, "ik", "0", "-60")
    assert code == 1
    assert "Unreachable" in err


def test_force_defaults(capsys):
    code, out, _ = run_cli(capsys, "force")
    assert code == 0
    lines = dict(line.split("=") for line in out.strip().splitlines())
    assert float(lines["Fn"].split()[0]) == pytest.approx(1.46, abs=0.01)
    assert float(lines["alpha"].split()[0]) == pytest.approx(84.0, abs=0.5)


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as exc_info:
        execute(["ik", "not-a-number", "-22"])
    assert exc_info.value.code == 2
    with pytest.raises(SystemExit) as exc_info:
        execute(["no-such-command"])
    assert exc_info.value.code == 2


def test_workspace_csv(tmp_path, capsys):
    out_file = tmp_path / "map.csv"
    code, _out, _err = run_cli(
        capsys,
        "workspace",
        "--x-min", "-10", "--x-max", "10",
        "--y-min", "-30", "--y-max", "-15",
        "--resolution", "5",
        "--csv", str(out_file),
    )
    assert code == 0
    lines = out_file.read_text().splitlines()
    assert lines[0] == "x_mm,y_mm,state"
    assert len(lines) == 1 + 4 * 3
    assert any("REACHABLE" in line for line in lines[1:])


def test_workspace_png(tmp_path, capsys):
    png = tmp_path / "map.png"
    code, _out, _err = run_cli(
        capsys,
        "workspace",
        "--x-min", "-20", "--x-max", "20",
        "--y-min", "-35", "--y-max", "-10",
        "--resolution", "5",
        "--csv", str(tmp_path / "map.csv"),
        "--png", str(png),
    )
    assert code == 0
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_pattern_play_capture_matches_golden(tmp_path, capsys):
    from pathlib import Path

    capture = tmp_path / "p1.wire"
    code, out, _ = run_cli(capsys, "pattern", "play", "1", "--capture", str(capture))
    assert code == 0
    assert "frames=720" in out
    golden = Path(__file__).parent / "fixtures" / "static_pattern1.wire"
    assert capture.read_bytes() == golden.read_bytes()


def test_pattern_play_slippage(capsys):
    code, out, _ = run_cli(capsys, "pattern", "play", "2", "--catalog", "slippage")
    assert code == 0
    assert "pattern=2" in out


def test_experiment_run_auto_and_report_roundtrip(tmp_path, capsys):
    log = tmp_path / "session.jsonl"
    code, run_out, _ = run_cli(
        capsys,
        "experiment", "run",
        "--subject", "cli-test",
        "--seed", "11",
        "--log", str(log),
        "--auto",
    )
    assert code == 0
    assert "mean recognition rate: 100.00%" in run_out

    code, report_out, _ = run_cli(capsys, "report", str(log))
    assert code == 0
    assert "mean recognition rate: 100.00%" in report_out

    code, json_out, _ = run_cli(capsys, "report", str(log), "--json")
    assert code == 0
    payload = json.loads(json_out)
    assert payload["mean_rate"] == 1.0
    assert payload["catalog"] == "static-default"


def test_report_missing_file(capsys):
    code, _out, err = run_cli(capsys, "report", "/nonexistent/file.jsonl")
    assert code == 1
    assert "error" in err


def test_report_aggregates_multiple_logs(tmp_path, capsys):
    logs = []
    for i in range(2):
        log = tmp_path / f"s{i}.jsonl"
        run_cli(
            capsys,
            "experiment", "run",
            "--subject", f"s{i}",
            "--seed", str(i),
            "--log", str(log),
            "--auto",
        )
        logs.append(str(log))
    code, out, _ = run_cli(capsys, "report", *logs)
    assert code == 0
    assert "subjects: 2" in out
    assert "F(8,81)" not in out  # identical all-correct data is degenerate
    assert "not applicable" in out


def test_service_report_byte_identical_to_cli(tmp_path, capsys):
    """Two code paths, one oracle: the service report on a live session must
    equal the CLI report over the captured log byte for byte."""
    from fastapi.testclient import TestClient

    from fivebar_haptics.service import ServiceHub, create_app

    hub = ServiceHub(log_dir=tmp_path)
    client = TestClient(create_app(hub))
    start = client.post(
        "/experiment/start",
        json={"catalog": "static", "repetitions": 5, "seed": 21, "subject": "svc"},
    ).json()
    log_path = start["log_path"]
    schedule = {}
    for line in open(log_path):
        record = json.loads(line)
        if record["event"] == "schedule":
            schedule = dict(record["trials"])
    trial_id = start["current_trial"]["trial_id"]
    answered = 0
    while trial_id is not None:
        # deliberately mistake pattern 9 for 8 once to exercise off-diagonals
        answer = schedule[trial_id]
        if answer == 9 and answered < 1:
            answer = 8
            answered += 1
        next_trial = client.post(
            "/experiment/answer", json={"trial_id": trial_id, "answer": answer}
        ).json()["next_trial"]
        trial_id = None if next_trial is None else next_trial["trial_id"]

    service_text = client.get("/experiment/report").text
    code, cli_text, _ = run_cli(capsys, "report", log_path)
    assert code == 0
    assert cli_text == service_text
