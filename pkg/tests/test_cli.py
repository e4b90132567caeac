"""End-to-end `bench` command line: exit codes and output files."""
from __future__ import annotations

import csv

from gangsteal.cli import main
from gangsteal.trace import read_jsonl

FAST = [
    "--workers", "2", "--tiles", "2", "--panel-team", "2", "--panel-steps", "1",
    "--block-cols", "2", "--compute-us", "30", "--comm-latency-us", "0",
    "--repeats", "2", "--watchdog", "10",
]


def test_run_writes_trace_and_summary(tmp_path, capsys):
    trace = tmp_path / "t.jsonl"
    summary = tmp_path / "s.csv"
    rc = main(["run", "--kernel", "chol", *FAST,
               "--trace", str(trace), "--summary", str(summary)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "kernel=cholesky_like" in out
    assert "median makespan" in out

    header, rows = read_jsonl(str(trace))
    assert header["trace_version"] == 1
    assert header["spec"]["kernel"] == "cholesky_like"  # alias expanded
    assert header["gang"] == "on"
    assert rows, "trace file has no events"

    with open(summary, newline="") as fh:
        parsed = list(csv.DictReader(fh))
    assert len(parsed) == 2  # one row per aggregated run, warm-up excluded
    assert parsed[0]["kernel"] == "cholesky_like"
    assert parsed[0]["workers"] == "2"
    assert float(parsed[0]["makespan_s"]) > 0


def test_run_each_kernel_alias(capsys):
    for alias, resolved in (("lu", "lu_like"), ("qr", "qr_like")):
        rc = main(["run", "--kernel", alias, *FAST, "--repeats", "1"])
        assert rc == 0
        assert f"kernel={resolved}" in capsys.readouterr().out


def test_run_gang_off_and_naive_complete(capsys):
    for gang in ("off", "naive"):
        rc = main(["run", "--kernel", "lu", "--gang", gang, *FAST, "--repeats", "1"])
        assert rc == 0
        assert f"gang={gang}" in capsys.readouterr().out


def test_run_unwritable_output_exits_1(tmp_path, capsys):
    rc = main(["run", "--kernel", "lu", *FAST, "--repeats", "1",
               "--summary", str(tmp_path / "no" / "such" / "dir" / "s.csv")])
    assert rc == 1
    assert "cannot write output" in capsys.readouterr().err


def test_run_reads_scheduler_env(monkeypatch, capsys):
    monkeypatch.setenv("GANG_SCHED", "0")
    monkeypatch.setenv("SCHED_SEED", "99")
    rc = main(["run", "--kernel", "lu", *FAST, "--repeats", "1"])
    assert rc == 0


def test_stress_ok_range(capsys):
    rc = main(["stress", "--seeds", "0:3", "--watchdog", "10"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.count("ok") == 3
    assert "3 programs, 0 deadlocked" in out


def test_stress_bad_seed_range_exits_1(capsys):
    rc = main(["stress", "--seeds", "nope"])
    assert rc == 1
    assert "bad --seeds" in capsys.readouterr().err


def test_stress_wedge_demo_exits_2(capsys):
    rc = main(["stress", "--wedge-demo", "--watchdog", "0.45"])
    assert rc == 2
    assert "deadlocked (caught by watchdog)" in capsys.readouterr().out
