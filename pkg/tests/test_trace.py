"""Tracer lanes, event ordering, and the JSONL / CSV file formats."""
from __future__ import annotations

import csv
import json

import pytest

from gangsteal.trace import (
    KIND_RUN_END,
    KIND_RUN_START,
    TRACE_VERSION,
    TraceEvent,
    Tracer,
    read_jsonl,
    write_jsonl,
    write_summary_csv,
)
from gangsteal.config import SchedulerConfig
from gangsteal.workloads import WorkloadSpec, run_workload_traced

CFG = SchedulerConfig(n_workers=4, seed=11)


def test_events_merge_sorted_across_lanes():
    tr = Tracer(n_workers=3)
    for i in range(30):
        tr.emit(i % 3, "push", n=i)
    tr.emit(-1, "deadlock")  # shared lane
    evs = tr.events()
    assert len(evs) == 31
    assert all(a.timestamp_ns <= b.timestamp_ns for a, b in zip(evs, evs[1:]))
    assert tr.count("push") == 30
    assert tr.count("deadlock") == 1


def test_disabled_tracer_drops_everything():
    tr = Tracer(n_workers=2, enabled=False)
    tr.emit(0, "push")
    tr.emit(-1, "push")
    assert tr.events() == []


def test_run_start_end_alternate_per_worker():
    spec = WorkloadSpec(kernel="lu_like", n_block_cols=3, tiles_per_panel=3,
                        panel_team_size=2, compute_cost_us=30.0)
    _, events = run_workload_traced(spec, CFG)
    by_worker: dict[int, list[TraceEvent]] = {}
    for ev in events:
        by_worker.setdefault(ev.worker, []).append(ev)
    for worker, evs in by_worker.items():
        # per-lane timestamps are inherently monotone; check anyway since the
        # merged view relies on it
        assert all(a.timestamp_ns <= b.timestamp_ns for a, b in zip(evs, evs[1:]))
        depth = 0
        for ev in evs:
            if ev.kind == KIND_RUN_START:
                depth += 1
                assert depth == 1, f"worker {worker}: nested run_start"
            elif ev.kind == KIND_RUN_END:
                depth -= 1
                assert depth == 0, f"worker {worker}: run_end without run_start"
        assert depth == 0


def test_jsonl_round_trip(tmp_path):
    spec = WorkloadSpec(kernel="qr_like", n_block_cols=3, tiles_per_panel=3,
                        panel_team_size=2, compute_cost_us=30.0)
    _, events = run_workload_traced(spec, CFG)
    path = tmp_path / "trace.jsonl"
    write_jsonl(events, str(path), header={"kernel": spec.kernel})
    header, rows = read_jsonl(str(path))
    assert header["trace_version"] == TRACE_VERSION
    assert header["kernel"] == "qr_like"
    assert len(rows) == len(events)
    for ev, row in zip(events, rows):
        assert row["ts"] == ev.timestamp_ns
        assert row["worker"] == ev.worker
        assert row["kind"] == ev.kind


def test_jsonl_event_payload_is_flattened(tmp_path):
    path = tmp_path / "one.jsonl"
    write_jsonl([TraceEvent(7, 0, "steal", {"victim": 3})], str(path))
    _, rows = read_jsonl(str(path))
    assert rows == [{"ts": 7, "worker": 0, "kind": "steal", "victim": 3}]


def test_read_jsonl_requires_header(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(json.dumps({"ts": 0, "worker": 0, "kind": "push"}) + "\n")
    with pytest.raises(ValueError, match="trace version"):
        read_jsonl(str(path))
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    with pytest.raises(ValueError):
        read_jsonl(str(empty))


def test_summary_csv_round_trip(tmp_path):
    rows = [
        {"kernel": "lu_like", "gang": 1, "makespan_s": 0.125},
        {"kernel": "lu_like", "gang": 0, "makespan_s": 0.150},
    ]
    path = tmp_path / "summary.csv"
    write_summary_csv(rows, str(path))
    with open(path, newline="") as fh:
        parsed = list(csv.DictReader(fh))
    assert [r["gang"] for r in parsed] == ["1", "0"]
    assert parsed[0]["makespan_s"] == "0.125"
    assert list(parsed[0].keys()) == ["kernel", "gang", "makespan_s"]


def test_summary_csv_rejects_empty():
    with pytest.raises(ValueError, match="no summary rows"):
        write_summary_csv([], "/tmp/unused.csv")
