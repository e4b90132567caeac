"""Event tracing: in-memory collection plus JSONL / CSV serialization."""
from __future__ import annotations

import csv
import json
import threading
import time
from dataclasses import dataclass, field

TRACE_VERSION = 1

# Event kinds emitted by the runtime.  Payload keys vary by kind; every event
# carries the emitting worker (-1 for the timer thread / external callers).
KIND_RUN_START = "run_start"
KIND_RUN_END = "run_end"
KIND_SUSPEND = "suspend"
KIND_RELEASE = "release"
KIND_PUSH = "push"
KIND_STEAL = "steal"
KIND_STEAL_FAIL = "steal_fail"
KIND_ADOPT = "adopt"
KIND_GANG_DISPATCH = "gang_dispatch"
KIND_REGION_COMPLETE = "region_complete"
KIND_TASK_READY = "task_ready"
KIND_WAIT_START = "wait_start"
KIND_WAIT_END = "wait_end"
KIND_DEADLOCK = "deadlock"


@dataclass(frozen=True, slots=True)
class TraceEvent:
    timestamp_ns: int
    worker: int
    kind: str
    payload: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "ts": self.timestamp_ns,
                "worker": self.worker,
                "kind": self.kind,
                **self.payload,
            },
            separators=(",", ":"),
        )


class Tracer:
    """Collects events with one unlocked lane per worker plus a shared lane.

    Worker lanes are only ever appended to from that worker's scheduling loop
    or a carrier it is currently hosting, so they need no lock.  The shared
    lane (timer thread, external submitters) takes one.
    """

    __slots__ = ("enabled", "_lanes", "_shared", "_shared_lock", "t0_ns")

    def __init__(self, n_workers: int, enabled: bool = True) -> None:
        self.enabled = enabled
        self._lanes: list[list[TraceEvent]] = [[] for _ in range(n_workers)]
        self._shared: list[TraceEvent] = []
        self._shared_lock = threading.Lock()
        self.t0_ns = time.perf_counter_ns()

    def emit(self, worker: int, kind: str, **payload) -> None:
        if not self.enabled:
            return
        ev = TraceEvent(time.perf_counter_ns() - self.t0_ns, worker, kind, payload)
        if 0 <= worker < len(self._lanes):
            self._lanes[worker].append(ev)
        else:
            with self._shared_lock:
                self._shared.append(ev)

    def events(self) -> list[TraceEvent]:
        merged: list[TraceEvent] = []
        for lane in self._lanes:
            merged.extend(lane)
        with self._shared_lock:
            merged.extend(self._shared)
        merged.sort(key=lambda e: e.timestamp_ns)
        return merged

    def count(self, kind: str) -> int:
        return sum(1 for e in self.events() if e.kind == kind)


def write_jsonl(events: list[TraceEvent], path: str, header: dict | None = None) -> None:
    """Write one JSON object per line; first line is a version header."""
    with open(path, "w", encoding="utf-8") as fh:
        head = {"trace_version": TRACE_VERSION}
        if header:
            head.update(header)
        fh.write(json.dumps(head, separators=(",", ":")) + "\n")
        for ev in events:
            fh.write(ev.to_json() + "\n")


def read_jsonl(path: str) -> tuple[dict, list[dict]]:
    with open(path, encoding="utf-8") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or "trace_version" not in lines[0]:
        raise ValueError(f"{path}: missing trace version header")
    return lines[0], lines[1:]


def write_summary_csv(rows: list[dict], path: str) -> None:
    """Append-style summary: one row per run, stable column order."""
    if not rows:
        raise ValueError("no summary rows to write")
    cols = list(rows[0].keys())
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=cols)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
