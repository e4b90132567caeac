"""Run metrics: makespan accounting, transfer/compute overlap, steal tallies.

Everything here is single-threaded post-processing over a finished (or
watchdog-aborted) runtime: per-worker span counters plus the merged event
trace.  The one non-obvious number is `overlap_ratio` — the fraction of
wall time with at least one simulated transfer in flight during which at
least one worker was executing a body.  It is the scheduler's ability to
hide transfer latency behind compute, measured from the trace alone.
"""
from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field

from .trace import KIND_RELEASE, KIND_RUN_END, KIND_RUN_START, KIND_SUSPEND, TraceEvent

Interval = tuple[int, int]  # [start_ns, end_ns)


@dataclass(slots=True)
class RunMetrics:
    makespan_s: float
    # One entry per worker: busy_s / idle_s / comm_wait_s.  Blocked-top
    # residency (barrier or join with nothing else runnable) counts as idle;
    # comm_wait_s is residency with the stack top pinned by a transfer.
    per_worker: list[dict[str, float]] = field(default_factory=list)
    overlap_ratio: float = 1.0
    steals: dict[str, int] = field(default_factory=dict)
    deadlock_detected: bool = False

    def busy_total_s(self) -> float:
        return sum(w["busy_s"] for w in self.per_worker)

    def steal_count(self, mode: str) -> int:
        return self.steals.get(mode, 0)


def comm_intervals(events: list[TraceEvent]) -> list[Interval]:
    """[suspend, release) windows of simulated transfers, per context."""
    open_at: dict[str, int] = {}
    out: list[Interval] = []
    last_ts = 0
    for ev in events:
        last_ts = ev.timestamp_ns
        if ev.kind == KIND_SUSPEND and ev.payload.get("reason") == "comm":
            open_at[ev.payload["ctx"]] = ev.timestamp_ns
        elif ev.kind == KIND_RELEASE:
            start = open_at.pop(ev.payload.get("ctx"), None)
            if start is not None:
                out.append((start, ev.timestamp_ns))
    # Transfers still in flight at abort time: close at the last event.
    for start in open_at.values():
        if last_ts > start:
            out.append((start, last_ts))
    return out


def busy_intervals(events: list[TraceEvent]) -> list[Interval]:
    """Per-worker execution slices; starts and ends alternate per worker."""
    open_at: dict[int, int] = {}
    out: list[Interval] = []
    last_ts = 0
    for ev in events:
        last_ts = ev.timestamp_ns
        if ev.kind == KIND_RUN_START:
            open_at[ev.worker] = ev.timestamp_ns
        elif ev.kind == KIND_RUN_END:
            start = open_at.pop(ev.worker, None)
            if start is not None:
                out.append((start, ev.timestamp_ns))
    for start in open_at.values():
        if last_ts > start:
            out.append((start, last_ts))
    return out


def overlap_fraction(comm: list[Interval], busy: list[Interval]) -> float:
    """Measure(comm-union covered by busy) / measure(comm-union).

    Vacuously 1.0 when no transfer time exists: there was nothing to hide.
    """
    marks: list[tuple[int, int, int]] = []
    for a, b in comm:
        if b > a:
            marks.append((a, 0, 1))
            marks.append((b, 0, -1))
    for a, b in busy:
        if b > a:
            marks.append((a, 1, 1))
            marks.append((b, 1, -1))
    if not marks:
        return 1.0
    marks.sort()
    in_comm = in_busy = 0
    total = covered = 0
    prev = marks[0][0]
    for ts, channel, delta in marks:
        if ts > prev and in_comm > 0:
            total += ts - prev
            if in_busy > 0:
                covered += ts - prev
        prev = ts
        if channel == 0:
            in_comm += delta
        else:
            in_busy += delta
    if total == 0:
        return 1.0
    return covered / total


def collect_metrics(rt, makespan_s: float) -> RunMetrics:
    """Snapshot a runtime after shutdown into a RunMetrics record."""
    events = rt.tracer.events()
    per_worker = []
    steals: Counter = Counter()
    now = time.perf_counter_ns()
    for w in rt.workers:
        ns = dict(w.span_ns)
        # A worker idle since mid-run still has its current span open; close
        # a private copy at `now` so the accounting sums to the makespan.
        kind, since = w._span_kind, w._span_start
        if kind is not None and now > since:
            ns[kind] += now - since
        per_worker.append(
            {
                "busy_s": ns["busy"] / 1e9,
                "idle_s": (ns["idle"] + ns["wait"]) / 1e9,
                "comm_wait_s": ns["comm_wait"] / 1e9,
            }
        )
        steals.update(w.steals)
    return RunMetrics(
        makespan_s=makespan_s,
        per_worker=per_worker,
        overlap_ratio=overlap_fraction(comm_intervals(events), busy_intervals(events)),
        steals=dict(steals),
        deadlock_detected=rt.aborted,
    )


def flat_row(metrics: RunMetrics, **front) -> dict:
    """Flatten one run into a CSV-friendly row; `front` columns lead."""
    n = max(len(metrics.per_worker), 1)
    row = dict(front)
    row.update(
        makespan_s=round(metrics.makespan_s, 6),
        overlap_ratio=round(metrics.overlap_ratio, 4),
        busy_mean_s=round(sum(w["busy_s"] for w in metrics.per_worker) / n, 6),
        idle_mean_s=round(sum(w["idle_s"] for w in metrics.per_worker) / n, 6),
        comm_wait_mean_s=round(sum(w["comm_wait_s"] for w in metrics.per_worker) / n, 6),
        steals_history=metrics.steal_count("history"),
        steals_random=metrics.steal_count("random"),
        steals_gang=metrics.steal_count("gang"),
        steals_region=metrics.steal_count("region"),
        deadlock=int(metrics.deadlock_detected),
    )
    return row
