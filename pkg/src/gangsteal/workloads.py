"""Synthetic tiled-factorization pipelines with simulated transfers.

One workload is a pipeline over block columns, shaped like the task mix of
distributed dense solvers.  Per column i:

    panel[i]     tightly synchronized team (lu_like / qr_like) or a bag of
                 independent light tasks (cholesky_like)
    bcast[i]     simulated transfer after the panel (detaches; the worker
                 stays free while it is in flight)
    look[i]      high-priority update feeding panel[i+1]
    trail[i]     tiles² bulk updates, no downstream consumers

panel[i+1] depends only on the lookahead chain, so trailing work from
column i overlaps the next panel — the property the victim policies are
measured against.  Compute bodies are calibrated spin (a sleep would free
the worker and erase the contention under study); transfers are timed
suspensions.  The generated node/edge sets depend only on the spec.
"""
from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field, replace

from . import api
from .config import SchedulerConfig, VICTIM_POLICIES
from .errors import ConfigurationError, DeadlockError
from .metrics import RunMetrics, collect_metrics
from .runtime import Runtime
from .taskgraph import key

KERNELS = ("lu_like", "qr_like", "cholesky_like")

# Queue priorities: panels sit on the critical path, lookahead feeds the
# next panel, trailing updates are bulk filler.
PRIO_PANEL = 2
PRIO_LOOKAHEAD = 1
PRIO_TRAILING = 0


def spin_us(duration_us: float) -> None:
    """Busy-work for the given duration."""
    if duration_us <= 0:
        return
    deadline = time.perf_counter_ns() + int(duration_us * 1_000)
    while time.perf_counter_ns() < deadline:
        pass


@dataclass(frozen=True, slots=True)
class WorkloadSpec:
    kernel: str = "lu_like"
    n_block_cols: int = 6
    tiles_per_panel: int = 4
    panel_team_size: int = 4
    panel_steps: int = 3
    compute_cost_us: float = 120.0
    comm_latency_us: float = 400.0
    lookahead_depth: int = 1
    gang_panels: bool = True
    victim_policy: str = "hybrid"

    def __post_init__(self) -> None:
        if self.kernel not in KERNELS:
            raise ConfigurationError(f"kernel must be one of {KERNELS}, got {self.kernel!r}")
        for name in ("n_block_cols", "tiles_per_panel", "panel_team_size",
                     "panel_steps", "lookahead_depth"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.compute_cost_us < 0 or self.comm_latency_us < 0:
            raise ConfigurationError("durations must be >= 0")
        if self.victim_policy not in VICTIM_POLICIES:
            raise ConfigurationError(
                f"victim_policy must be one of {VICTIM_POLICIES}, got {self.victim_policy!r}"
            )


def _team_panel(spec: WorkloadSpec, col: int):
    """Panel as a nested region: panel_steps compute+barrier rounds."""

    def member(tid: int) -> None:
        for _ in range(spec.panel_steps):
            spin_us(spec.compute_cost_us)
            api.region_barrier()

    def body() -> None:
        h = api.fork_region(
            spec.panel_team_size, member,
            gang=spec.gang_panels, name=f"panel{col}.team",
        )
        api.join_region(h)

    return body


def _spin_body(duration_us: float):
    def body() -> None:
        spin_us(duration_us)
    return body


def _comm_body(latency_us: float):
    def body() -> None:
        api.simulate_comm(latency_us)
    return body


def _trailing_fanout(spec: WorkloadSpec, col: int):
    """Two-level spawn tree: tiles branch tasks, each spawning tiles leaves.

    The branches land on whichever workers pick them up, so the tiles² leaf
    tasks accumulate on several queues at once rather than on the single
    worker that ran the broadcast — the multi-producer state victim
    selection is measured against.
    """

    def branch(b: int):
        def body() -> None:
            for leaf in range(spec.tiles_per_panel):
                api.submit_task(
                    _spin_body(spec.compute_cost_us),
                    priority=PRIO_TRAILING,
                    name=f"trail{col}.{b}.{leaf}",
                )
        return body

    def body() -> None:
        for b in range(spec.tiles_per_panel):
            api.submit_task(branch(b), priority=PRIO_TRAILING, name=f"trail{col}.{b}")

    return body


def build_workload(rt: Runtime, spec: WorkloadSpec) -> int:
    """Submit the whole pipeline from the root context; returns task count."""
    root = rt.root_ctx
    n = 0
    for i in range(spec.n_block_cols):
        # panel[i] waits on every lookahead column that targets it.
        panel_in = tuple(
            key("look", i - j, i)
            for j in range(1, spec.lookahead_depth + 1)
            if i - j >= 0
        )
        if spec.kernel == "cholesky_like":
            # Panel factorization as independent light tasks, one per lane.
            parts = []
            for p in range(spec.panel_team_size):
                parts.append(key("panel_part", i, p))
                rt.submit_task(
                    root,
                    _spin_body(spec.panel_steps * spec.compute_cost_us),
                    in_keys=panel_in,
                    out_keys=(parts[-1],),
                    priority=PRIO_PANEL,
                    name=f"panel{i}.p{p}",
                )
                n += 1
            comm_in = tuple(parts)
        else:
            rt.submit_task(
                root,
                _team_panel(spec, i),
                in_keys=panel_in,
                out_keys=(key("panel", i),),
                priority=PRIO_PANEL,
                name=f"panel{i}",
            )
            n += 1
            comm_in = (key("panel", i),)

        rt.submit_task(
            root,
            _comm_body(spec.comm_latency_us),
            in_keys=comm_in,
            out_keys=(key("bcast", i),),
            priority=PRIO_PANEL,
            name=f"bcast{i}",
        )
        n += 1

        for j in range(1, spec.lookahead_depth + 1):
            if i + j >= spec.n_block_cols:
                break
            rt.submit_task(
                root,
                _spin_body(spec.compute_cost_us),
                in_keys=(key("bcast", i),),
                out_keys=(key("look", i, i + j),),
                priority=PRIO_LOOKAHEAD,
                name=f"look{i}.{i + j}",
            )
            n += 1

        rt.submit_task(
            root,
            _trailing_fanout(spec, i),
            in_keys=(key("bcast", i),),
            out_keys=(key("trail", i),),
            priority=PRIO_TRAILING,
            name=f"trail{i}",
        )
        n += 1
    return n


def run_workload_traced(spec: WorkloadSpec, config: SchedulerConfig):
    """One full execution on a private runtime; spec.victim_policy wins.

    Returns (RunMetrics, trace events) — the events list is empty when the
    config has tracing disabled.
    """
    cfg = replace(config, victim_policy=spec.victim_policy)
    rt = Runtime(cfg).start()
    try:
        t0 = time.perf_counter()
        build_workload(rt, spec)
        try:
            rt.wait_all()
        except DeadlockError:
            pass  # recorded via rt.aborted -> deadlock_detected
        makespan = time.perf_counter() - t0
    finally:
        rt.shutdown()
    return collect_metrics(rt, makespan), rt.tracer.events()


def run_workload(spec: WorkloadSpec, config: SchedulerConfig) -> RunMetrics:
    metrics, _ = run_workload_traced(spec, config)
    return metrics


@dataclass(slots=True)
class ExperimentResult:
    spec: WorkloadSpec
    warmup: RunMetrics
    runs: list[RunMetrics] = field(default_factory=list)

    def median_makespan_s(self) -> float:
        return statistics.median(r.makespan_s for r in self.runs)

    def mean_makespan_s(self) -> float:
        return statistics.fmean(r.makespan_s for r in self.runs)

    def spread_makespan_s(self) -> float:
        vals = [r.makespan_s for r in self.runs]
        return statistics.stdev(vals) if len(vals) > 1 else 0.0

    def median_overlap(self) -> float:
        return statistics.median(r.overlap_ratio for r in self.runs)

    def any_deadlock(self) -> bool:
        return self.warmup.deadlock_detected or any(r.deadlock_detected for r in self.runs)


def run_experiment(spec: WorkloadSpec, config: SchedulerConfig, repeats: int = 6) -> ExperimentResult:
    """repeats+1 executions; the first is warm-up and is not aggregated."""
    if repeats < 1:
        raise ConfigurationError(f"repeats must be >= 1, got {repeats}")
    warmup = run_workload(spec, config)
    result = ExperimentResult(spec=spec, warmup=warmup)
    for _ in range(repeats):
        result.runs.append(run_workload(spec, config))
    return result
