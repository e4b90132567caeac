"""User-facing entry points.

These resolve the calling context automatically: inside a member or task body
they act on that context; on any other thread they act on the runtime's root
context.  Exactly one runtime can be active per process at a time through
this module (tests that need more drive Runtime objects directly).
"""
from __future__ import annotations

import threading

from .config import SchedulerConfig, resolve_env
from .context import Context, current_context
from .errors import UsageError
from .regions import MODE_GANG, MODE_STEAL, RegionHandle
from .runtime import Runtime
from .taskgraph import TaskNode

_active: Runtime | None = None
_active_lock = threading.Lock()


def start_runtime(config: SchedulerConfig | None = None, *, use_env: bool = True, **overrides) -> Runtime:
    """Create, start, and register the process-wide runtime."""
    global _active
    cfg = config or SchedulerConfig(**overrides)
    if overrides and config is not None:
        raise UsageError("pass either a config object or keyword overrides, not both")
    if use_env:
        cfg = resolve_env(cfg)
    with _active_lock:
        if _active is not None and not _active._stop:
            raise UsageError("a runtime is already active; shut it down first")
        rt = Runtime(cfg).start()
        _active = rt
    return rt


def stop_runtime() -> None:
    global _active
    with _active_lock:
        if _active is not None:
            _active.shutdown()
            _active = None


def active_runtime() -> Runtime:
    with _active_lock:
        if _active is None:
            raise UsageError("no active runtime; call start_runtime() first")
        return _active


def _resolve() -> tuple[Runtime, Context]:
    ctx = current_context()
    if ctx is not None:
        return ctx.rt, ctx
    rt = active_runtime()
    return rt, rt.root_ctx


def fork_region(team_size: int, body, *, gang: bool | None = None, name: str = "") -> RegionHandle:
    """Fork a team of `team_size` members running `body(thread_id)`.

    `gang=None` inherits the calling context's gang-scheduling flag; True
    dispatches the team as a gang to reserved workers, False spawns plain
    stealable members.
    """
    rt, ctx = _resolve()
    mode = None if gang is None else (MODE_GANG if gang else MODE_STEAL)
    return rt.fork_region(ctx, team_size, body, mode=mode, name=name)


def join_region(handle: RegionHandle) -> None:
    """Wait until every member has finished and the region's tasks drained."""
    rt, ctx = _resolve()
    rt.join_region(ctx, handle)


def region_barrier() -> None:
    """Synchronize with the other members of the calling member's region."""
    rt, ctx = _resolve()
    rt.region_barrier(ctx)


def simulate_comm(latency_us: float) -> None:
    """Model a communication round: suspend at least `latency_us`, then resume."""
    rt, ctx = _resolve()
    rt.simulate_comm(ctx, latency_us)


def submit_task(body, *, in_keys=(), out_keys=(), priority: int = 0, name: str = "") -> TaskNode:
    """Submit a dataflow task; read/write key sets order it against earlier tasks."""
    rt, ctx = _resolve()
    return rt.submit_task(ctx, body, in_keys, out_keys, priority, name)


def set_gang_sched() -> None:
    """Future forks from the calling context dispatch as gangs."""
    rt, ctx = _resolve()
    rt.set_gang_flag(ctx, True)


def reset_gang_sched() -> None:
    """Future forks from the calling context spawn plain stealable members."""
    rt, ctx = _resolve()
    rt.set_gang_flag(ctx, False)


def wait_all() -> None:
    """Block until the runtime is quiescent (no members or tasks outstanding)."""
    rt, _ = _resolve()
    rt.wait_all()
