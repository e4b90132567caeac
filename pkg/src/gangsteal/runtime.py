"""The scheduling engine: workers, gangs, restricted stealing, liveness.

Each worker owns a gang dispatch queue, a suspended-task queue, and one
normal queue per stack depth.  What a worker may run next depends on its
state:

* empty stack: anything — own queues first, then gang contexts from any
  dispatch queue (eligibility-gated), then a victim's work via hybrid
  victim selection;
* blocked at a round barrier (or communication) inside a region: own gang
  dispatch queue, own suspended queue, and that region's work only, located
  through the region's placement directory;
* blocked at a join (closing join or child-region join): the above plus work
  of any region already on its own stack and of the awaited child, and gang
  contexts from other dispatch queues.

Blocked members stay pinned to their worker's stack; released ones resume
when they surface, except that a released member whose region is currently
permitted may be pulled out from under a blocked top entry (the region could
not finish otherwise when two of its members share a stack).
"""
from __future__ import annotations

import heapq
import itertools
import random
import sys
import threading
import time

from .config import SchedulerConfig
from .context import (
    KIND_MEMBER,
    KIND_ROOT,
    KIND_TASK,
    REASON_BARRIER,
    REASON_COMM,
    REASON_JOIN,
    Context,
    make_root_context,
)
from .errors import CapacityError, DeadlockError, UsageError
from .gang import (
    GangDescriptor,
    GangIdAllocator,
    GangLoadTable,
    choose_workers,
    is_eligible_to_sched,
)
from .queues import GangDeque, LeveledQueues, StealQueue
from .regions import MODE_GANG, MODE_STEAL, RegionHandle, RegionState
from .taskgraph import (
    BLOCKED,
    DependenceTracker,
    FINISHED,
    RUNNABLE,
    TaskNode,
)
from .trace import (
    KIND_ADOPT,
    KIND_DEADLOCK,
    KIND_GANG_DISPATCH,
    KIND_PUSH,
    KIND_REGION_COMPLETE,
    KIND_RELEASE,
    KIND_RUN_END,
    KIND_RUN_START,
    KIND_STEAL,
    KIND_STEAL_FAIL,
    KIND_SUSPEND,
    KIND_TASK_READY,
    Tracer,
)
from .victim import StealHistory, make_history, record_steal_outcome, select_victim, selection_mode


class _TimerThread:
    """Single shared timer: schedules callbacks after a delay (heap + condvar)."""

    def __init__(self) -> None:
        self._heap: list[tuple[float, int, object]] = []
        self._seq = itertools.count()
        self._cv = threading.Condition()
        self._stop = False
        self._thread = threading.Thread(target=self._run, name="sched-timer", daemon=True)

    def start(self) -> None:
        self._thread.start()

    def schedule(self, delay_s: float, fn) -> None:
        deadline = time.perf_counter() + delay_s
        with self._cv:
            heapq.heappush(self._heap, (deadline, next(self._seq), fn))
            self._cv.notify()

    def stop(self) -> None:
        with self._cv:
            self._stop = True
            self._cv.notify()
        self._thread.join(timeout=2.0)

    def _run(self) -> None:
        while True:
            with self._cv:
                while not self._stop and (
                    not self._heap or self._heap[0][0] > time.perf_counter()
                ):
                    if self._heap:
                        self._cv.wait(max(0.0, self._heap[0][0] - time.perf_counter()))
                    else:
                        self._cv.wait()
                if self._stop:
                    return
                _, _, fn = heapq.heappop(self._heap)
            try:
                fn()
            except Exception:  # pragma: no cover - timer callbacks must not raise
                pass


class Worker:
    """One scheduling thread with its queues and steal state."""

    __slots__ = (
        "wid", "rt", "thread", "stack", "gang_deq", "suspended_q", "normal_qs",
        "rng", "history", "step_event", "wake_event", "idle_streak",
        "span_ns", "_span_kind", "_span_start",
        "steals", "steal_fails",
    )

    def __init__(self, wid: int, rt: "Runtime", seed: int, window: int, policy: str) -> None:
        self.wid = wid
        self.rt = rt
        self.thread: threading.Thread | None = None
        self.stack: list[Context] = []
        self.gang_deq = GangDeque()
        self.suspended_q = StealQueue()
        self.normal_qs = LeveledQueues()
        self.rng = random.Random((seed * 0x9E3779B1 + wid) & 0xFFFFFFFF)
        self.history: StealHistory = make_history(policy, window)
        self.step_event = threading.Event()
        # Poked whenever another thread hands this worker work (gang dispatch,
        # pinned release, timer resume): cuts the idle backoff nap short.
        # step_event cannot double for this — it is the slice-handoff report.
        self.wake_event = threading.Event()
        self.idle_streak = 0
        self.span_ns: dict[str, int] = {"busy": 0, "idle": 0, "wait": 0, "comm_wait": 0}
        self._span_kind: str | None = None
        self._span_start = 0
        self.steals = {"history": 0, "random": 0, "gang": 0, "region": 0}
        self.steal_fails = {"history": 0, "random": 0}

    # -- span accounting ------------------------------------------------------

    def _switch_span(self, kind: str | None) -> None:
        now = time.perf_counter_ns()
        if self._span_kind is not None:
            self.span_ns[self._span_kind] += now - self._span_start
        self._span_kind = kind
        self._span_start = now

    def _wait_kind(self) -> str:
        if not self.stack:
            return "idle"
        if self.stack[-1].block_reason == REASON_COMM:
            return "comm_wait"
        return "wait"

    def queued_total(self) -> int:
        return len(self.gang_deq) + len(self.suspended_q) + self.normal_qs.total()


class Runtime:
    """Work-stealing runtime with gang dispatch for parallel regions."""

    def __init__(self, config: SchedulerConfig | None = None) -> None:
        self.config = config or SchedulerConfig()
        cfg = self.config
        self.tracer = Tracer(cfg.n_workers, enabled=cfg.trace_enabled)
        self.gang_alloc = GangIdAllocator()
        self.gang_loads = GangLoadTable(cfg.n_workers)
        self.tracker = DependenceTracker()
        self.workers: list[Worker] = [
            Worker(i, self, cfg.seed, cfg.steal_window, cfg.victim_policy)
            for i in range(cfg.n_workers)
        ]
        self.root_ctx = make_root_context(self)
        self._fork_lock = threading.Lock()
        self._handoff_lock = threading.Lock()
        self._state_lock = threading.Lock()
        self._outstanding = 0
        self._progress = 0
        self._quiescent = threading.Event()
        self._quiescent.set()
        self.aborted = False
        self.deadlock_detected = False
        self._stop = False
        self._timer = _TimerThread()
        self._watchdog: threading.Thread | None = None
        self.started = False
        self.regions: list[RegionState] = []
        self._old_switch_interval: float | None = None

    # -- lifecycle -------------------------------------------------------------

    def start(self) -> "Runtime":
        if self.started:
            raise UsageError("runtime already started")
        self.started = True
        self._old_switch_interval = sys.getswitchinterval()
        sys.setswitchinterval(0.0005)
        self._timer.start()
        self._watchdog = threading.Thread(target=self._watchdog_loop, name="sched-watchdog", daemon=True)
        self._watchdog.start()
        for w in self.workers:
            w.thread = threading.Thread(target=self._worker_loop, args=(w,), name=f"worker-{w.wid}", daemon=True)
            w.thread.start()
        return self

    def shutdown(self) -> None:
        self._stop = True
        for w in self.workers:
            w.wake_event.set()
        for w in self.workers:
            if w.thread is not None:
                w.thread.join(timeout=2.0)
        self._timer.stop()
        if self._old_switch_interval is not None:
            sys.setswitchinterval(self._old_switch_interval)

    def __enter__(self) -> "Runtime":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.shutdown()

    # -- counters ----------------------------------------------------------------

    def _outstanding_inc(self, n: int = 1) -> None:
        with self._state_lock:
            self._outstanding += n
            self._quiescent.clear()

    def _outstanding_dec(self) -> None:
        with self._state_lock:
            self._outstanding -= 1
            if self._outstanding < 0:
                raise RuntimeError("outstanding work count underflow")
            if self._outstanding == 0:
                self._quiescent.set()

    def _bump(self) -> None:
        with self._state_lock:
            self._progress += 1

    @property
    def outstanding(self) -> int:
        with self._state_lock:
            return self._outstanding

    # -- public ops (called from carriers or the root thread) ---------------------

    def fork_region(
        self,
        caller: Context,
        team_size: int,
        body,
        mode: str | None = None,
        name: str = "",
    ) -> RegionHandle:
        if not self.started or self._stop or self.aborted:
            raise UsageError("runtime not running")
        if team_size < 1:
            raise CapacityError(f"team size must be >= 1, got {team_size}")
        if mode is None:
            # Explicit opt-in (set_gang_sched, inherited by children) wins;
            # otherwise top-level regions follow the config default and
            # nested regions fall back to work stealing.
            if caller.gang_flag:
                mode = MODE_GANG
            elif caller.kind == KIND_ROOT and self.config.gang_sched_default:
                mode = MODE_GANG
            else:
                mode = MODE_STEAL
        if mode not in (MODE_GANG, MODE_STEAL):
            raise UsageError(f"unknown region mode {mode!r}")
        if mode == MODE_GANG and team_size > self.config.n_workers:
            raise CapacityError(
                f"gang of {team_size} exceeds {self.config.n_workers} workers"
            )
        region = RegionState(self, caller, team_size, mode, name=name)
        for tid in range(team_size):
            ctx = Context(
                KIND_MEMBER,
                region=region,
                thread_id=tid,
                static_nest=region.member_nest,
                gang_flag=caller.gang_flag,
                rt=self,
                name=f"{region.name}.m{tid}",
            )
            ctx.body = self._member_body(ctx, body)
            region.members.append(ctx)
        with self._state_lock:
            self.regions.append(region)
        self._outstanding_inc(team_size)

        host = caller.host
        if mode == MODE_GANG:
            with self._fork_lock:
                gid = self.gang_alloc.next_gang_id()
                loads, glob = self.gang_loads.snapshot()
                requester = host.wid if host is not None else 0
                chosen = choose_workers(requester, team_size, loads, glob)
                desc = GangDescriptor(gid, team_size, caller.static_nest, tuple(chosen))
                region.gang = desc
                for ctx in region.members:
                    ctx.gang_id = gid
                self.gang_loads.add_dispatch(chosen)
                for tid, wid in enumerate(chosen):
                    self.workers[wid].gang_deq.push(region.members[tid])
                for wid in set(chosen):
                    self.workers[wid].wake_event.set()
            self.tracer.emit(
                requester, KIND_GANG_DISPATCH,
                gang=gid, region=region.name, team=team_size,
                nest=caller.static_nest, workers=list(chosen),
            )
        else:
            w = host if host is not None else self.workers[0]
            level = len(w.stack) if host is not None else 0
            region.record_spawn_site(w.wid, level)
            for ctx in region.members:
                w.normal_qs.at(level).push(ctx, priority=0)
                self.tracer.emit(w.wid, KIND_PUSH, ctx=ctx.name, level=level, item="member")
            if host is None:
                w.wake_event.set()
        self._bump()
        return RegionHandle(region)

    def _member_body(self, ctx: Context, body):
        def run() -> None:
            try:
                body(ctx.thread_id)
            except BaseException as exc:
                # Must land before final_arrive wakes the joining parent,
                # or a fast join can observe completion with no error yet.
                ctx.region.record_error(exc)
                raise
            finally:
                if not ctx.region.final_arrive(ctx):
                    ctx.awaiting = ctx.region
                    ctx.yield_blocked(REASON_JOIN)
                    ctx.awaiting = None
        return run

    def join_region(self, caller: Context, handle: RegionHandle) -> None:
        if handle.joined:
            raise UsageError(f"{handle.region.name} joined twice")
        if handle.region.parent_ctx is not caller:
            raise UsageError(f"{handle.region.name}: join from non-forking context")
        handle.joined = True
        region = handle.region
        if caller.kind == KIND_ROOT:
            ev = threading.Event()
            if not region.register_join(("event", ev)):
                while not ev.wait(0.02):
                    if self.aborted:
                        raise DeadlockError(self._deadlock_report())
        elif caller.kind == KIND_MEMBER:
            caller.awaiting = region
            if not region.register_join(("ctx", caller)):
                caller.yield_blocked(REASON_JOIN)
            caller.awaiting = None
        else:  # task: detaches, resumes anywhere
            with self._handoff_lock:
                caller._handoff_parked = False
                caller._handoff_fired = False
            caller.awaiting = region
            if not region.register_join(("ctx", caller)):
                caller.yield_blocked(REASON_JOIN, detached=True)
            caller.awaiting = None
        if region.errors:
            raise region.errors[0]

    def region_barrier(self, caller: Context) -> None:
        if caller.kind != KIND_MEMBER or caller.region is None:
            raise UsageError("barrier outside a region member context")
        region = caller.region
        w = caller.host
        self.tracer.emit(w.wid, KIND_SUSPEND, ctx=caller.name, reason="barrier", region=region.name)
        if not region.barrier_arrive(caller):
            caller.yield_blocked(REASON_BARRIER)
        self._bump()

    def simulate_comm(self, caller: Context, latency_us: float) -> None:
        if latency_us < 0:
            raise UsageError(f"negative latency {latency_us}")
        if latency_us == 0:
            return  # nothing in flight: no suspension, no comm-wait interval
        if caller.kind == KIND_ROOT:
            time.sleep(latency_us / 1e6)
            return
        w = caller.host
        self.tracer.emit(
            w.wid, KIND_SUSPEND,
            ctx=caller.name, reason="comm", latency_us=latency_us,
        )
        delay = latency_us / 1e6
        if caller.kind == KIND_MEMBER:
            self._timer.schedule(delay, lambda: self._release_pinned(caller, "comm"))
            caller.yield_blocked(REASON_COMM)
        else:
            with self._handoff_lock:
                caller._handoff_parked = False
                caller._handoff_fired = False
            self._timer.schedule(delay, lambda: self._release_detached(caller))
            caller.yield_blocked(REASON_COMM, detached=True)

    def submit_task(
        self,
        caller: Context,
        body,
        in_keys=(),
        out_keys=(),
        priority: int = 0,
        name: str = "",
    ) -> TaskNode:
        if not self.started or self._stop or self.aborted:
            raise UsageError("runtime not running")
        if caller.kind == KIND_MEMBER:
            region = caller.region
        elif caller.kind == KIND_TASK:
            region = caller.region
        else:
            region = None
        if region is not None:
            region.task_enter()
        node, ready = self.tracker.submit(
            body, tuple(in_keys), tuple(out_keys), priority, name, region
        )
        ctx = Context(
            KIND_TASK,
            body=self._task_body(node),
            region=region,
            static_nest=caller.static_nest,
            gang_flag=caller.gang_flag,
            priority=priority,
            rt=self,
            name=name or f"task{node.task_id}",
        )
        ctx.task = node
        if self.tracker.attach(node, ctx):
            ready = True  # last predecessor finished before the context existed
        self._outstanding_inc()
        if ready:
            w = caller.host if caller.host is not None else self.workers[0]
            level = max(len(w.stack) - 1, 0) if caller.host is not None else 0
            w.normal_qs.at(level).push(ctx, priority=priority)
            if caller.host is None:
                w.wake_event.set()  # driver-side submit: the target may be napping
            self.tracer.emit(w.wid, KIND_PUSH, ctx=ctx.name, level=level, item="task")
        return node

    def _task_body(self, node: TaskNode):
        def run() -> None:
            node.body()
        return run

    def set_gang_flag(self, caller: Context, on: bool) -> None:
        caller.gang_flag = on

    def wait_all(self) -> None:
        """Block the caller until no tasks or members remain outstanding."""
        while not self._quiescent.wait(0.02):
            if self.aborted:
                raise DeadlockError(self._deadlock_report())
        if self.aborted:
            raise DeadlockError(self._deadlock_report())

    # -- releases -----------------------------------------------------------------

    def _release_pinned(self, ctx: Context, why: str) -> None:
        ctx.mark_released()
        host = ctx.host
        if host is not None:
            host.wake_event.set()
        self._bump()
        self.tracer.emit(-1, KIND_RELEASE, ctx=ctx.name, why=why)

    def _release_detached(self, ctx: Context) -> None:
        with self._handoff_lock:
            if ctx._handoff_parked:
                self._enqueue_suspended(ctx.host, ctx)
            else:
                ctx._handoff_fired = True

    def _enqueue_suspended(self, w: Worker, ctx: Context) -> None:
        ctx.state = RUNNABLE
        if ctx.task is not None:
            ctx.task.state = RUNNABLE
        w.suspended_q.push(ctx, priority=ctx.priority)
        w.wake_event.set()
        self._bump()
        self.tracer.emit(-1, KIND_RELEASE, ctx=ctx.name, why="resume", dest=w.wid)

    def _region_completed(self, region: RegionState, parent_wait) -> None:
        self.tracer.emit(-1, KIND_REGION_COMPLETE, region=region.name)
        if parent_wait is not None:
            kind, target = parent_wait
            if kind == "event":
                target.set()
            else:
                ctx = target
                if ctx.kind == KIND_MEMBER:
                    self._release_pinned(ctx, "child_join")
                else:
                    self._release_detached(ctx)
        self._bump()

    # -- worker loop ----------------------------------------------------------------

    def _worker_loop(self, w: Worker) -> None:
        w._switch_span(None)
        while not (self._stop or self.aborted):
            action = self._next_action(w)
            if action is None:
                if w._span_kind is None or w._span_kind == "busy":
                    w._switch_span(w._wait_kind())
                w.idle_streak += 1
                if w.idle_streak > self.config.idle_spin:
                    over = w.idle_streak - self.config.idle_spin
                    if w.wake_event.wait(min(self.config.idle_sleep_max, 5e-5 * over)):
                        w.wake_event.clear()
                continue
            w.idle_streak = 0
            w._switch_span("busy")
            self._execute(w, action)
        w._switch_span(None)

    def _next_action(self, w: Worker) -> Context | None:
        stack = w.stack
        if stack:
            top = stack[-1]
            if top.released:
                return top
            allowed = self._allowed_regions(w, top)
            for i in range(len(stack) - 2, -1, -1):
                c = stack[i]
                # Pull a runnable entry out from under the blocked top when it
                # belongs to a permitted region, or when its region already
                # completed (such a member only has its epilogue left to run).
                if c.released and (c.region in allowed or c.region.complete):
                    stack.pop(i)
                    stack.append(c)
                    c.region.record_adoption(c.thread_id, w.wid, len(stack) - 1)
                    return c
            if top.block_reason == REASON_JOIN:
                got = self._acquire_join(w, allowed)
            else:
                got = self._acquire_restricted(w, top.region)
        else:
            got = self._acquire_idle(w)
        if got is None:
            return None
        ctx, src = got
        stack.append(ctx)
        if ctx.kind == KIND_MEMBER:
            ctx.region.record_adoption(ctx.thread_id, w.wid, len(stack) - 1)
        self.tracer.emit(w.wid, KIND_ADOPT, ctx=ctx.name, src=src, level=len(stack) - 1)
        self._bump()
        return ctx

    def _worker_gang_state(self, w: Worker) -> tuple[int | None, int]:
        for ctx in reversed(w.stack):
            if ctx.region is not None and ctx.region.gang is not None and ctx.kind == KIND_MEMBER:
                g = ctx.region.gang
                return g.gang_id, g.nest_level
        return None, -1

    def _gang_pred(self, w: Worker):
        if not self.config.eligibility_enabled:
            return lambda ctx: True
        wid_gang, wid_nest = self._worker_gang_state(w)

        def pred(ctx: Context) -> bool:
            g = ctx.region.gang
            return is_eligible_to_sched(g.gang_id, g.nest_level, wid_gang, wid_nest)

        return pred

    def _acquire_idle(self, w: Worker):
        ctx = w.gang_deq.take_eligible(self._gang_pred(w))
        if ctx is not None:
            return ctx, "own_gang_deq"
        ctx = w.suspended_q.pop()
        if ctx is not None:
            return ctx, "own_suspended"
        for q in w.normal_qs.levels():
            ctx = q.pop()
            if ctx is not None:
                return ctx, "own_normal"
        got = self._steal_gang_ctx(w)
        if got is not None:
            return got
        return self._steal_normal(w, allowed=None)

    def _acquire_restricted(self, w: Worker, region: RegionState):
        """Mid-region (round barrier or comm wait): own queues + own-region work."""
        ctx = w.gang_deq.take_eligible(self._gang_pred(w))
        if ctx is not None:
            return ctx, "own_gang_deq"
        ctx = w.suspended_q.pop()
        if ctx is not None:
            return ctx, "own_suspended"
        got = self._take_sibling_gang_ctx(w, {region})
        if got is not None:
            return got
        pred = lambda c: c.region is region
        for q in w.normal_qs.levels():
            ctx = q.pop(pred)
            if ctx is not None:
                return ctx, "own_normal"
        for wid, level in region.steal_sites(w.wid):
            victim = self.workers[wid]
            ctx = victim.normal_qs.at(level).steal(pred)
            if ctx is None:
                ctx = victim.suspended_q.steal(pred)
            if ctx is not None:
                w.steals["region"] += 1
                self.tracer.emit(w.wid, KIND_STEAL, victim=wid, mode="region", ctx=ctx.name)
                return ctx, "region_steal"
        return None

    def _take_sibling_gang_ctx(self, w: Worker, regions: set):
        """Adopt an unstarted member of an already-committed region.

        A member of a region this worker is blocked inside (or of any region
        on its stack, at a join) is that region's own work, wherever its
        dispatch queue happens to be: refusing it can starve the region when
        every other worker is pinned.  This does not commit the worker to any
        new gang, so the adoption-order argument is untouched.
        """
        pred = lambda c: c.region in regions
        ctx = w.gang_deq.take_eligible(pred)
        if ctx is not None:
            return ctx, "own_gang_deq"
        n = self.config.n_workers
        start = w.rng.randrange(n) if n > 1 else 0
        for k in range(n):
            vid = (start + k) % n
            if vid == w.wid:
                continue
            ctx = self.workers[vid].gang_deq.take_eligible(pred)
            if ctx is not None:
                self.gang_loads.transfer(vid, w.wid)
                w.steals["region"] += 1
                self.tracer.emit(w.wid, KIND_STEAL, victim=vid, mode="region", ctx=ctx.name)
                return ctx, "region_steal"
        return None

    def _acquire_join(self, w: Worker, allowed: set):
        """At a join: own queues, regions on own stack, the awaited child, gangs."""
        ctx = w.gang_deq.take_eligible(self._gang_pred(w))
        if ctx is not None:
            return ctx, "own_gang_deq"
        ctx = w.suspended_q.pop()
        if ctx is not None:
            return ctx, "own_suspended"
        got = self._take_sibling_gang_ctx(w, allowed)
        if got is not None:
            return got
        # Tasks never pin the stack (they detach when they block), so any
        # task is safe to run over a blocked join; members must belong to a
        # permitted region.
        pred = lambda c: c.kind == KIND_TASK or c.region in allowed
        for q in w.normal_qs.levels():
            ctx = q.pop(pred)
            if ctx is not None:
                return ctx, "own_normal"
        got = self._steal_gang_ctx(w)
        if got is not None:
            return got
        return self._steal_normal(w, allowed=allowed)

    def _allowed_regions(self, w: Worker, top: Context) -> set:
        if top.block_reason == REASON_JOIN:
            if not self.config.eligibility_enabled:
                # Unchecked mode takes whatever is runnable over a blocked
                # join.  This is the same ordering laxity the per-queue
                # admission check guards against, so it is switched off by
                # the same knob; it is what makes this mode wedge-prone.
                allowed = {c.region for c in w.stack}
                allowed.add(None)
                if top.awaiting is not None:
                    allowed.add(top.awaiting)
                return allowed
            # Only regions at least as deep as the blocked top may run above
            # it: its own region and the child it awaits.  Admitting
            # shallower stack regions here can stack an outer member over a
            # deeper pinned one, and the outer member's wait may then cycle
            # back through the very entry it buried.
            allowed = set()
            if top.region is not None:
                allowed.add(top.region)
            if top.awaiting is not None:
                allowed.add(top.awaiting)
            return allowed
        return {top.region}

    def _steal_gang_ctx(self, w: Worker):
        pred = self._gang_pred(w)
        n = self.config.n_workers
        if n == 1:
            return None
        start = w.rng.randrange(n)
        for k in range(n):
            vid = (start + k) % n
            if vid == w.wid:
                continue
            victim = self.workers[vid]
            ctx = victim.gang_deq.take_eligible(pred)
            if ctx is not None:
                self.gang_loads.transfer(vid, w.wid)
                w.steals["gang"] += 1
                self.tracer.emit(
                    w.wid, KIND_STEAL, victim=vid, mode="gang",
                    ctx=ctx.name, gang=ctx.gang_id,
                )
                return ctx, "gang_steal"
        return None

    def _steal_normal(self, w: Worker, allowed: set | None):
        n = self.config.n_workers
        if n == 1:
            return None
        policy = self.config.victim_policy
        mode = selection_mode(w.history, policy)
        vid = select_victim(w.history, w.rng, n, w.wid, policy)
        if vid == w.wid:
            return None
        victim = self.workers[vid]
        pred = None if allowed is None else (
            lambda c: c.kind == KIND_TASK or c.region in allowed
        )
        ctx = victim.suspended_q.steal(pred)
        if ctx is None:
            for q in victim.normal_qs.levels():
                ctx = q.steal(pred)
                if ctx is not None:
                    break
        record_steal_outcome(w.history, vid, ctx is not None, policy)
        if ctx is not None:
            w.steals[mode] += 1
            self.tracer.emit(w.wid, KIND_STEAL, victim=vid, mode=mode, ctx=ctx.name)
            return ctx, "steal"
        w.steal_fails[mode] += 1
        self.tracer.emit(w.wid, KIND_STEAL_FAIL, victim=vid, mode=mode)
        return None

    def steal_from(self, thief: Worker, victim: Worker):
        """One targeted steal attempt: gang queue (eligibility), suspended, normals."""
        ctx = victim.gang_deq.take_eligible(self._gang_pred(thief))
        if ctx is not None:
            self.gang_loads.transfer(victim.wid, thief.wid)
            return ctx
        ctx = victim.suspended_q.steal()
        if ctx is not None:
            return ctx
        for q in victim.normal_qs.levels():
            ctx = q.steal()
            if ctx is not None:
                return ctx
        return None

    # -- execution ---------------------------------------------------------------

    def _execute(self, w: Worker, ctx: Context) -> None:
        self.tracer.emit(w.wid, KIND_RUN_START, ctx=ctx.name, item=ctx.kind)
        outcome = ctx.run_slice(w)
        self.tracer.emit(
            w.wid, KIND_RUN_END,
            ctx=ctx.name, state=outcome.state, reason=outcome.reason,
        )
        if outcome.state == FINISHED:
            w.stack.pop()
            if ctx.kind == KIND_MEMBER:
                self._member_finished(w, ctx)
            else:
                self._task_finished(w, ctx)
        elif outcome.detached:
            w.stack.pop()
            with self._handoff_lock:
                ctx._handoff_parked = True
                if ctx._handoff_fired:
                    self._enqueue_suspended(w, ctx)
        # else: pinned member stays on the stack until released

    def _member_finished(self, w: Worker, ctx: Context) -> None:
        # body errors were recorded by _member_body before the final arrival
        if ctx.region.gang is not None:
            self.gang_loads.finish(w.wid)
        self._outstanding_dec()
        self._bump()

    def _task_finished(self, w: Worker, ctx: Context) -> None:
        node = ctx.task
        level = len(w.stack)
        if ctx.error is not None and node.region is not None:
            node.region.record_error(ctx.error)
        newly = self.tracker.complete(node)
        for succ in newly:
            w.normal_qs.at(level).push(succ.ctx, priority=succ.priority)
            self.tracer.emit(
                w.wid, KIND_TASK_READY, task=succ.task_id, ctx=succ.ctx.name, level=level
            )
        if node.region is not None:
            node.region.task_exit()
        self._outstanding_dec()
        self._bump()

    # -- watchdog -------------------------------------------------------------------

    def _watchdog_loop(self) -> None:
        timeout = self.config.watchdog_timeout
        period = min(0.05, timeout / 5)
        last_progress = -1
        last_change = time.perf_counter()
        while not (self._stop or self.aborted):
            time.sleep(period)
            with self._state_lock:
                prog, outstanding = self._progress, self._outstanding
            now = time.perf_counter()
            if prog != last_progress:
                last_progress = prog
                last_change = now
                continue
            if outstanding > 0 and now - last_change >= timeout:
                self._abort()
                return

    def _abort(self) -> None:
        self.deadlock_detected = True
        self.aborted = True
        self.tracer.emit(-1, KIND_DEADLOCK, report=self._deadlock_report())

    def _deadlock_report(self) -> str:
        lines = [f"no progress with {self.outstanding} outstanding item(s)"]
        for w in self.workers:
            stack = ", ".join(repr(c) for c in w.stack) or "(empty)"
            lines.append(f"  worker {w.wid}: stack=[{stack}] queued={w.queued_total()}")
        return "\n".join(lines)

    # -- introspection ----------------------------------------------------------------

    def queued_total(self) -> int:
        return sum(w.queued_total() for w in self.workers)

    def steal_counts(self) -> dict[str, int]:
        out: dict[str, int] = {"history": 0, "random": 0, "gang": 0, "region": 0,
                               "fail_history": 0, "fail_random": 0}
        for w in self.workers:
            for k, v in w.steals.items():
                out[k] += v
            for k, v in w.steal_fails.items():
                out[f"fail_{k}"] += v
        return out
