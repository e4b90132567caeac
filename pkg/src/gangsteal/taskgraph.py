"""Dataflow task bookkeeping: dependence keys, nodes, and edge discovery.

Dependences are declared as read/write sets over opaque hashable keys (tile
coordinates, buffer names).  Submission order defines the semantics: a reader
depends on the last writer of each key it reads; a writer additionally waits
for every reader since that write (anti-dependence) and for the previous
writer (output dependence).
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable

# Lifecycle states for tasks and region-member contexts.
CREATED = "created"
RUNNABLE = "runnable"
RUNNING = "running"
BLOCKED = "blocked"
FINISHED = "finished"


@dataclass(frozen=True, slots=True)
class DependenceKey:
    """Named coordinate in the dataflow space, e.g. ("tile", i, j)."""

    space: str
    coords: tuple[int, ...] = ()

    def __str__(self) -> str:
        if not self.coords:
            return self.space
        return f"{self.space}[{','.join(str(c) for c in self.coords)}]"


def key(space: str, *coords: int) -> DependenceKey:
    return DependenceKey(space, coords)


@dataclass(slots=True, eq=False)
class TaskNode:
    """One unit of dataflow work plus its scheduling state."""

    task_id: int
    body: Callable[[], Any]
    in_keys: tuple[Hashable, ...] = ()
    out_keys: tuple[Hashable, ...] = ()
    priority: int = 0
    name: str = ""
    region: object | None = None  # owning region, None for root scope
    state: str = CREATED
    unmet: int = 0
    preds: set[int] = field(default_factory=set)
    succs: list["TaskNode"] = field(default_factory=list)
    ctx: object | None = None  # execution context, attached by the runtime
    # Set when the last predecessor finished before the context was attached;
    # the submitting thread then owns the enqueue (see attach()).
    deferred_release: bool = False

    def __repr__(self) -> str:  # keep reprs short in trace payloads
        return f"<task {self.task_id} {self.name or ''} {self.state}>"


class DependenceTracker:
    """Discovers edges at submission time and counts down at completion.

    All mutation happens under one lock so the unmet-count handoff is atomic:
    a task is reported ready exactly once, either at submission (no pending
    predecessors) or by the completion of its final predecessor.
    """

    __slots__ = ("_lock", "_ids", "_last_writer", "_readers", "tasks")

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._ids = itertools.count()
        self._last_writer: dict[Hashable, TaskNode] = {}
        self._readers: dict[Hashable, list[TaskNode]] = {}
        self.tasks: list[TaskNode] = []

    def submit(
        self,
        body: Callable[[], Any],
        in_keys: tuple[Hashable, ...] = (),
        out_keys: tuple[Hashable, ...] = (),
        priority: int = 0,
        name: str = "",
        region: object | None = None,
    ) -> tuple[TaskNode, bool]:
        """Register a task; returns (node, ready_now)."""
        with self._lock:
            node = TaskNode(
                task_id=next(self._ids),
                body=body,
                in_keys=tuple(in_keys),
                out_keys=tuple(out_keys),
                priority=priority,
                name=name,
                region=region,
            )
            pending: set[int] = set()
            for k in node.in_keys:
                w = self._last_writer.get(k)
                if w is not None:
                    node.preds.add(w.task_id)
                    if w.state is not FINISHED:
                        pending.add(w.task_id)
                        w.succs.append(node)
            for k in node.out_keys:
                w = self._last_writer.get(k)
                if w is not None and w is not node:
                    node.preds.add(w.task_id)
                    if w.state is not FINISHED:
                        pending.add(w.task_id)
                        w.succs.append(node)
                for r in self._readers.get(k, ()):
                    if r is not node:
                        node.preds.add(r.task_id)
                        if r.state is not FINISHED:
                            pending.add(r.task_id)
                            r.succs.append(node)
            for k in node.out_keys:
                self._last_writer[k] = node
                self._readers[k] = []
            for k in node.in_keys:
                self._readers.setdefault(k, []).append(node)
            node.unmet = len(pending)
            ready = node.unmet == 0
            node.state = RUNNABLE if ready else CREATED
            self.tasks.append(node)
            return node, ready

    def complete(self, node: TaskNode) -> list[TaskNode]:
        """Mark finished; return successors that just became runnable.

        A successor whose submitter has not attached a context yet cannot be
        enqueued here — it is flagged instead, and attach() reports it back
        to the submitting thread, which enqueues it exactly once.
        """
        with self._lock:
            if node.state is FINISHED:
                raise RuntimeError(f"task {node.task_id} completed twice")
            node.state = FINISHED
            newly_ready: list[TaskNode] = []
            for succ in node.succs:
                succ.unmet -= 1
                if succ.unmet < 0:
                    raise RuntimeError(f"task {succ.task_id} unmet count underflow")
                if succ.unmet == 0 and succ.state is CREATED:
                    succ.state = RUNNABLE
                    if succ.ctx is None:
                        succ.deferred_release = True
                    else:
                        newly_ready.append(succ)
            return newly_ready

    def attach(self, node: TaskNode, ctx: object) -> bool:
        """Bind the execution context; True if the caller must enqueue now."""
        with self._lock:
            node.ctx = ctx
            fired = node.deferred_release
            node.deferred_release = False
            return fired

    def unfinished(self) -> int:
        with self._lock:
            return sum(1 for t in self.tasks if t.state is not FINISHED)
