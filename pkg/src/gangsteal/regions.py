"""Parallel-region state: membership, round barriers, and the closing join.

A region is a team of member contexts forked together.  Members synchronize
at round barriers (arrival-counted, generation-advancing) and finish through
a closing join that waits for every member arrival *and* for the region's
task pool to drain, OpenMP-style.  Completion releases the waiting members
and whoever forked the region.
"""
from __future__ import annotations

import itertools
import threading

from .context import Context
from .errors import UsageError
from .gang import GangDescriptor

_region_ids = itertools.count()

MODE_GANG = "gang"
MODE_STEAL = "steal"


class RegionState:
    """Shared bookkeeping for one forked region."""

    __slots__ = (
        "rid", "name", "mode", "team", "parent_ctx", "member_nest",
        "gang", "members", "rt", "_lock",
        "_bar_arrived", "_bar_gen", "_bar_waiters",
        "_final_arrived", "_final_waiters", "_task_count",
        "complete", "_parent_wait", "_directory", "_spawn_sites", "errors",
    )

    def __init__(self, rt, parent_ctx: Context, team: int, mode: str, name: str = "") -> None:
        self.rid = next(_region_ids)
        self.name = name or f"region{self.rid}"
        self.mode = mode
        self.team = team
        self.parent_ctx = parent_ctx
        self.member_nest = parent_ctx.static_nest + 1
        self.gang: GangDescriptor | None = None
        self.members: list[Context] = []
        self.rt = rt
        self._lock = threading.Lock()
        self._bar_arrived = 0
        self._bar_gen = 0
        self._bar_waiters: list[Context] = []
        self._final_arrived = 0
        self._final_waiters: list[Context] = []
        self._task_count = 0
        self.complete = False
        self._parent_wait: tuple[str, object] | None = None
        self._directory: dict[int, tuple[int, int]] = {}
        self._spawn_sites: list[tuple[int, int]] = []
        self.errors: list[BaseException] = []

    def __repr__(self) -> str:
        return f"<region {self.name} team={self.team} mode={self.mode}>"

    # -- round barriers --------------------------------------------------------

    def barrier_arrive(self, ctx: Context) -> bool:
        """Count an arrival; True means the round just completed (caller passes)."""
        with self._lock:
            if self.complete:
                raise UsageError(f"{self.name}: barrier after region completion")
            self._bar_arrived += 1
            if self._bar_arrived == self.team:
                self._bar_arrived = 0
                self._bar_gen += 1
                waiters, self._bar_waiters = self._bar_waiters, []
                for w in waiters:
                    self.rt._release_pinned(w, "barrier")
                return True
            self._bar_waiters.append(ctx)
            return False

    @property
    def barrier_generation(self) -> int:
        with self._lock:
            return self._bar_gen

    # -- closing join -----------------------------------------------------------

    def final_arrive(self, ctx: Context) -> bool:
        """Member reached the end of its body.  True: region completed now."""
        with self._lock:
            self._final_arrived += 1
            if self._final_arrived == self.team and self._task_count == 0:
                self._complete_locked()
                return True
            self._final_waiters.append(ctx)
            return False

    def task_enter(self) -> None:
        with self._lock:
            self._task_count += 1

    def task_exit(self) -> None:
        with self._lock:
            self._task_count -= 1
            if self._task_count < 0:
                raise RuntimeError(f"{self.name}: task count underflow")
            if (
                self._task_count == 0
                and self._final_arrived == self.team
                and not self.complete
            ):
                self._complete_locked()

    def _complete_locked(self) -> None:
        if self.complete:
            raise RuntimeError(f"{self.name}: completed twice")
        self.complete = True
        waiters, self._final_waiters = self._final_waiters, []
        for w in waiters:
            self.rt._release_pinned(w, "join")
        self.rt._region_completed(self, self._parent_wait)

    def register_join(self, waiter: tuple[str, object]) -> bool:
        """Record the joiner; True if the region is already complete."""
        with self._lock:
            if self.complete:
                return True
            self._parent_wait = waiter
            return False

    # -- placement directory ------------------------------------------------------

    def record_adoption(self, thread_id: int, worker_id: int, level: int) -> None:
        with self._lock:
            self._directory[thread_id] = (worker_id, level)

    def record_spawn_site(self, worker_id: int, level: int) -> None:
        with self._lock:
            if (worker_id, level) not in self._spawn_sites:
                self._spawn_sites.append((worker_id, level))

    def steal_sites(self, exclude_worker: int) -> list[tuple[int, int]]:
        """Queue coordinates where this region's work may be parked."""
        with self._lock:
            sites = set(self._directory.values())
            sites.update(self._spawn_sites)
        return [(w, lvl) for (w, lvl) in sites if w != exclude_worker]

    def record_error(self, exc: BaseException) -> None:
        with self._lock:
            self.errors.append(exc)


class RegionHandle:
    """Caller-side handle returned by fork; single-use join token."""

    __slots__ = ("region", "joined")

    def __init__(self, region: RegionState) -> None:
        self.region = region
        self.joined = False

    @property
    def complete(self) -> bool:
        return self.region.complete

    def __repr__(self) -> str:
        return f"<handle {self.region.name} joined={self.joined}>"
