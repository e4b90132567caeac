"""Gang dispatch primitives: id allocation, worker reservation, eligibility.

A gang is a team of region member contexts dispatched together, one per
reserved worker.  Reservation balances a per-worker gang-load counter; the
adoption-order predicate (`is_eligible_to_sched`) is what keeps nested gangs
deadlock-free, so its exact shape matters more than anything else here.
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass

from .errors import CapacityError, InvariantError


@dataclass(frozen=True, slots=True)
class GangDescriptor:
    """Identity of one dispatched gang."""

    gang_id: int
    team_size: int
    nest_level: int          # creating context's nest level, stamped at fork
    reserved: tuple[int, ...]  # worker id per member thread id

    def __post_init__(self) -> None:
        if len(self.reserved) != self.team_size:
            raise InvariantError("reserved worker list must match team size")


class GangIdAllocator:
    """Monotonic, never-reused gang ids; safe under concurrent forks."""

    __slots__ = ("_counter", "_lock", "_last")

    def __init__(self) -> None:
        self._counter = itertools.count()
        self._lock = threading.Lock()
        self._last = -1

    def next_gang_id(self) -> int:
        with self._lock:
            gid = next(self._counter)
            if gid <= self._last:
                raise InvariantError("gang ids must increase monotonically")
            self._last = gid
            return gid


class GangLoadTable:
    """Outstanding gang-member counts, per worker and global."""

    __slots__ = ("_per_worker", "_global", "_lock")

    def __init__(self, n_workers: int) -> None:
        self._per_worker = [0] * n_workers
        self._global = 0
        self._lock = threading.Lock()

    def snapshot(self) -> tuple[list[int], int]:
        with self._lock:
            return list(self._per_worker), self._global

    def add_dispatch(self, workers: list[int] | tuple[int, ...]) -> None:
        with self._lock:
            for w in workers:
                self._per_worker[w] += 1
            self._global += len(workers)

    def transfer(self, src: int, dst: int) -> None:
        """Move one member's accounting when its context is stolen."""
        if src == dst:
            return
        with self._lock:
            if self._per_worker[src] <= 0:
                raise InvariantError(f"transfer from worker {src} with no gang load")
            self._per_worker[src] -= 1
            self._per_worker[dst] += 1

    def finish(self, worker: int) -> None:
        """One member completed on `worker`; decrement both counters."""
        with self._lock:
            if self._per_worker[worker] <= 0 or self._global <= 0:
                raise InvariantError(f"gang load underflow on worker {worker}")
            self._per_worker[worker] -= 1
            self._global -= 1

    def check_consistent(self) -> None:
        with self._lock:
            if sum(self._per_worker) != self._global or min(self._per_worker, default=0) < 0:
                raise InvariantError("gang load table inconsistent")


def choose_workers(requester: int, n_request: int, loads: list[int],
                   global_load: int) -> list[int]:
    """Reserve `n_request` distinct workers for a new gang.

    The scan starts just past the requester, or half a team behind it when the
    team would run off the end of the worker range, and takes workers whose
    gang load is at or below the global average (integer division, computed
    before this gang is counted).  If one full circular pass cannot fill the
    team, the remainder is taken in circular order regardless of load, so the
    reservation always terminates.
    """
    n_workers = len(loads)
    if n_request > n_workers:
        raise CapacityError(f"gang of {n_request} exceeds {n_workers} workers")
    if n_request < 1:
        raise CapacityError("gang team size must be >= 1")
    avg = global_load // n_workers
    if requester + n_request >= n_workers:
        start = (requester - n_request // 2) % n_workers
    else:
        start = requester + 1

    chosen: list[int] = []
    idx = start
    for _ in range(n_workers):
        if len(chosen) == n_request:
            break
        if loads[idx] <= avg:
            chosen.append(idx)
        idx = (idx + 1) % n_workers
    while len(chosen) < n_request:
        if idx not in chosen:
            chosen.append(idx)
        idx = (idx + 1) % n_workers
    return chosen


def is_eligible_to_sched(ctx_gang_id: int, ctx_nest: int,
                         worker_gang_id: int | None, worker_nest: int) -> bool:
    """May a worker adopt this gang context right now?

    True when the worker has no active gang, when the context comes from a
    deeper nest, or when it ties on nest but belongs to an older (smaller-id)
    gang.  Adopting only along this order keeps every worker's stack of active
    gangs well-founded, which is the deadlock-avoidance argument.
    """
    if worker_gang_id is None or worker_gang_id < 0:
        return True
    if ctx_nest > worker_nest:
        return True
    if ctx_nest == worker_nest and ctx_gang_id < worker_gang_id:
        return True
    return False
