"""Steal-enabled work queues.

Normal queues keep the owner end hot (newest, highest priority) and the thief
end cold (oldest, lowest priority).  Gang dispatch queues are multi-producer
FIFOs whose removals are gated by an eligibility predicate; ineligible entries
stay put for a worker they do suit.
"""
from __future__ import annotations

import itertools
import threading

_seq = itertools.count()


class StealQueue:
    """Lock-protected queue: owner pops LIFO, thieves steal FIFO.

    Entries carry an advisory priority; higher priority sits closer to the
    owner end, so the owner drains urgent work first while thieves take the
    coldest item.  Both ends accept an optional predicate so restricted
    scheduling modes can skip work they must not touch.
    """

    __slots__ = ("_items", "_lock")

    def __init__(self) -> None:
        self._items: list[tuple[int, int, object]] = []  # (priority, seq, item)
        self._lock = threading.Lock()

    def push(self, item: object, priority: int = 0) -> None:
        with self._lock:
            i = len(self._items)
            while i > 0 and self._items[i - 1][0] > priority:
                i -= 1
            self._items.insert(i, (priority, next(_seq), item))

    def pop(self, pred=None) -> object | None:
        """Owner end: newest item of the highest priority that passes `pred`."""
        with self._lock:
            for i in range(len(self._items) - 1, -1, -1):
                item = self._items[i][2]
                if pred is None or pred(item):
                    del self._items[i]
                    return item
        return None

    def steal(self, pred=None) -> object | None:
        """Thief end: oldest, lowest-priority item that passes `pred`."""
        with self._lock:
            for i, (_, _, item) in enumerate(self._items):
                if pred is None or pred(item):
                    del self._items[i]
                    return item
        return None

    def __len__(self) -> int:
        with self._lock:
            return len(self._items)

    def snapshot(self) -> list[object]:
        with self._lock:
            return [item for _, _, item in self._items]


class GangDeque:
    """Multi-producer FIFO of dispatched gang contexts.

    Removal scans from the front and takes the first entry the caller's
    eligibility predicate accepts, leaving the rest in dispatch order.
    """

    __slots__ = ("_items", "_lock")

    def __init__(self) -> None:
        self._items: list[object] = []
        self._lock = threading.Lock()

    def push(self, ctx: object) -> None:
        with self._lock:
            self._items.append(ctx)

    def take_eligible(self, elig_fn) -> object | None:
        with self._lock:
            for i, ctx in enumerate(self._items):
                if elig_fn(ctx):
                    del self._items[i]
                    return ctx
        return None

    def __len__(self) -> int:
        with self._lock:
            return len(self._items)

    def snapshot(self) -> list[object]:
        with self._lock:
            return list(self._items)


class LeveledQueues:
    """Auto-growing array of StealQueue indexed by a worker's stack depth."""

    __slots__ = ("_levels", "_lock")

    def __init__(self) -> None:
        self._levels: list[StealQueue] = []
        self._lock = threading.Lock()

    def at(self, level: int) -> StealQueue:
        if level < 0:
            raise ValueError(f"queue level must be >= 0, got {level}")
        with self._lock:
            while len(self._levels) <= level:
                self._levels.append(StealQueue())
            return self._levels[level]

    def levels(self) -> list[StealQueue]:
        with self._lock:
            return list(self._levels)

    def total(self) -> int:
        return sum(len(q) for q in self.levels())
