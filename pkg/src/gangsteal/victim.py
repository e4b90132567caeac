"""Victim selection for work stealing.

The hybrid policy keeps a small window of previously successful victims and a
cursor that advances on hits and retreats on misses, so thieves alternate
between exploiting a proven victim and probing a random one.  The history-only
baseline pins the last successful victim until the next success overwrites it
(random only before the first success); the random policy never remembers.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .config import VICTIM_POLICIES
from .errors import ConfigurationError

NO_VICTIM = -1


@dataclass(slots=True)
class StealHistory:
    """Per-worker victim memory: `window` slots plus a cursor into them."""

    window: int
    slots: list[int] = field(default_factory=list)
    idx: int = 0

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ConfigurationError(f"steal window must be >= 1, got {self.window}")
        if not self.slots:
            self.slots = [NO_VICTIM] * self.window
        if len(self.slots) != self.window:
            raise ConfigurationError("slots length must equal window")


def make_history(policy: str, window: int) -> StealHistory:
    """History sized for `policy`: history-only collapses to one slot."""
    if policy not in VICTIM_POLICIES:
        raise ConfigurationError(f"unknown victim policy {policy!r}")
    return StealHistory(window=1 if policy == "history" else window)


def selection_mode(history: StealHistory, policy: str = "hybrid") -> str:
    """'history' when the cursor slot holds a remembered victim, else 'random'."""
    if policy == "random":
        return "random"
    return "history" if history.slots[history.idx] >= 0 else "random"


def select_victim(history: StealHistory, rng: random.Random, n_workers: int,
                  self_id: int, policy: str = "hybrid") -> int:
    """Pick the next victim id.

    The remembered victim at the cursor slot wins when present; otherwise a
    uniform random worker, re-drawn until it is not the stealer itself.  With
    a single worker there is nobody else, so the only id comes back and the
    caller's self-steal degenerates to a no-op.
    """
    if n_workers == 1:
        return self_id
    if policy != "random":
        remembered = history.slots[history.idx]
        if remembered >= 0:
            return remembered
    while True:
        v = rng.randrange(n_workers)
        if v != self_id:
            return v


def record_steal_outcome(history: StealHistory, victim: int, success: bool,
                         policy: str = "hybrid") -> None:
    """Write the attempt's outcome into the cursor slot and move the cursor.

    Success stores the victim and advances (clamped at window-1); failure
    clears the slot and retreats (clamped at 0).  The random policy keeps no
    state at all.  History-only keeps the last successful victim until the
    next success — a miss neither clears the memory nor moves the frozen
    cursor, so such a thief goes random only before its first success.
    """
    if policy == "random":
        return
    if policy == "history":
        if success:
            history.slots[0] = victim
        return
    cur = history.idx
    if success:
        history.slots[cur] = victim
        history.idx = min(cur + 1, history.window - 1)
    else:
        history.slots[cur] = NO_VICTIM
        history.idx = max(cur - 1, 0)


def do_workstealing(history: StealHistory, rng: random.Random, n_workers: int,
                    self_id: int, steal_fn, policy: str = "hybrid"):
    """One steal attempt: select, try `steal_fn(victim)`, record the outcome.

    Returns ``(item, victim, mode)`` where item is None on a miss.  `steal_fn`
    is the runtime's steal_from bound to the thief; using a callback keeps the
    alternation logic testable without a live worker pool.
    """
    mode = selection_mode(history, policy)
    victim = select_victim(history, rng, n_workers, self_id, policy)
    item = steal_fn(victim)
    record_steal_outcome(history, victim, item is not None, policy)
    return item, victim, mode
