"""Execution contexts backed by lazily-created carrier threads.

A context is a resumable activation: region members, dataflow task bodies,
and the root caller.  Scheduling workers never run user code on their own
stack; they hand the context to its carrier thread and park until the carrier
either finishes or reaches a suspension point.  Because the activation state
lives entirely on the carrier, an unstarted or suspended context can be
adopted by any worker.

Handoff protocol per slice:
  worker: mailbox = [None]; ctx._mailbox = mailbox; ctx._report = my_event
          ctx._go.set(); my_event.wait(); outcome = mailbox[0]
  carrier: ... at yield: mbox, rep = captured at wake; mbox[0] = outcome
           rep.set(); self._go.wait(); self._go.clear(); continue
The mailbox is captured per slice, so a context re-adopted by another worker
cannot clobber an outcome the previous worker has not read yet.
"""
from __future__ import annotations

import itertools
import threading

from .taskgraph import BLOCKED, CREATED, FINISHED, RUNNABLE, RUNNING

KIND_ROOT = "root"
KIND_MEMBER = "member"
KIND_TASK = "task"

REASON_BARRIER = "barrier"
REASON_JOIN = "join"
REASON_COMM = "comm"

_ctx_ids = itertools.count()
_tls = threading.local()


def current_context() -> "Context | None":
    """Context whose carrier is the calling thread, or None off-carrier."""
    return getattr(_tls, "ctx", None)


class SliceOutcome:
    """What a carrier reports back to the hosting worker for one slice."""

    __slots__ = ("state", "reason", "detached")

    def __init__(self, state: str, reason: str | None = None, detached: bool = False):
        self.state = state
        self.reason = reason
        self.detached = detached


class Context:
    """Resumable activation of a member body, task body, or the root caller."""

    __slots__ = (
        "ctx_id", "kind", "body", "name", "region", "thread_id", "static_nest",
        "gang_id", "gang_flag", "priority", "state", "block_reason", "awaiting",
        "released", "host", "task", "error", "rt",
        "_go", "_report", "_mailbox", "_carrier", "_started",
        "_handoff_parked", "_handoff_fired",
    )

    def __init__(
        self,
        kind: str,
        body=None,
        *,
        name: str = "",
        region=None,
        thread_id: int = -1,
        static_nest: int = 0,
        gang_id: int | None = None,
        gang_flag: bool = False,
        priority: int = 0,
        rt=None,
    ) -> None:
        self.ctx_id = next(_ctx_ids)
        self.kind = kind
        self.body = body
        self.name = name or f"{kind}{self.ctx_id}"
        self.region = region
        self.thread_id = thread_id
        self.static_nest = static_nest
        self.gang_id = gang_id
        self.gang_flag = gang_flag
        self.priority = priority
        self.state = CREATED
        self.block_reason: str | None = None
        self.awaiting = None          # region this context is joining, if any
        self.released = False
        self.host = None              # worker currently (or last) hosting us
        self.task = None              # backref for task-kind contexts
        self.error: BaseException | None = None
        self.rt = rt
        self._go = threading.Event()
        self._report: threading.Event | None = None
        self._mailbox: list | None = None
        self._carrier: threading.Thread | None = None
        self._started = False
        # Two-phase handoff for detached suspensions: the releaser (region
        # completion, comm timer) and the hosting worker race to observe the
        # block; whichever comes second performs the re-enqueue.
        self._handoff_parked = False
        self._handoff_fired = False

    def __repr__(self) -> str:
        return f"<ctx {self.name} {self.state}{':' + self.block_reason if self.block_reason else ''}>"

    # -- worker side ---------------------------------------------------------

    def run_slice(self, worker) -> SliceOutcome:
        """Run until the next suspension point or completion.

        Called from a scheduling worker; blocks that worker (only) while the
        carrier makes progress.
        """
        mailbox: list = [None]
        self.host = worker
        self._mailbox = mailbox
        self._report = worker.step_event
        worker.step_event.clear()
        self.state = RUNNING
        self.block_reason = None
        self.released = False
        if not self._started:
            self._started = True
            self._carrier = threading.Thread(
                target=self._carrier_main, name=f"carrier-{self.name}", daemon=True
            )
            self._carrier.start()
        self._go.set()
        worker.step_event.wait()
        outcome = mailbox[0]
        if outcome is None:  # pragma: no cover - protocol violation
            raise RuntimeError(f"carrier of {self!r} reported no outcome")
        return outcome

    # -- carrier side --------------------------------------------------------

    def _carrier_main(self) -> None:
        _tls.ctx = self
        self._go.wait()
        self._go.clear()
        try:
            self.body()
        except BaseException as exc:  # noqa: BLE001 - surfaced at join time
            self.error = exc
        self.state = FINISHED
        mbox, rep = self._mailbox, self._report
        mbox[0] = SliceOutcome(FINISHED)
        rep.set()

    def yield_blocked(self, reason: str, detached: bool = False) -> None:
        """Park the carrier; report the block to the hosting worker.

        Must only be called from this context's own carrier thread.  Returns
        when some worker resumes the context.
        """
        assert current_context() is self, "yield from foreign thread"
        self.state = BLOCKED
        self.block_reason = reason
        mbox, rep = self._mailbox, self._report
        self._mailbox = None
        mbox[0] = SliceOutcome(BLOCKED, reason, detached)
        rep.set()
        self._go.wait()
        self._go.clear()

    # -- release plumbing (any thread) ----------------------------------------

    def mark_released(self) -> None:
        """Flag a pinned context runnable-in-place; its worker will see it."""
        self.released = True


def make_root_context(rt) -> Context:
    """Pseudo-context for the external caller thread (no carrier)."""
    ctx = Context(KIND_ROOT, name="root", static_nest=0, rt=rt)
    ctx.state = RUNNING
    return ctx
