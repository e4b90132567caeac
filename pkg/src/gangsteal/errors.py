"""Exception types raised by the runtime."""
from __future__ import annotations


class ConfigurationError(ValueError):
    """A SchedulerConfig field is out of range or inconsistent."""


class CapacityError(RuntimeError):
    """A gang region requested more members than there are workers."""


class UsageError(RuntimeError):
    """An API call violated its contract (double join, foreign barrier, ...)."""


class InvariantError(AssertionError):
    """Internal bookkeeping corruption; always a bug, never user error."""


class DeadlockError(RuntimeError):
    """The watchdog declared the run wedged and aborted it."""
