"""Scheduler configuration and environment-variable resolution."""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

from .errors import ConfigurationError

# Environment knobs honored by start_runtime(); explicit config fields win.
ENV_GANG_SCHED = "GANG_SCHED"
ENV_SCHED_SEED = "SCHED_SEED"

VICTIM_POLICIES = ("hybrid", "history", "random")

# Priority order of the local queue classes consulted at a scheduling point.
# gang_deq before suspended_q is the default; both orders are legal.
DEFAULT_QUEUE_ORDER = ("gang_deq", "suspended_q", "normal_q")


@dataclass(frozen=True, slots=True)
class SchedulerConfig:
    """Immutable knobs for one runtime instance."""

    n_workers: int = 4
    steal_window: int = 8
    victim_policy: str = "hybrid"
    gang_sched_default: bool = True  # top-level regions gang-schedule unless opted out
    eligibility_enabled: bool = True
    seed: int = 0
    watchdog_timeout: float = 30.0
    queue_order: tuple[str, ...] = DEFAULT_QUEUE_ORDER
    pin_workers: bool = False
    trace_enabled: bool = True
    idle_spin: int = 64          # scan passes before the first backoff sleep
    idle_sleep_max: float = 0.002

    def __post_init__(self) -> None:
        if self.n_workers < 1 or self.n_workers > 256:
            raise ConfigurationError(f"n_workers must be in [1, 256], got {self.n_workers}")
        if self.steal_window < 1:
            raise ConfigurationError(f"steal_window must be >= 1, got {self.steal_window}")
        if self.victim_policy not in VICTIM_POLICIES:
            raise ConfigurationError(f"victim_policy must be one of {VICTIM_POLICIES}")
        if self.watchdog_timeout <= 0:
            raise ConfigurationError("watchdog_timeout must be positive")
        if sorted(self.queue_order) != sorted(DEFAULT_QUEUE_ORDER):
            raise ConfigurationError(f"queue_order must be a permutation of {DEFAULT_QUEUE_ORDER}")


def resolve_env(config: SchedulerConfig, env: dict[str, str] | None = None) -> SchedulerConfig:
    """Apply GANG_SCHED / SCHED_SEED environment overrides to `config`."""
    src = os.environ if env is None else env
    out = config
    gang = src.get(ENV_GANG_SCHED)
    if gang is not None:
        out = replace(out, gang_sched_default=gang.strip() not in ("", "0"))
    seed = src.get(ENV_SCHED_SEED)
    if seed is not None:
        try:
            out = replace(out, seed=int(seed))
        except ValueError as exc:
            raise ConfigurationError(f"{ENV_SCHED_SEED} must be an integer, got {seed!r}") from exc
    return out
