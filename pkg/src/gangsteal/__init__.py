"""Gang-scheduled parallel regions on a work-stealing task runtime."""
from .api import (
    fork_region,
    join_region,
    region_barrier,
    reset_gang_sched,
    set_gang_sched,
    simulate_comm,
    start_runtime,
    stop_runtime,
    submit_task,
    wait_all,
)
from .config import SchedulerConfig
from .errors import (
    CapacityError,
    ConfigurationError,
    DeadlockError,
    InvariantError,
    UsageError,
)
from .metrics import RunMetrics
from .runtime import Runtime
from .taskgraph import DependenceKey, key
from .workloads import WorkloadSpec, run_experiment, run_workload

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "ConfigurationError",
    "DeadlockError",
    "DependenceKey",
    "InvariantError",
    "Runtime",
    "SchedulerConfig",
    "UsageError",
    "fork_region",
    "join_region",
    "key",
    "region_barrier",
    "reset_gang_sched",
    "RunMetrics",
    "run_experiment",
    "run_workload",
    "set_gang_sched",
    "simulate_comm",
    "start_runtime",
    "stop_runtime",
    "submit_task",
    "wait_all",
    "WorkloadSpec",
]
