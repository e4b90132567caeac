import pytest

from gangsteal.config import SchedulerConfig
from gangsteal.runtime import Runtime


@pytest.fixture
def make_runtime():
    """Runtime factory; everything started here is shut down at test exit."""
    started = []

    def make(**overrides):
        overrides.setdefault("n_workers", 2)
        overrides.setdefault("watchdog_timeout", 20.0)
        rt = Runtime(SchedulerConfig(**overrides)).start()
        started.append(rt)
        return rt

    yield make
    for rt in started:
        rt.shutdown()


@pytest.fixture(autouse=True)
def _no_env_leakage(monkeypatch):
    # Scheduler env knobs set in the outer environment must not skew tests.
    monkeypatch.delenv("GANG_SCHED", raising=False)
    monkeypatch.delenv("SCHED_SEED", raising=False)
