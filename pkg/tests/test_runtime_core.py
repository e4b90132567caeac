"""Runtime lifecycle, task submission, simulated transfers, wake latency."""
import sys
import threading
import time

import pytest

from gangsteal import api
from gangsteal.config import SchedulerConfig, resolve_env
from gangsteal.errors import CapacityError, ConfigurationError, UsageError
from gangsteal.runtime import Runtime
from gangsteal.taskgraph import key
from gangsteal.trace import KIND_GANG_DISPATCH


def test_start_twice_rejected(make_runtime):
    rt = make_runtime()
    with pytest.raises(UsageError):
        rt.start()


def test_submission_after_shutdown_rejected():
    rt = Runtime(SchedulerConfig(n_workers=2)).start()
    rt.shutdown()
    with pytest.raises(UsageError):
        rt.submit_task(rt.root_ctx, lambda: None)
    with pytest.raises(UsageError):
        rt.fork_region(rt.root_ctx, 2, lambda tid: None)


def test_submission_before_start_rejected():
    rt = Runtime(SchedulerConfig(n_workers=2))
    with pytest.raises(UsageError):
        rt.submit_task(rt.root_ctx, lambda: None)


def test_shutdown_restores_switch_interval():
    before = sys.getswitchinterval()
    rt = Runtime(SchedulerConfig(n_workers=1)).start()
    assert sys.getswitchinterval() != before or before == 0.0005
    rt.shutdown()
    assert sys.getswitchinterval() == before


def test_context_manager_form():
    with Runtime(SchedulerConfig(n_workers=1)) as rt:
        done = []
        rt.submit_task(rt.root_ctx, lambda: done.append(1))
        rt.wait_all()
    assert done == [1]


def test_wait_all_with_nothing_outstanding_returns(make_runtime):
    rt = make_runtime()
    rt.wait_all()


def test_driver_submitted_tasks_all_run(make_runtime):
    rt = make_runtime(n_workers=4)
    hits = []
    lock = threading.Lock()

    def body(i):
        def run():
            with lock:
                hits.append(i)
        return run

    for i in range(200):
        rt.submit_task(rt.root_ctx, body(i))
    rt.wait_all()
    assert sorted(hits) == list(range(200))


def test_task_chain_passes_through_keys(make_runtime):
    rt = make_runtime(n_workers=2)
    order = []
    rt.submit_task(rt.root_ctx, lambda: order.append("a"), out_keys=[key("x")])
    rt.submit_task(rt.root_ctx, lambda: order.append("b"), in_keys=[key("x")], out_keys=[key("y")])
    rt.submit_task(rt.root_ctx, lambda: order.append("c"), in_keys=[key("y")])
    rt.wait_all()
    assert order == ["a", "b", "c"]


def test_root_task_error_is_kept_on_its_context(make_runtime):
    rt = make_runtime(n_workers=2)

    def bad():
        raise RuntimeError("task failed")

    node = rt.submit_task(rt.root_ctx, bad)
    rt.wait_all()
    assert isinstance(node.ctx.error, RuntimeError)


def test_gang_capacity_checked_against_pool(make_runtime):
    rt = make_runtime(n_workers=2)
    with pytest.raises(CapacityError):
        rt.fork_region(rt.root_ctx, 3, lambda tid: None, mode="gang")
    # work-stealing regions may oversubscribe freely
    seen = []
    lock = threading.Lock()

    def member(tid):
        with lock:
            seen.append(tid)

    h = rt.fork_region(rt.root_ctx, 6, member, mode="steal")
    rt.join_region(rt.root_ctx, h)
    assert len(seen) == 6


def test_team_size_must_be_positive(make_runtime):
    rt = make_runtime()
    with pytest.raises(CapacityError):
        rt.fork_region(rt.root_ctx, 0, lambda tid: None)


def test_unknown_mode_rejected(make_runtime):
    rt = make_runtime()
    with pytest.raises(UsageError):
        rt.fork_region(rt.root_ctx, 1, lambda tid: None, mode="slurm")


def test_gang_ids_increase_across_forks(make_runtime):
    rt = make_runtime(n_workers=4)
    for i in range(5):
        h = rt.fork_region(rt.root_ctx, 2, lambda tid: None, mode="gang")
        rt.join_region(rt.root_ctx, h)
    gids = [
        e.payload["gang"] for e in rt.tracer.events() if e.kind == KIND_GANG_DISPATCH
    ]
    assert len(gids) == 5
    assert gids == sorted(gids) and len(set(gids)) == 5


# -- simulated transfers -------------------------------------------------------

def test_root_comm_blocks_at_least_latency(make_runtime):
    rt = make_runtime(n_workers=1)
    t0 = time.perf_counter()
    rt.simulate_comm(rt.root_ctx, 20_000)
    assert time.perf_counter() - t0 >= 0.02


def test_zero_latency_comm_returns(make_runtime):
    rt = make_runtime(n_workers=1)
    rt.simulate_comm(rt.root_ctx, 0)


def test_negative_latency_rejected(make_runtime):
    rt = make_runtime(n_workers=1)
    with pytest.raises(UsageError):
        rt.simulate_comm(rt.root_ctx, -5)


def test_task_comm_window_is_at_least_latency(make_runtime):
    rt = make_runtime(n_workers=1)
    stamps = {}

    def talker():
        stamps["pre"] = time.perf_counter()
        api.simulate_comm(30_000)
        stamps["post"] = time.perf_counter()

    rt.submit_task(rt.root_ctx, talker)
    rt.wait_all()
    assert stamps["post"] - stamps["pre"] >= 0.03


def test_worker_is_freed_during_task_comm(make_runtime):
    # one worker, one in-flight transfer: the filler task must run inside
    # the transfer window, not after it
    rt = make_runtime(n_workers=1)
    stamps = {}

    def talker():
        stamps["pre"] = time.perf_counter()
        api.simulate_comm(60_000)
        stamps["post"] = time.perf_counter()

    def filler():
        stamps["filler"] = time.perf_counter()

    rt.submit_task(rt.root_ctx, talker)
    time.sleep(0.005)  # let the talker reach its suspend
    rt.submit_task(rt.root_ctx, filler)
    rt.wait_all()
    assert stamps["pre"] < stamps["filler"] < stamps["post"]


def test_member_comm_pins_but_completes(make_runtime):
    rt = make_runtime(n_workers=2)
    rounds = []
    lock = threading.Lock()

    def member(tid):
        api.simulate_comm(10_000)
        with lock:
            rounds.append(tid)
        api.region_barrier()

    h = rt.fork_region(rt.root_ctx, 2, member, mode="gang")
    rt.join_region(rt.root_ctx, h)
    assert sorted(rounds) == [0, 1]


def test_release_interrupts_idle_backoff():
    # a deeply backed-off worker must wake promptly when its pinned context
    # is released, not after sleeping out the full idle cap
    cfg = SchedulerConfig(
        n_workers=1, idle_spin=1, idle_sleep_max=0.3, watchdog_timeout=20.0
    )
    rt = Runtime(cfg).start()
    try:
        t0 = time.perf_counter()
        rt.submit_task(rt.root_ctx, lambda: api.simulate_comm(30_000))
        rt.wait_all()
        elapsed = time.perf_counter() - t0
        assert elapsed < 0.2, f"wakeup took {elapsed * 1e3:.0f} ms"
    finally:
        rt.shutdown()


def test_trace_can_be_disabled(make_runtime):
    rt = make_runtime(n_workers=1, trace_enabled=False)
    rt.submit_task(rt.root_ctx, lambda: None)
    rt.wait_all()
    assert rt.tracer.events() == []


def test_pinned_worker_affinity_config_accepted(make_runtime):
    rt = make_runtime(n_workers=2, pin_workers=True)
    rt.submit_task(rt.root_ctx, lambda: None)
    rt.wait_all()


# -- module-level api ----------------------------------------------------------

def test_api_lifecycle_and_double_start():
    rt = api.start_runtime(n_workers=2, use_env=False)
    assert api.active_runtime() is rt
    with pytest.raises(UsageError):
        api.start_runtime(n_workers=2, use_env=False)
    api.stop_runtime()
    api.stop_runtime()  # idempotent
    with pytest.raises(UsageError):
        api.active_runtime()


def test_api_config_and_overrides_are_exclusive():
    with pytest.raises(UsageError):
        api.start_runtime(SchedulerConfig(), n_workers=2)


def test_api_driver_roundtrip():
    api.start_runtime(n_workers=2, use_env=False)
    try:
        done = []
        api.submit_task(lambda: done.append("t"))
        h = api.fork_region(2, lambda tid: done.append(tid), gang=True)
        api.join_region(h)
        api.wait_all()
        assert sorted(done, key=str) == [0, 1, "t"]
    finally:
        api.stop_runtime()


# -- environment knobs ----------------------------------------------------------

def test_resolve_env_gang_toggle():
    base = SchedulerConfig()
    assert resolve_env(base, {"GANG_SCHED": "0"}).gang_sched_default is False
    assert resolve_env(base, {"GANG_SCHED": ""}).gang_sched_default is False
    assert resolve_env(base, {"GANG_SCHED": "1"}).gang_sched_default is True
    assert resolve_env(base, {}).gang_sched_default is base.gang_sched_default


def test_resolve_env_seed():
    base = SchedulerConfig()
    assert resolve_env(base, {"SCHED_SEED": "123"}).seed == 123
    with pytest.raises(ConfigurationError):
        resolve_env(base, {"SCHED_SEED": "not-a-seed"})


def test_start_runtime_reads_environment(monkeypatch):
    monkeypatch.setenv("GANG_SCHED", "0")
    monkeypatch.setenv("SCHED_SEED", "77")
    rt = api.start_runtime(n_workers=1)
    try:
        assert rt.config.gang_sched_default is False
        assert rt.config.seed == 77
    finally:
        api.stop_runtime()


def test_config_validation():
    with pytest.raises(ConfigurationError):
        SchedulerConfig(n_workers=0)
    with pytest.raises(ConfigurationError):
        SchedulerConfig(steal_window=0)
    with pytest.raises(ConfigurationError):
        SchedulerConfig(victim_policy="psychic")
    with pytest.raises(ConfigurationError):
        SchedulerConfig(watchdog_timeout=0)
    with pytest.raises(ConfigurationError):
        SchedulerConfig(queue_order=("normal_q",))
