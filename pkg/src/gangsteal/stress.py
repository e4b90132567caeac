"""Randomized nested-gang stress programs.

Each seed deterministically expands into a small program that forks several
same-nest gangs concurrently, runs multi-round barriers with jittered
communication pauses, and sometimes forks nested child gangs from inside a
member.  With eligibility checking enabled these always complete; with the
check disabled ("naive" adoption) some interleavings stack two gangs in
opposite orders on two workers and wedge — which is the point of keeping
this module around.

Two generators live here:

* `make_shape` — the small flat family (2-3 sibling gangs, occasional
  one-level children).  Individual seeds from this family wedge a naive
  scheduler with high probability; `run_wedge_demo` chains several of them
  in one process so that the demonstration is reliable rather than merely
  likely.
* `make_program` — the wide family used for soak testing: nesting up to six
  gang levels deep, 1-8 barrier rounds per region, team sizes up to the
  worker count, on 2/4/8 workers.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from . import api
from .config import SchedulerConfig
from .errors import DeadlockError
from .runtime import Runtime

MAX_NEST_DEPTH = 6
MAX_GANGS_PER_PROGRAM = 10
WORKER_CHOICES = (2, 4, 8)

# Flat shapes whose single-run wedge probability under naive adoption was
# measured highest; run_wedge_demo cycles through them.
WEDGE_SEEDS = (16, 0, 17)


@dataclass(frozen=True, slots=True)
class StressShape:
    """Size knobs for one generated flat program."""

    n_gangs: int
    teams: tuple[int, ...]
    rounds: tuple[int, ...]
    comm_us: tuple[tuple[tuple[float, ...], ...], ...]  # [gang][tid][round]
    children: tuple[tuple[int, ...], ...]  # (gang, tid) pairs that fork a child


def make_shape(seed: int, n_workers: int) -> StressShape:
    rng = random.Random(seed)
    n_gangs = rng.randint(2, 3)
    teams = tuple(rng.randint(2, min(3, n_workers)) for _ in range(n_gangs))
    rounds = tuple(rng.randint(2, 4) for _ in range(n_gangs))
    comm_us = tuple(
        tuple(
            tuple(rng.uniform(100.0, 600.0) for _ in range(rounds[g]))
            for _ in range(teams[g])
        )
        for g in range(n_gangs)
    )
    children = []
    for g in range(n_gangs):
        for tid in range(teams[g]):
            if rng.random() < 0.35:
                children.append((g, tid))
    return StressShape(n_gangs, teams, rounds, comm_us, tuple(children))


def _child_body(tid: int) -> None:
    api.simulate_comm(120.0)
    api.region_barrier()


def run_stress(
    seed: int,
    n_workers: int = 3,
    naive: bool = False,
    watchdog: float = 5.0,
    victim_policy: str = "hybrid",
) -> tuple[bool, Runtime]:
    """Run one flat generated program; returns (completed, runtime).

    `completed` is False when the watchdog declared the run wedged.  The
    runtime is already shut down when this returns; inspect its trace,
    counters, and `deadlock_detected` flag.
    """
    shape = make_shape(seed, n_workers)
    cfg = SchedulerConfig(
        n_workers=n_workers,
        seed=seed,
        eligibility_enabled=not naive,
        watchdog_timeout=watchdog,
        victim_policy=victim_policy,
    )
    rt = Runtime(cfg).start()
    completed = True
    try:
        handles = []
        for g in range(shape.n_gangs):
            body = _gang_body(shape, g)
            handles.append(
                rt.fork_region(rt.root_ctx, shape.teams[g], body, mode="gang", name=f"sg{g}")
            )
        for h in handles:
            rt.join_region(rt.root_ctx, h)
    except DeadlockError:
        completed = False
    finally:
        rt.shutdown()
    return completed, rt


def _gang_body(shape: StressShape, g: int):
    def body(tid: int) -> None:
        for r in range(shape.rounds[g]):
            api.simulate_comm(shape.comm_us[g][tid][r])
            if (g, tid) in shape.children and r == 0:
                h = api.fork_region(2, _child_body, gang=True, name=f"sg{g}.c{tid}")
                api.join_region(h)
            api.region_barrier()
    return body


def run_wedge_demo(
    *,
    naive: bool = True,
    batches: int = 9,
    watchdog: float = 0.45,
    victim_policy: str = "hybrid",
) -> tuple[bool, Runtime]:
    """Chain several wedge-prone flat programs in one runtime.

    Under naive adoption each batch independently has a high chance of
    freezing (two same-nest gangs buried in opposite orders on two workers);
    the first frozen batch blocks the driver, the watchdog trips, and the
    whole run reports a deadlock.  With eligibility checking on, every batch
    completes.  Returns (completed, runtime); the runtime is shut down.

    The demonstration only amplifies reachability — every reported wedge is
    a genuinely frozen state (no runnable work, no pending timers) caught by
    the no-progress watchdog, never a timing artifact of the watchdog
    itself.
    """
    cfg = SchedulerConfig(
        n_workers=3,
        seed=WEDGE_SEEDS[0],
        eligibility_enabled=not naive,
        watchdog_timeout=watchdog,
        victim_policy=victim_policy,
    )
    rt = Runtime(cfg).start()
    completed = True
    try:
        for b in range(batches):
            shape = make_shape(WEDGE_SEEDS[b % len(WEDGE_SEEDS)], cfg.n_workers)
            handles = [
                rt.fork_region(
                    rt.root_ctx, shape.teams[g], _gang_body(shape, g),
                    mode="gang", name=f"b{b}.sg{g}",
                )
                for g in range(shape.n_gangs)
            ]
            for h in handles:
                rt.join_region(rt.root_ctx, h)
    except DeadlockError:
        completed = False
    finally:
        rt.shutdown()
    return completed, rt


@dataclass(frozen=True, slots=True)
class GangSpec:
    """One region in a generated nested program."""

    team: int
    rounds: int
    comm_us: tuple[tuple[float, ...], ...]  # [tid][round]; 0.0 skips the pause
    # (tid, round, join_after_barrier, child): forked just before that
    # round's barrier; joined either immediately or after the barrier.
    children: tuple[tuple[int, int, bool, "GangSpec"], ...]


@dataclass(frozen=True, slots=True)
class ProgramSpec:
    n_workers: int
    gangs: tuple[GangSpec, ...]

    def total_gangs(self) -> int:
        def count(g: GangSpec) -> int:
            return 1 + sum(count(c) for _, _, _, c in g.children)

        return sum(count(g) for g in self.gangs)

    def max_depth(self) -> int:
        def depth(g: GangSpec) -> int:
            return 1 + max((depth(c) for _, _, _, c in g.children), default=0)

        return max(depth(g) for g in self.gangs)


def _make_gang(rng: random.Random, n_workers: int, depth: int, budget: list[int]) -> GangSpec:
    budget[0] -= 1
    team = min(n_workers, rng.choice((1, 2, 2, 3, 3, 4, n_workers)))
    rounds = rng.randint(1, 8)
    comm_us = tuple(
        tuple(
            0.0 if rng.random() < 0.25 else rng.uniform(30.0, 280.0)
            for _ in range(rounds)
        )
        for _ in range(team)
    )
    children = []
    if depth < MAX_NEST_DEPTH and budget[0] > 0:
        for _ in range(rng.choice((0, 0, 0, 0, 1, 1, 2))):
            if budget[0] <= 0:
                break
            tid = rng.randrange(team)
            rnd = rng.randrange(rounds)
            join_late = rng.random() < 0.4
            children.append((tid, rnd, join_late, _make_gang(rng, n_workers, depth + 1, budget)))
    return GangSpec(team, rounds, comm_us, tuple(children))


def _make_chain(rng: random.Random, n_workers: int, depth: int) -> GangSpec:
    """A deliberate maximum-depth chain: each level forks exactly one child."""
    team = min(n_workers, 2)
    rounds = rng.randint(1, 2)
    comm_us = tuple(
        tuple(rng.uniform(30.0, 120.0) for _ in range(rounds)) for _ in range(team)
    )
    children: tuple = ()
    if depth < MAX_NEST_DEPTH:
        children = ((0, 0, rng.random() < 0.4, _make_chain(rng, n_workers, depth + 1)),)
    return GangSpec(team, rounds, comm_us, children)


def make_program(seed: int, n_workers: int | None = None) -> ProgramSpec:
    """Expand a seed into a nested-gang program.

    Nesting reaches up to MAX_NEST_DEPTH gang levels, regions run 1-8
    barrier rounds, and team sizes never exceed the worker count.
    """
    rng = random.Random(seed)
    nw = n_workers if n_workers is not None else rng.choice(WORKER_CHOICES)
    if rng.random() < 0.2:
        return ProgramSpec(nw, (_make_chain(rng, nw, 1),))
    budget = [MAX_GANGS_PER_PROGRAM]
    n_top = rng.randint(1, 3)
    gangs = tuple(_make_gang(rng, nw, 1, budget) for _ in range(n_top) if budget[0] > 0)
    if not gangs:  # budget exhausted on the first call can't happen, but stay safe
        gangs = (_make_gang(rng, nw, 1, [1]),)
    return ProgramSpec(nw, gangs)


def _spec_body(spec: GangSpec, label: str):
    def body(tid: int) -> None:
        pending = []
        for r in range(spec.rounds):
            us = spec.comm_us[tid][r]
            if us > 0.0:
                api.simulate_comm(us)
            for ctid, crnd, join_late, child in spec.children:
                if ctid == tid and crnd == r:
                    h = api.fork_region(
                        child.team, _spec_body(child, f"{label}.{tid}.{r}"),
                        gang=True, name=f"{label}.{tid}.{r}",
                    )
                    if join_late:
                        pending.append(h)
                    else:
                        api.join_region(h)
            api.region_barrier()
            while pending:
                api.join_region(pending.pop())
    return body


def run_program(
    seed: int,
    *,
    n_workers: int | None = None,
    naive: bool = False,
    watchdog: float = 30.0,
    victim_policy: str = "hybrid",
) -> tuple[bool, Runtime]:
    """Run one nested generated program; returns (completed, runtime)."""
    spec = make_program(seed, n_workers)
    cfg = SchedulerConfig(
        n_workers=spec.n_workers,
        seed=seed,
        eligibility_enabled=not naive,
        watchdog_timeout=watchdog,
        victim_policy=victim_policy,
    )
    rt = Runtime(cfg).start()
    completed = True
    try:
        handles = [
            rt.fork_region(rt.root_ctx, g.team, _spec_body(g, f"g{i}"), mode="gang", name=f"g{i}")
            for i, g in enumerate(spec.gangs)
        ]
        for h in handles:
            rt.join_region(rt.root_ctx, h)
    except DeadlockError:
        completed = False
    finally:
        rt.shutdown()
    return completed, rt
