"""Throwaway smoke drive of the engine (deleted before delivery)."""
import sys
import time

import gangsteal as gs

# 1. plain tasks with deps
rt = gs.start_runtime(n_workers=4, seed=1, watchdog_timeout=5.0, use_env=False)
order = []


def mk(name):
    def body():
        order.append(name)
    return body

gs.submit_task(mk("a"), out_keys=[gs.key("x")])
gs.submit_task(mk("b"), in_keys=[gs.key("x")], out_keys=[gs.key("y")])
gs.submit_task(mk("c"), in_keys=[gs.key("y")])
gs.wait_all()
assert order == ["a", "b", "c"], order
print("tasks ok:", order)

# 2. steal-mode region with barriers
hits = []


def member(tid):
    hits.append(("r1", tid, "a"))
    gs.region_barrier()
    hits.append(("r1", tid, "b"))

h = gs.fork_region(3, member, gang=False, name="r1")
gs.join_region(h)
phase_a = [x for x in hits if x[2] == "a"]
phase_b = [x for x in hits if x[2] == "b"]
assert len(phase_a) == 3 and len(phase_b) == 3
assert max(hits.index(x) for x in phase_a) < min(hits.index(x) for x in phase_b)
print("steal region ok")

# 3. gang-mode region with comm + barrier rounds
marks = []


def gmember(tid):
    for r in range(3):
        gs.simulate_comm(200)
        marks.append((tid, r))
        gs.region_barrier()

h = gs.fork_region(4, gmember, gang=True, name="g1")
gs.join_region(h)
assert len(marks) == 12, marks
print("gang region ok")

# 4. nested: member forks a child gang region
log = []


def inner(tid):
    log.append(("inner", tid))


def outer(tid):
    log.append(("outer", tid))
    if tid == 0:
        hh = gs.fork_region(2, inner, gang=True, name="g2.child")
        gs.join_region(hh)
    gs.region_barrier()
    log.append(("outer2", tid))

h = gs.fork_region(3, outer, gang=True, name="g2")
gs.join_region(h)
assert len([x for x in log if x[0] == "inner"]) == 2
assert len([x for x in log if x[0] == "outer2"]) == 3
print("nested gang ok")

# 5. region tasks drain at the closing join
seen = []


def tmember(tid):
    for i in range(4):
        gs.submit_task(lambda i=i, tid=tid: seen.append((tid, i)))

h = gs.fork_region(2, tmember, gang=False, name="rt1")
gs.join_region(h)
assert len(seen) == 8, seen
print("region tasks ok")

# 6. task that forks+joins a region (suspend/detach/resume path)
res = []


def driver():
    hh = gs.fork_region(2, lambda tid: res.append(tid), gang=True, name="g3")
    gs.join_region(hh)
    res.append("joined")

gs.submit_task(driver)
gs.wait_all()
assert sorted(res[:2]) == [0, 1] and res[2] == "joined", res
print("task fork/join ok")

# 7. comm from a task (detach + timer + resume)
tres = []


def commy():
    t0 = time.perf_counter()
    gs.simulate_comm(5000)
    tres.append(time.perf_counter() - t0)

gs.submit_task(commy)
gs.wait_all()
assert tres and tres[0] >= 0.005, tres
print(f"task comm ok ({tres[0]*1e3:.2f} ms)")

met = rt.steal_counts()
print("steals:", met)
gs.stop_runtime()
print("SMOKE OK")
sys.exit(0)
