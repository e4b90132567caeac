"""Scratch: parameter search for the two directional benchmark comparisons."""
import statistics
import sys
import time

sys.path.insert(0, "src")
from gangsteal.config import SchedulerConfig
from gangsteal.workloads import WorkloadSpec, run_workload


def paired(kern, variants, n=6, seed0=0, workers=8, **kw):
    """variants: {label: dict(victim_policy=..., gang_panels=...)}"""
    out = {label: [] for label in variants}
    t0 = time.time()
    for i in range(n + 1):  # +1 warm-up pair, dropped below
        for label, v in variants.items():
            spec = WorkloadSpec(kernel=kern, **v, **kw)
            cfg = SchedulerConfig(n_workers=workers, seed=i, watchdog_timeout=15.0)
            out[label].append(run_workload(spec, cfg))
    for label in variants:
        out[label] = out[label][1:]
    return out, time.time() - t0


def report(tag, out, a, b, wall):
    ma = [m.makespan_s for m in out[a]]
    mb = [m.makespan_s for m in out[b]]
    oa = [m.overlap_ratio for m in out[a]]
    ob = [m.overlap_ratio for m in out[b]]
    wins_mk = sum(x <= y for x, y in zip(ma, mb))
    wins_ov = sum(x >= y for x, y in zip(oa, ob))
    print(f"{tag}: med_mk {a}={statistics.median(ma)*1e3:.1f}ms {b}={statistics.median(mb)*1e3:.1f}ms "
          f"| med_ov {a}={statistics.median(oa):.3f} {b}={statistics.median(ob):.3f} "
          f"| paired mk {wins_mk}/6 ov {wins_ov}/6 | {wall:.1f}s", flush=True)


if __name__ == "__main__":
    which = sys.argv[1] if len(sys.argv) > 1 else "c6"
    if which == "c6":
        for tiles, cols, comp, steps in [(4, 8, 100, 2), (5, 8, 80, 2), (4, 6, 150, 3)]:
            out, wall = paired(
                "cholesky_like",
                {"hybrid": dict(victim_policy="hybrid"),
                 "history": dict(victim_policy="history")},
                workers=8, n_block_cols=cols, tiles_per_panel=tiles,
                panel_team_size=4, panel_steps=steps,
                compute_cost_us=comp, comm_latency_us=10 * comp,
            )
            report(f"c6 t{tiles} c{cols} comp{comp} s{steps}", out, "hybrid", "history", wall)
    else:
        for tiles, cols, comp, steps, team in [(3, 6, 100, 4, 6), (4, 6, 120, 3, 8), (3, 8, 80, 6, 6)]:
            out, wall = paired(
                "lu_like",
                {"gang_on": dict(victim_policy="hybrid", gang_panels=True),
                 "gang_off": dict(victim_policy="hybrid", gang_panels=False)},
                workers=8, n_block_cols=cols, tiles_per_panel=tiles,
                panel_team_size=team, panel_steps=steps,
                compute_cost_us=comp, comm_latency_us=4 * comp,
            )
            report(f"c7 t{tiles} c{cols} comp{comp} s{steps} team{team}", out, "gang_on", "gang_off", wall)
