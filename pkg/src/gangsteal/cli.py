"""`bench` command line: factorization-shaped benchmark runs and stress sweeps.

    bench run --kernel chol --workers 8 --policy hybrid --repeats 6
    bench run --kernel lu --gang naive --watchdog 2 --trace /tmp/t.jsonl
    bench stress --seeds 0:100
    bench stress --wedge-demo

Exit codes: 0 success, 2 a run was aborted by the deadlock watchdog,
1 output files could not be written.  GANG_SCHED and SCHED_SEED in the
environment override the corresponding config fields.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import asdict

from .config import SchedulerConfig, resolve_env
from .metrics import flat_row
from .stress import run_program, run_wedge_demo
from .trace import write_jsonl, write_summary_csv
from .workloads import (
    KERNELS,
    WorkloadSpec,
    run_workload,
    run_workload_traced,
)

_KERNEL_ALIASES = {"lu": "lu_like", "qr": "qr_like", "chol": "cholesky_like"}


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bench", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    run = sub.add_parser("run", help="run one workload, repeats+1 times (first is warm-up)")
    run.add_argument("--kernel", choices=sorted(_KERNEL_ALIASES), default="lu")
    run.add_argument("--workers", type=int, default=4)
    run.add_argument("--policy", choices=("hybrid", "history", "random"), default="hybrid")
    run.add_argument("--gang", choices=("on", "off", "naive"), default="on")
    run.add_argument("--tiles", type=int, default=4, help="tiles per panel (trailing fan-out is tiles^2)")
    run.add_argument("--panel-team", type=int, default=4)
    run.add_argument("--panel-steps", type=int, default=3)
    run.add_argument("--comm-latency-us", type=float, default=400.0)
    run.add_argument("--compute-us", type=float, default=120.0)
    run.add_argument("--block-cols", type=int, default=6)
    run.add_argument("--lookahead", type=int, default=1)
    run.add_argument("--window", type=int, default=8, help="victim history window")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--repeats", type=int, default=6)
    run.add_argument("--watchdog", type=float, default=30.0)
    run.add_argument("--trace", metavar="PATH", help="write the last run's event trace (JSONL)")
    run.add_argument("--summary", metavar="PATH", help="write one CSV row per aggregated run")

    st = sub.add_parser("stress", help="randomized nested fork/join programs")
    st.add_argument("--seeds", default="0:20", help="seed range lo:hi (half-open)")
    st.add_argument("--naive", action="store_true", help="disable the eligibility check")
    st.add_argument("--watchdog", type=float, default=None,
                    help="seconds without progress before abort (default 30, demo 0.45)")
    st.add_argument("--wedge-demo", action="store_true",
                    help="canned run that reliably deadlocks with the check off")
    return p


def _cmd_run(args) -> int:
    spec = WorkloadSpec(
        kernel=_KERNEL_ALIASES[args.kernel],
        n_block_cols=args.block_cols,
        tiles_per_panel=args.tiles,
        panel_team_size=args.panel_team,
        panel_steps=args.panel_steps,
        compute_cost_us=args.compute_us,
        comm_latency_us=args.comm_latency_us,
        lookahead_depth=args.lookahead,
        gang_panels=args.gang != "off",
        victim_policy=args.policy,
    )
    config = resolve_env(SchedulerConfig(
        n_workers=args.workers,
        steal_window=args.window,
        victim_policy=args.policy,
        eligibility_enabled=args.gang != "naive",
        seed=args.seed,
        watchdog_timeout=args.watchdog,
    ))

    rows = []
    runs = []
    events = None
    run_workload(spec, config)  # warm-up, not aggregated
    for i in range(args.repeats):
        if args.trace and i == args.repeats - 1:
            metrics, events = run_workload_traced(spec, config)
        else:
            metrics = run_workload(spec, config)
        runs.append(metrics)
        rows.append(flat_row(
            metrics,
            run=i,
            kernel=spec.kernel,
            workers=config.n_workers,
            policy=spec.victim_policy,
            gang=args.gang,
        ))

    makespans = sorted(r.makespan_s for r in runs)
    median = makespans[len(makespans) // 2]
    overlap = sorted(r.overlap_ratio for r in runs)[len(runs) // 2]
    deadlocked = any(r.deadlock_detected for r in runs)
    print(f"kernel={spec.kernel} workers={config.n_workers} policy={spec.victim_policy} "
          f"gang={args.gang} runs={len(runs)}")
    print(f"median makespan {median * 1e3:.2f} ms  median overlap {overlap:.3f}  "
          f"deadlock={'yes' if deadlocked else 'no'}")

    try:
        if args.summary:
            write_summary_csv(rows, args.summary)
        if args.trace and events is not None:
            header = {"spec": asdict(spec), "workers": config.n_workers, "gang": args.gang}
            write_jsonl(events, args.trace, header=header)
    except OSError as exc:
        print(f"bench: cannot write output: {exc}", file=sys.stderr)
        return 1
    return 2 if deadlocked else 0


def _cmd_stress(args) -> int:
    if args.wedge_demo:
        # The demo exists to show what the admission check prevents, so it
        # always runs with the check off.
        completed, _ = run_wedge_demo(naive=True, watchdog=args.watchdog or 0.45)
        print("wedge demo:", "completed" if completed else "deadlocked (caught by watchdog)")
        return 0 if completed else 2
    try:
        lo, hi = (int(x) for x in args.seeds.split(":"))
    except ValueError:
        print(f"bench: bad --seeds {args.seeds!r}, expected lo:hi", file=sys.stderr)
        return 1
    wedged = []
    for seed in range(lo, hi):
        completed, _ = run_program(seed, naive=args.naive, watchdog=args.watchdog or 30.0)
        if not completed:
            wedged.append(seed)
        print(f"seed {seed}: {'ok' if completed else 'DEADLOCK'}", flush=True)
    print(f"{hi - lo} programs, {len(wedged)} deadlocked", (wedged if wedged else ""))
    return 2 if wedged else 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.cmd == "run":
        return _cmd_run(args)
    return _cmd_stress(args)


if __name__ == "__main__":
    sys.exit(main())
