"""Command-line entry point: ``dagspin <command> ...`` or ``python -m dagspin``.

Exit codes: 0 success or schedulable, 1 unschedulable or failed check,
2 usage, input or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from fractions import Fraction
from pathlib import Path

from .framework import AnalysisError, Verdict
from .harness import SweepSpec, acceptance_ratio, identity_reports, rows_to_csv
from .model import TaskSet, TaskSetError, dump_taskset, load_taskset
from .priority import (
    DEFAULT_PERMUTATION_CAP,
    PermutationCapError,
    analyze_priority,
    partition_priority,
    search_priority_assignment,
)
from .fifo import analyze_fifo, partition_fifo
from .simulator import (
    SimulationError,
    TraceError,
    check_identities,
    decompose_blocking,
    extract_key_path,
    replay_trace,
    simulate,
    write_trace,
)
from .unordered import analyze_unordered, partition_unordered
from .workload import GenConfig, GenerationError, gen_taskset, openmp_taskset, place_all, read_config

ORDERS = ("unordered", "fifo", "priority")


class UsageError(Exception):
    pass


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _m_vector(ts: TaskSet, text: str) -> dict[int, int]:
    vals = _ints(text)
    if len(vals) != len(ts):
        raise UsageError(f"--m lists {len(vals)} values for {len(ts)} tasks")
    return dict(zip(sorted(ts.ids), vals))


def _with_order(ts: TaskSet, args) -> TaskSet:
    if getattr(args, "priority_order", None):
        try:
            return ts.with_priority_order(_ints(args.priority_order))
        except TaskSetError as exc:
            raise UsageError(str(exc)) from None
    return ts


def _fmt(x: Fraction) -> str:
    return str(x) if x.denominator == 1 else f"{x} (~{float(x):.3f})"


def _bound_rows(ts: TaskSet, m: dict[int, int], bounds: dict[int, Fraction]) -> list[dict]:
    return [dict(task=i, m=m.get(i, ""), bound=str(bounds[i]) if i in bounds else "",
                 deadline=ts[i].deadline,
                 ok=(i in bounds and bounds[i] <= ts[i].deadline))
            for i in sorted(ts.ids)]


def _print_rows(rows: list[dict], out):
    if out:
        with open(out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]) if rows else ["task"])
            w.writeheader()
            w.writerows(rows)
    for r in rows:
        print("  ".join(f"{k}={v}" for k, v in r.items()))


def cmd_analyze(args) -> int:
    ts = _with_order(load_taskset(args.taskset), args)
    m = _m_vector(ts, args.m)
    if any(v < 1 for v in m.values()):
        raise UsageError("every task needs at least one processor")
    if args.order == "unordered":
        bounds = analyze_unordered(ts, m)
    elif args.order == "fifo":
        bounds = analyze_fifo(ts, m)
    else:
        if ts.priority_order is None:
            raise UsageError("priority order needed: --priority-order or priority_order in the file")
        bounds = analyze_priority(ts, m)
    rows = _bound_rows(ts, m, bounds)
    _print_rows(rows, args.out)
    ok = all(r["ok"] for r in rows) and sum(m.values()) <= ts.processors
    print(f"{args.order}: {'schedulable' if ok else 'unschedulable'} "
          f"({sum(m.values())} of {ts.processors} processors)")
    return 0 if ok else 1


def _partition(ts: TaskSet, order: str, cap: int) -> Verdict:
    if order == "unordered":
        return partition_unordered(ts)
    if order == "fifo":
        return partition_fifo(ts)
    if ts.priority_order is not None:
        return partition_priority(ts)
    found, verdict = search_priority_assignment(ts, cap)
    return verdict if verdict is not None else partition_priority(ts, sorted(ts.ids))


def cmd_partition(args) -> int:
    ts = _with_order(load_taskset(args.taskset), args)
    v = _partition(ts, args.order, args.cap)
    _print_rows(_bound_rows(ts, v.m, v.bounds), args.out)
    if v.priority_order is not None:
        print("priority order:", ",".join(map(str, v.priority_order)))
    print(v.summary())
    return 0 if v.schedulable else 1


def cmd_search(args) -> int:
    ts = load_taskset(args.taskset)
    order, v = search_priority_assignment(ts, args.cap)
    if order is None:
        print("no schedulable priority order")
        return 1
    print("priority order:", ",".join(map(str, order)))
    print(v.summary())
    return 0


def _job_table(trace, check: bool) -> tuple[list[dict], int]:
    rows, bad = [], 0
    reports = {r.job: r for r in identity_reports(trace)} if check else {}
    for job in trace.completed_jobs():
        rec = trace.jobs[job]
        row = dict(job=f"{job[0]}.{job[1]}", release=rec.release, finish=rec.finish,
                   response=rec.response)
        if job in reports:
            r = reports[job]
            row["identities"] = "ok" if r.ok else "; ".join(r.violations)
            bad += not r.ok
        rows.append(row)
    return rows, bad


def cmd_simulate(args) -> int:
    ts = _with_order(load_taskset(args.taskset), args)
    m = _m_vector(ts, args.m)
    if any(t.placements is None and t.resources for t in ts.tasks):
        ts = place_all(ts, args.seed)
    trace = simulate(ts, m, args.order, args.horizon, seed=args.seed, adversary=args.adversary)
    if args.out:
        write_trace(trace.with_idle(), args.out)
    rows, bad = _job_table(trace, args.check)
    for r in rows:
        print("  ".join(f"{k}={v}" for k, v in r.items()))
    print(f"{len(rows)} completed jobs" + (f", {bad} identity violations" if args.check else ""))
    return 1 if bad else 0


def _report_lines(trace, job) -> tuple[list[str], bool]:
    kp = extract_key_path(trace, job)
    d = decompose_blocking(trace, job, kp)
    r = check_identities(trace, job, kp, d)
    lines = [
        f"job {job[0]}.{job[1]}: release {trace.jobs[job].release} finish {trace.jobs[job].finish}",
        f"  key path {','.join(map(str, kp))}",
        "  blocking key intra/inter {} {}, delay intra/inter {} {}, parallel intra/inter {} {}".format(*d.as_tuple()),
        f"  B {r.blocking}  W {r.working}  idle {r.idle}  area {r.area}",
        f"  len* {r.len_star} (path {r.key_path_length})  idle bound {r.idle_bound}  "
        f"response {r.response} <= {_fmt(r.observed_bound)}",
    ]
    lines += [f"  VIOLATION: {v}" for v in r.violations]
    return lines, r.ok


def cmd_replay(args) -> int:
    ts = load_taskset(args.taskset)
    trace = replay_trace(ts, Path(args.trace))
    ok = True
    jobs = [tuple(_ints(args.job.replace(".", ",")))] if args.job else trace.completed_jobs()
    for job in jobs:
        if job not in trace.jobs or trace.jobs[job].finish is None:
            raise UsageError(f"job {job} is not complete in the trace")
        lines, good = _report_lines(trace, job)
        ok &= good
        print("\n".join(lines))
    if args.out:
        write_trace(trace.intervals, args.out)
    return 0 if ok else 1


def cmd_check_trace(args) -> int:
    ts = load_taskset(args.taskset)
    trace = replay_trace(ts, Path(args.trace))
    rows, bad = _job_table(trace, True)
    for r in rows:
        print("  ".join(f"{k}={v}" for k, v in r.items()))
    print(f"trace consistent; {len(rows)} completed jobs, {bad} identity violations")
    return 1 if bad else 0


def cmd_generate(args) -> int:
    if args.openmp:
        ts = openmp_taskset(args.seed)
    else:
        cfg = GenConfig.from_mapping(read_config(args.config)) if args.config else GenConfig()
        ts = gen_taskset(cfg, args.seed)
    if args.place:
        ts = place_all(ts, args.seed)
    text = dump_taskset(ts, args.out)
    if not args.out:
        print(text)
    return 0


def cmd_sweep(args) -> int:
    spec = SweepSpec.from_file(args.spec)
    if args.seed is not None:
        spec = SweepSpec(spec.axis, spec.values, spec.base, spec.sets_per_point,
                         spec.analyzers, args.seed, spec.permutation_cap)
    if args.sets is not None:
        spec = SweepSpec(spec.axis, spec.values, spec.base, args.sets,
                         spec.analyzers, spec.seed, spec.permutation_cap)
    text = rows_to_csv(acceptance_ratio(spec, args.workers), args.out)
    if not args.out:
        print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dagspin", description=(
        "Response-time analysis, partitioning and simulation of parallel DAG tasks "
        "sharing spin locks under federated scheduling."))
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(fn=fn)
        sp.add_argument("--seed", type=int, default=0 if name != "sweep" else None,
                        help="random seed (default 0)")
        return sp

    sp = add("analyze", cmd_analyze, "bound every task for a given processor vector")
    sp.add_argument("taskset")
    sp.add_argument("--order", choices=ORDERS, required=True)
    sp.add_argument("--m", required=True, help="processors per task in id order, e.g. 3,2,4")
    sp.add_argument("--priority-order", help="task ids, highest priority first")
    sp.add_argument("--out", help="also write the table as CSV")

    sp = add("partition", cmd_partition, "assign processors with the order's algorithm")
    sp.add_argument("taskset")
    sp.add_argument("--order", choices=ORDERS, required=True)
    sp.add_argument("--priority-order", help="fixed priority order; searched when absent")
    sp.add_argument("--cap", type=int, default=DEFAULT_PERMUTATION_CAP)
    sp.add_argument("--out")

    sp = add("search-priorities", cmd_search, "find a schedulable priority order")
    sp.add_argument("taskset")
    sp.add_argument("--cap", type=int, default=DEFAULT_PERMUTATION_CAP)

    sp = add("simulate", cmd_simulate, "simulate and optionally write the trace")
    sp.add_argument("taskset")
    sp.add_argument("--order", choices=ORDERS, required=True)
    sp.add_argument("--m", required=True)
    sp.add_argument("--priority-order")
    sp.add_argument("--horizon", type=int)
    sp.add_argument("--adversary", type=int, help="unordered only: grant to hurt this task")
    sp.add_argument("--check", action="store_true", help="check trace identities per job")
    sp.add_argument("--out", help="trace CSV path")

    sp = add("replay", cmd_replay, "replay a schedule script and report blocking")
    sp.add_argument("trace")
    sp.add_argument("--taskset", required=True)
    sp.add_argument("--job", help="task.index; default every completed job")
    sp.add_argument("--out", help="write the normalized trace")

    sp = add("check-trace", cmd_check_trace, "validate a trace and its identities")
    sp.add_argument("trace")
    sp.add_argument("--taskset", required=True)

    sp = add("generate", cmd_generate, "generate a task set as JSON")
    sp.add_argument("--config", help="key=value generator config")
    sp.add_argument("--openmp", action="store_true", help="draw from the bundled OpenMP programs")
    sp.add_argument("--place", action="store_true", help="add request placements")
    sp.add_argument("--out")

    sp = add("sweep", cmd_sweep, "acceptance-ratio sweep to CSV")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--sets", type=int, help="override sets per point")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (UsageError, TaskSetError, TraceError, SimulationError, GenerationError,
            PermutationCapError, AnalysisError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
