"""Acceptance-ratio sweeps and bound-versus-simulation campaigns.

Every generated task set is identified by ``(seed, set index)`` only. The
swept knob never enters the seed, so point ``k`` of a sweep sees the same
graphs at every axis value and analyzers are compared on identical inputs.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .fifo import partition_fifo
from .framework import Verdict
from .model import TaskSet, dump_taskset
from .priority import DEFAULT_PERMUTATION_CAP, partition_priority, search_priority_assignment
from .simulator import (
    IdentityReport,
    check_identities,
    decompose_blocking,
    extract_key_path,
    isolated_jobs,
    simulate,
    write_trace,
)
from .unordered import partition_unordered
from .workload import (
    GenConfig,
    GenerationError,
    PlacementError,
    gen_taskset,
    place_all,
    read_config,
)

ANALYZERS = ("XU-U", "XU-F", "XU-P")
ORDER_OF = {"XU-U": "unordered", "XU-F": "fifo", "XU-P": "priority"}
AXES = {
    "u_norm": "u_norm",
    "total_accesses": "total_accesses",
    "resource_types": "resource_types",
    "max_hold": "max_hold",
    "task_count": "n_tasks",
}
CSV_FIELDS = ("axis", "value", "analyzer", "accepted", "total", "ratio")
GEN_FAILED = "generation-failed"


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    base: GenConfig = field(default_factory=GenConfig)
    sets_per_point: int = 100
    analyzers: tuple[str, ...] = ANALYZERS
    seed: int = 0
    permutation_cap: int = DEFAULT_PERMUTATION_CAP

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown axis {self.axis!r}; choose from {sorted(AXES)}")
        vals = [Fraction(str(v)) for v in self.values]
        if not vals or any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("axis values must be non-empty and strictly increasing")
        if self.sets_per_point < 1:
            raise ValueError("sets_per_point must be at least 1")
        bad = set(self.analyzers) - set(ANALYZERS)
        if bad:
            raise ValueError(f"unknown analyzers {sorted(bad)}")

    def config_at(self, value) -> GenConfig:
        name = AXES[self.axis]
        if name == "u_norm":
            return replace(self.base, u_norm=Fraction(str(value)))
        v = int(value)
        return replace(self.base, **{name: (v, v)})

    @classmethod
    def from_file(cls, source: str | Path) -> "SweepSpec":
        """Load a key=value spec; keys other than the sweep's own go to GenConfig."""
        raw = read_config(source)
        own = {}
        for key in ("axis", "values", "sets_per_point", "analyzers", "seed", "permutation_cap"):
            if key in raw:
                own[key] = raw.pop(key)
        if "axis" not in own or "values" not in own:
            raise ValueError("sweep spec needs 'axis' and 'values'")
        return cls(
            axis=own["axis"],
            values=tuple(v.strip() for v in own["values"].split(",") if v.strip()),
            base=GenConfig.from_mapping(raw),
            sets_per_point=int(own.get("sets_per_point", 100)),
            analyzers=tuple(a.strip() for a in own.get("analyzers", ",".join(ANALYZERS)).split(",")),
            seed=int(own.get("seed", 0)),
            permutation_cap=int(own.get("permutation_cap", DEFAULT_PERMUTATION_CAP)),
        )


def run_analyzer(name: str, ts: TaskSet, cap: int = DEFAULT_PERMUTATION_CAP) -> Verdict | None:
    """The analyzer's verdict, or None for XU-P above the permutation cap.

    XU-P searches priority orders; an unschedulable result carries the
    verdict of the identity order.
    """
    if name == "XU-U":
        return partition_unordered(ts)
    if name == "XU-F":
        return partition_fifo(ts)
    if name == "XU-P":
        if len(ts) > cap:
            return None
        order, verdict = search_priority_assignment(ts, cap)
        if verdict is None:
            return partition_priority(ts, sorted(ts.ids))
        return verdict
    raise ValueError(f"unknown analyzer {name!r}")


def evaluate_set(spec: SweepSpec, value, index: int) -> dict[str, bool | None] | None:
    """Per-analyzer acceptance for one task set; None if generation failed."""
    try:
        ts = gen_taskset(spec.config_at(value), (spec.seed, index))
    except GenerationError:
        return None
    out = {}
    for a in spec.analyzers:
        v = run_analyzer(a, ts, spec.permutation_cap)
        out[a] = None if v is None else v.schedulable
    return out


def _evaluate_job(args):
    return evaluate_set(*args)


def evaluate_point(spec: SweepSpec, value, workers: int = 1) -> list[dict | None]:
    jobs = [(spec, value, k) for k in range(spec.sets_per_point)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_evaluate_job, jobs, chunksize=4))
    return [_evaluate_job(j) for j in jobs]


def acceptance_ratio(spec: SweepSpec, workers: int = 1) -> list[dict]:
    """One CSV row per (axis value, analyzer), plus a row counting failed generations.

    A point where XU-P would exceed the permutation cap is recorded as
    ``skipped``.
    """
    rows = []
    for value in spec.values:
        results = evaluate_point(spec, value, workers)
        ok = [r for r in results if r is not None]
        for a in spec.analyzers:
            if any(r[a] is None for r in ok):
                rows.append(dict(axis=spec.axis, value=str(value), analyzer=a,
                                 accepted=0, total=0, ratio="skipped"))
                continue
            acc = sum(bool(r[a]) for r in ok)
            ratio = f"{acc / len(ok):.4f}" if ok else "nan"
            rows.append(dict(axis=spec.axis, value=str(value), analyzer=a,
                             accepted=acc, total=len(ok), ratio=ratio))
        failed = len(results) - len(ok)
        if failed:
            rows.append(dict(axis=spec.axis, value=str(value), analyzer=GEN_FAILED,
                             accepted=failed, total=len(results),
                             ratio=f"{failed / len(results):.4f}"))
    return rows


def rows_to_csv(rows: Iterable[dict], out: str | Path | None = None) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    text = buf.getvalue()
    if out is not None:
        Path(out).write_text(text)
    return text


# --- simulation campaigns ---------------------------------------------------------------

@dataclass
class Violation:
    kind: str  # bound | identity
    order: str
    set_index: int
    sim_seed: int
    job: tuple[int, int]
    detail: str
    bundle: str | None = None


@dataclass
class CampaignReport:
    pairs: int = 0
    runs: int = 0
    jobs_checked: int = 0
    identity_jobs: int = 0
    generation_failures: int = 0
    placement_failures: int = 0
    max_tightness: dict[str, float] = field(default_factory=dict)
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        tight = ", ".join(f"{k} {v:.3f}" for k, v in sorted(self.max_tightness.items()))
        return (f"{self.pairs} schedulable (set, order) pairs, {self.runs} runs, "
                f"{self.jobs_checked} jobs against bounds, {self.identity_jobs} jobs "
                f"identity-checked, {len(self.violations)} violations; max observed/bound: {tight}")


def _write_bundle(root: Path, name: str, ts: TaskSet, trace, reports: Sequence[str]) -> str:
    d = root / name
    d.mkdir(parents=True, exist_ok=True)
    dump_taskset(ts, d / "taskset.json")
    write_trace(trace.with_idle(), d / "trace.csv")
    (d / "report.txt").write_text("\n".join(reports) + "\n")
    return str(d)


def identity_reports(trace) -> list[IdentityReport]:
    """Identity checks on every completed job not overlapping its own task's other jobs."""
    out = []
    for job in isolated_jobs(trace):
        kp = extract_key_path(trace, job)
        out.append(check_identities(trace, job, kp, decompose_blocking(trace, job, kp)))
    return out


def soundness_campaign(config: GenConfig, sets: int, seeds: int = 10,
                       orders: Sequence[str] = ("unordered", "fifo", "priority"),
                       horizon: int | None = None, seed: int = 0,
                       adversarial: bool = True, bundle_dir: str | Path | None = None,
                       cap: int = DEFAULT_PERMUTATION_CAP) -> CampaignReport:
    """Simulate every analyzer-schedulable task set and compare with its bounds.

    Each simulation seed also redraws the request placement. Under
    ``unordered``, odd seeds use the adversarial grant mode aimed at task
    ``seed % n`` when ``adversarial`` is set.
    """
    rep = CampaignReport()
    analyzer = {v: k for k, v in ORDER_OF.items()}
    for k in range(sets):
        try:
            ts = gen_taskset(config, (seed, k))
        except GenerationError:
            rep.generation_failures += 1
            continue
        for order in orders:
            verdict = run_analyzer(analyzer[order], ts, cap)
            if verdict is None or not verdict.schedulable:
                continue
            rep.pairs += 1
            base = ts.with_priority_order(verdict.priority_order) if order == "priority" else ts
            for s in range(seeds):
                try:
                    placed = place_all(base, (seed, k, s))
                except PlacementError:
                    rep.placement_failures += 1
                    continue
                adv = None
                if order == "unordered" and adversarial and s % 2:
                    adv = sorted(ts.ids)[s % len(ts)]
                trace = simulate(placed, verdict.m, order, horizon, seed=s, adversary=adv)
                rep.runs += 1
                problems = []
                for job in trace.completed_jobs():
                    rec = trace.jobs[job]
                    bound = verdict.bounds[job[0]]
                    rep.jobs_checked += 1
                    ratio = float(Fraction(rec.response) / bound) if bound else 0.0
                    rep.max_tightness[order] = max(rep.max_tightness.get(order, 0.0), ratio)
                    if rec.response > bound:
                        problems.append(Violation("bound", order, k, s, job,
                                                  f"response {rec.response} > bound {bound}"))
                for r in identity_reports(trace):
                    rep.identity_jobs += 1
                    if not r.ok:
                        problems.append(Violation("identity", order, k, s, r.job,
                                                  "; ".join(r.violations)))
                if problems and bundle_dir is not None:
                    path = _write_bundle(Path(bundle_dir), f"{order}-set{k}-seed{s}", placed,
                                         trace, [f"{p.kind} {p.job}: {p.detail}" for p in problems])
                    for p in problems:
                        p.bundle = path
                rep.violations.extend(problems)
    return rep


def report_to_json(rep: CampaignReport) -> str:
    return json.dumps({
        "pairs": rep.pairs, "runs": rep.runs, "jobs_checked": rep.jobs_checked,
        "identity_jobs": rep.identity_jobs, "generation_failures": rep.generation_failures,
        "placement_failures": rep.placement_failures,
        "max_tightness": rep.max_tightness,
        "violations": [vars(v) for v in rep.violations],
    }, indent=1, default=str)


SIM_CONFIG = GenConfig(vertices=(10, 25), wcet=(5, 30), edge_prob=0.15, n_tasks=(2, 4),
                       resource_types=(1, 3), total_accesses=(8, 32), max_hold=(1, 6),
                       u_norm=Fraction(1, 5))
"""Small graphs and light locking: many sets pass every analyzer and simulate fast."""

FUZZ_CONFIG = GenConfig(vertices=(6, 20), wcet=(3, 20), edge_prob=0.15, n_tasks=(2, 4),
                        resource_types=(1, 2), total_accesses=(40, 120), max_hold=(3, 12))
"""Heavy contention on small graphs, for exercising the trace identities."""


@dataclass
class FuzzReport:
    runs: int = 0
    jobs: int = 0
    skipped: int = 0
    by_mode: dict[str, int] = field(default_factory=dict)
    failures: list[tuple[str, int, IdentityReport]] = field(default_factory=list)


def identity_fuzz(config: GenConfig, sets: int, seed: int = 0, max_cluster: int = 4,
                  horizon: int | None = None) -> FuzzReport:
    """Check trace identities on random clusters, schedulable or not.

    Each set is run under fifo, priority (random order), random unordered
    and adversarial unordered grants. Cluster sizes are drawn in
    ``[1, max_cluster]`` so heavy contention and overload both occur.
    """
    rep = FuzzReport()
    for k in range(sets):
        try:
            ts = place_all(gen_taskset(config, (seed, k)), (seed, k))
        except GenerationError:
            rep.skipped += 1
            continue
        rng = np.random.default_rng([seed, k, 99])
        m = {i: int(rng.integers(1, max_cluster + 1)) for i in ts.ids}
        order = tuple(int(x) for x in rng.permutation(sorted(ts.ids)))
        ts = replace(ts, processors=sum(m.values())).with_priority_order(order)
        target = sorted(ts.ids)[k % len(ts)]
        for mode, disc, adv in (("fifo", "fifo", None), ("priority", "priority", None),
                                ("unordered-random", "unordered", None),
                                ("unordered-adversarial", "unordered", target)):
            trace = simulate(ts, m, disc, horizon, seed=k, adversary=adv)
            rep.runs += 1
            for r in identity_reports(trace):
                rep.jobs += 1
                rep.by_mode[mode] = rep.by_mode.get(mode, 0) + 1
                if not r.ok:
                    rep.failures.append((mode, k, r))
    return rep
