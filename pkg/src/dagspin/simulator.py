"""Discrete-event simulation of federated DAG scheduling with spin locks.

Each task owns a cluster of processors and runs a non-preemptive,
work-conserving list scheduler on it: whenever a processor is free it takes
the eligible vertex of the oldest job with the lowest id. A vertex waiting
for a lock spins on its processor. Locks are granted according to one of
three queue disciplines (``unordered``, ``fifo``, ``priority``).

At one instant events are handled in a fixed order: job releases, segment
completions (which release locks), grants to requests already waiting,
then vertex completions, dispatches and new lock requests.

Traces are lists of :class:`Interval` records and can be written to and read
from a small CSV format; :func:`replay_trace` builds a trace from such
records (e.g. a hand-drawn schedule) after checking it for consistency.
"""

from __future__ import annotations

import csv
import heapq
import io
import random
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .framework import BlockingDecomposition, graham_bound, observed_interference
from .model import DagTask, TaskSet

ORDERS = ("unordered", "fifo", "priority")
EXEC, SPIN, IDLE = "exec", "spin", "idle"

JobKey = tuple[int, int]


class SimulationError(RuntimeError):
    pass


class TraceError(ValueError):
    """A trace or replay script is inconsistent."""


@dataclass(frozen=True)
class Interval:
    """One labeled stretch of time on one processor.

    ``exec`` intervals with a resource are critical sections (the lock is
    held); ``spin`` intervals name the resource waited for and the task that
    held it during the whole interval.
    """

    job: JobKey | None
    processor: int
    start: int
    end: int
    kind: str
    vertex: int | None = None
    resource: int | None = None
    holder_task: int | None = None
    task: int | None = None

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass
class JobRecord:
    task: int
    index: int
    release: int
    finish: int | None = None
    vertex_start: dict[int, int] = field(default_factory=dict)
    vertex_finish: dict[int, int] = field(default_factory=dict)

    @property
    def key(self) -> JobKey:
        return (self.task, self.index)

    @property
    def response(self) -> int | None:
        return None if self.finish is None else self.finish - self.release


@dataclass(frozen=True)
class LockEvent:
    time: int
    event: str  # enqueue | acquire | release
    resource: int
    job: JobKey
    vertex: int
    processor: int


@dataclass
class SimTrace:
    taskset: TaskSet
    clusters: dict[int, tuple[int, ...]]
    intervals: list[Interval]
    jobs: dict[JobKey, JobRecord]
    lock_log: list[LockEvent] = field(default_factory=list)
    horizon: int | None = None
    order: str | None = None

    def job_intervals(self, job: JobKey) -> list[Interval]:
        return [iv for iv in self.intervals if iv.job == job]

    def completed_jobs(self) -> list[JobKey]:
        return sorted(k for k, j in self.jobs.items() if j.finish is not None)

    def with_idle(self) -> list[Interval]:
        """All intervals plus explicit idle gaps on every cluster processor."""
        end = self.horizon
        if end is None:
            end = max((iv.end for iv in self.intervals), default=0)
        out = list(self.intervals)
        busy = defaultdict(list)
        for iv in self.intervals:
            if iv.kind != IDLE:
                busy[iv.processor].append((iv.start, iv.end))
        for task, procs in self.clusters.items():
            for p in procs:
                for s, e in _gaps(sorted(busy[p]), 0, end):
                    out.append(Interval(None, p, s, e, IDLE, task=task))
        out.sort(key=lambda iv: (iv.processor, iv.start, iv.end))
        return out


# --- interval helpers ----------------------------------------------------------

def _merge(spans: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    out: list[list[int]] = []
    for s, e in sorted(spans):
        if e <= s:
            continue
        if out and s <= out[-1][1]:
            out[-1][1] = max(out[-1][1], e)
        else:
            out.append([s, e])
    return [(s, e) for s, e in out]


def _measure(spans: Iterable[tuple[int, int]]) -> int:
    return sum(e - s for s, e in _merge(spans))


def _overlap(s: int, e: int, merged: Sequence[tuple[int, int]]) -> int:
    return sum(max(0, min(e, b) - max(s, a)) for a, b in merged)


def _gaps(spans: Sequence[tuple[int, int]], lo: int, hi: int) -> list[tuple[int, int]]:
    out, t = [], lo
    for s, e in _merge(spans):
        if s > t:
            out.append((t, min(s, hi)))
        t = max(t, e)
        if t >= hi:
            break
    if t < hi:
        out.append((t, hi))
    return [(s, e) for s, e in out if e > s]


# --- simulation -----------------------------------------------------------------

def vertex_segments(task: DagTask) -> list[list[tuple[int, int | None]]]:
    """Per vertex, its execution split into (length, resource-or-None) pieces."""
    by_vertex = defaultdict(list)
    for p in task.placements or ():
        by_vertex[p.vertex].append(p)
    segs = []
    for v in task.vertices:
        out, t = [], 0
        for p in sorted(by_vertex[v.id], key=lambda p: p.offset):
            if p.offset > t:
                out.append((p.offset - t, None))
            out.append((p.length, p.resource))
            t = p.offset + p.length
        if v.wcet > t:
            out.append((v.wcet - t, None))
        segs.append(out)
    return segs


@dataclass
class _Proc:
    id: int
    task: int
    job: JobKey | None = None
    vertex: int | None = None
    seg: int = -1
    seg_start: int = 0
    spinning: int | None = None  # resource waited for
    spin_since: int = 0
    spin_holder: int | None = None
    enqueued_at: int = 0


class _Simulator:
    def __init__(self, ts: TaskSet, m: Mapping[int, int], order: str, horizon: int,
                 seed: int, adversary: int | None):
        if order not in ORDERS:
            raise SimulationError(f"unknown order {order!r}")
        if order == "priority" and ts.priority_order is None:
            raise SimulationError("priority discipline needs a priority order")
        if sum(m[t.id] for t in ts.tasks) > ts.processors:
            raise SimulationError("processor assignment exceeds the platform")
        for t in ts.tasks:
            if t.placements is None and t.resources:
                raise SimulationError(f"task {t.id} has no request placement")
            if m[t.id] < 1:
                raise SimulationError(f"task {t.id} needs at least one processor")
        self.ts = ts
        self.order = order
        self.horizon = horizon
        self.rng = random.Random(seed)
        self.adversary = adversary
        self.rank = ({tid: k for k, tid in enumerate(ts.priority_order)}
                     if ts.priority_order else {})
        self.segments = {t.id: vertex_segments(t) for t in ts.tasks}
        self.clusters: dict[int, tuple[int, ...]] = {}
        self.procs: list[_Proc] = []
        for t in sorted(ts.tasks, key=lambda t: t.id):
            ids = tuple(range(len(self.procs), len(self.procs) + m[t.id]))
            self.clusters[t.id] = ids
            self.procs.extend(_Proc(p, t.id) for p in ids)
        self.intervals: list[Interval] = []
        self.jobs: dict[JobKey, JobRecord] = {}
        self.lock_log: list[LockEvent] = []
        self.holder: dict[int, _Proc | None] = defaultdict(lambda: None)
        self.waiters: dict[int, list[_Proc]] = defaultdict(list)
        self.eligible: dict[int, list[tuple[int, int]]] = defaultdict(list)  # task -> heap (job idx, vertex)
        self.missing_preds: dict[JobKey, list[int]] = {}
        self.events: list[tuple[int, int, int, int]] = []  # (time, kind, seq, payload)
        self._seq = 0

    def push(self, time: int, kind: int, payload: int):
        self._seq += 1
        heapq.heappush(self.events, (time, kind, self._seq, payload))

    # - queue disciplines -

    def pick(self, candidates: list[_Proc]) -> _Proc:
        if len(candidates) == 1:
            return candidates[0]
        if self.order == "fifo":
            return min(candidates, key=self._fifo_key)
        if self.order == "priority":
            return min(candidates, key=lambda p: (self.rank[p.task],) + self._fifo_key(p))
        if self.adversary is not None:
            return max(candidates, key=self._adversary_key)
        cands = sorted(candidates, key=self._fifo_key)
        return cands[self.rng.randrange(len(cands))]

    def _fifo_key(self, p: _Proc):
        return (p.enqueued_at, p.task, p.job[1], p.vertex)

    def _adversary_key(self, p: _Proc):
        # Serve foreign requests first, longest first, newest first.
        length = self.segments[p.task][p.vertex][p.seg + 1][0]
        return (p.task != self.adversary, length, p.enqueued_at, -p.id)

    # - bookkeeping -

    def emit(self, p: _Proc, start: int, end: int, kind: str, resource=None, holder=None):
        if end > start:
            self.intervals.append(Interval(p.job, p.id, start, end, kind, p.vertex,
                                           resource, holder, p.task))

    def set_holder(self, q: int, new: _Proc | None, t: int):
        self.holder[q] = new
        for w in self.waiters[q]:
            self.emit(w, w.spin_since, t, SPIN, q, w.spin_holder)
            w.spin_since = t
            w.spin_holder = None if new is None else new.task

    def grant(self, q: int, p: _Proc, t: int):
        self.waiters[q].remove(p)
        self.emit(p, p.spin_since, t, SPIN, q, p.spin_holder)
        p.spinning = None
        self.set_holder(q, p, t)
        self.lock_log.append(LockEvent(t, "acquire", q, p.job, p.vertex, p.id))
        self.start_segment(p, p.seg + 1, t)

    def start_segment(self, p: _Proc, k: int, t: int):
        length, q = self.segments[p.task][p.vertex][k]
        p.seg = k
        p.seg_start = t
        self.push(t + length, 1, p.id)

    # - vertex lifecycle -

    def release(self, task_id: int, k: int, t: int):
        task = self.ts[task_id]
        key = (task_id, k)
        self.jobs[key] = JobRecord(task_id, k, t)
        self.missing_preds[key] = [len(ps) for ps in task.predecessors]
        for v in task.heads:
            self.make_eligible(key, v, t)

    def make_eligible(self, key: JobKey, v: int, t: int):
        task = self.ts[key[0]]
        if task.vertices[v].wcet == 0:
            rec = self.jobs[key]
            rec.vertex_start[v] = t
            self.complete_vertex(key, v, t)
        else:
            heapq.heappush(self.eligible[key[0]], (key[1], v))

    def complete_vertex(self, key: JobKey, v: int, t: int):
        rec = self.jobs[key]
        rec.vertex_finish[v] = t
        task = self.ts[key[0]]
        if not task.successors[v]:
            rec.finish = t
        missing = self.missing_preds[key]
        for s in task.successors[v]:
            missing[s] -= 1
            if missing[s] == 0:
                self.make_eligible(key, s, t)

    def advance(self, p: _Proc, t: int, requests: list[_Proc]):
        """Move p past a finished segment."""
        segs = self.segments[p.task][p.vertex]
        if p.seg + 1 < len(segs):
            self.begin_or_request(p, p.seg + 1, t, requests)
            return
        key, v = p.job, p.vertex
        p.job, p.vertex, p.seg = None, None, -1
        self.complete_vertex(key, v, t)

    def begin_or_request(self, p: _Proc, k: int, t: int, requests: list[_Proc]):
        length, q = self.segments[p.task][p.vertex][k]
        if q is None:
            self.start_segment(p, k, t)
        else:
            p.seg = k - 1
            requests.append(p)

    def dispatch(self, t: int, requests: list[_Proc]):
        for task_id, procs in self.clusters.items():
            heap = self.eligible[task_id]
            for pid in procs:
                if not heap:
                    break
                p = self.procs[pid]
                if p.job is not None:
                    continue
                idx, v = heapq.heappop(heap)
                p.job, p.vertex = (task_id, idx), v
                self.jobs[p.job].vertex_start[v] = t
                self.begin_or_request(p, 0, t, requests)

    def enqueue(self, requests: list[_Proc], t: int):
        by_res = defaultdict(list)
        for p in requests:
            q = self.segments[p.task][p.vertex][p.seg + 1][1]
            p.spinning = q
            p.spin_since = t
            p.enqueued_at = t
            h = self.holder[q]
            p.spin_holder = None if h is None else h.task
            self.waiters[q].append(p)
            self.lock_log.append(LockEvent(t, "enqueue", q, p.job, p.vertex, p.id))
            by_res[q].append(p)
        for q, group in sorted(by_res.items()):
            if self.holder[q] is None:
                self.grant(q, self.pick(group), t)

    # - main loop -

    def run(self) -> SimTrace:
        for t in sorted(self.ts.tasks, key=lambda t: t.id):
            for k, r in enumerate(range(0, self.horizon, t.period)):
                self.push(r, 0, t.id * 1_000_000 + k)
        while self.events and self.events[0][0] < self.horizon:
            now = self.events[0][0]
            finished: list[_Proc] = []
            while self.events and self.events[0][0] == now:
                _, kind, _, payload = heapq.heappop(self.events)
                if kind == 0:
                    self.release(payload // 1_000_000, payload % 1_000_000, now)
                else:
                    finished.append(self.procs[payload])
            released = []
            for p in sorted(finished, key=lambda p: p.id):
                length, q = self.segments[p.task][p.vertex][p.seg]
                self.emit(p, p.seg_start, now, EXEC, q)
                if q is not None:
                    self.lock_log.append(LockEvent(now, "release", q, p.job, p.vertex, p.id))
                    self.set_holder(q, None, now)
                    released.append(q)
            for q in sorted(released):
                if self.holder[q] is None and self.waiters[q]:
                    self.grant(q, self.pick(list(self.waiters[q])), now)
            requests: list[_Proc] = []
            for p in sorted(finished, key=lambda p: p.id):
                self.advance(p, now, requests)
            self.dispatch(now, requests)
            self.enqueue(requests, now)
        self._close()
        return SimTrace(self.ts, self.clusters, self.intervals, self.jobs,
                        self.lock_log, self.horizon, self.order)

    def _close(self):
        end = self.horizon
        for p in self.procs:
            if p.job is None:
                continue
            if p.spinning is not None:
                self.emit(p, p.spin_since, end, SPIN, p.spinning, p.spin_holder)
            else:
                length, q = self.segments[p.task][p.vertex][p.seg]
                self.emit(p, p.seg_start, end, EXEC, q)
        self.intervals.sort(key=lambda iv: (iv.processor, iv.start))


def default_horizon(ts: TaskSet) -> int:
    return 6 * max((t.period for t in ts.tasks), default=1)


def simulate(ts: TaskSet, m: Mapping[int, int], order: str, horizon: int | None = None,
             seed: int = 0, adversary: int | None = None) -> SimTrace:
    """Simulate synchronous periodic releases of every task up to ``horizon``.

    ``m`` maps task id to cluster size. Under ``unordered``, waiting requests
    are granted uniformly at random (seeded); passing ``adversary`` (a task
    id) instead grants foreign requests first, longest first, to make that
    task spin as much as possible. Jobs unfinished at the horizon keep
    ``finish=None``.
    """
    if horizon is None:
        horizon = default_horizon(ts)
    return _Simulator(ts, m, order, horizon, seed, adversary).run()


# --- trace analysis ---------------------------------------------------------------

def extract_key_path(trace: SimTrace, job: JobKey) -> tuple[int, ...]:
    """Walk back from the tail, always to the latest-finishing predecessor.

    Ties go to the lowest vertex id. Returned head first.
    """
    rec = trace.jobs[job]
    if rec.finish is None:
        raise TraceError(f"job {job} did not complete")
    task = trace.taskset[job[0]]
    finish = rec.vertex_finish
    (v,) = task.tails
    path = [v]
    while task.predecessors[v]:
        v = max(task.predecessors[v], key=lambda u: (finish[u], -u))
        path.append(v)
    return tuple(reversed(path))


def _key_windows(ivs: Sequence[Interval], key_path: Iterable[int]) -> list[tuple[int, int]]:
    on_path = set(key_path)
    return _merge((iv.start, iv.end) for iv in ivs
                  if iv.vertex in on_path and iv.kind in (EXEC, SPIN))


def decompose_blocking(trace: SimTrace, job: JobKey,
                       key_path: Sequence[int]) -> BlockingDecomposition:
    """Split the job's spinning time into the six key/delay/parallel x intra/inter parts."""
    ivs = trace.job_intervals(job)
    windows = _key_windows(ivs, key_path)
    on_path = set(key_path)
    parts = defaultdict(int)
    for iv in ivs:
        if iv.kind != SPIN:
            continue
        side = "intra" if iv.holder_task == job[0] else "inter"
        if iv.vertex in on_path:
            parts["key_" + side] += iv.length
        else:
            par = _overlap(iv.start, iv.end, windows)
            parts["parallel_" + side] += par
            parts["delay_" + side] += iv.length - par
    return BlockingDecomposition(**parts)


@dataclass
class IdentityReport:
    job: JobKey
    processors: int
    response: int
    blocking: int
    working: int
    idle: int
    len_star: int
    key_path_length: int
    idle_bound: int
    observed_bound: Fraction
    unattended_idle: int
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def area(self) -> int:
        return self.processors * self.response

    @property
    def idle_time(self) -> int:
        return self.idle


def check_identities(trace: SimTrace, job: JobKey, key_path: Sequence[int],
                     decomposition: BlockingDecomposition) -> IdentityReport:
    """Check the time-accounting identities of one completed job.

    (a) m (f - r) = B + W + idle, (b) len* = len(key path) + key-path blocking,
    (c) idle <= len* (m - 1) - B^{key,intra} - parallel blocking,
    (d) response <= the response-time bound with the observed interference,
    plus: every processor is busy whenever no key-path vertex is.
    """
    rec = trace.jobs[job]
    task = trace.taskset[job[0]]
    procs = trace.clusters[job[0]]
    m = len(procs)
    r, f = rec.release, rec.finish
    mine = trace.job_intervals(job)
    blocking = sum(iv.length for iv in mine if iv.kind == SPIN)
    working = sum(iv.length for iv in mine if iv.kind == EXEC)
    busy = defaultdict(list)
    for iv in trace.intervals:
        if iv.processor in procs and iv.kind != IDLE:
            busy[iv.processor].append((max(iv.start, r), min(iv.end, f)))
    idle = sum(e - s for p in procs for s, e in _gaps(busy[p], r, f))
    windows = _key_windows(mine, key_path)
    len_star = _measure(windows)
    path_len = sum(task.vertices[v].wcet for v in key_path)
    b = decomposition
    idle_bound = len_star * (m - 1) - b.key_intra - b.parallel_intra - b.parallel_inter
    bound = graham_bound(task.volume, task.longest_path, observed_interference(b, m), m)
    # time outside key-path windows during which some processor is idle
    unattended = 0
    for s, e in _gaps(windows, r, f):
        for p in procs:
            unattended += sum(ge - gs for gs, ge in _gaps(busy[p], s, e))

    report = IdentityReport(job, m, f - r, blocking, working, idle, len_star, path_len,
                            idle_bound, bound, unattended)
    v = report.violations
    if any(iv.start < r or iv.end > f for iv in mine):
        v.append("job has activity outside [release, finish)")
    if m * (f - r) != blocking + working + idle:
        v.append(f"area {m * (f - r)} != B {blocking} + W {working} + idle {idle}")
    if b.total() != blocking:
        v.append(f"decomposition sums to {b.total()}, blocking is {blocking}")
    if len_star != path_len + b.key_intra + b.key_inter:
        v.append(f"len* {len_star} != {path_len} + {b.key_intra} + {b.key_inter}")
    if idle > idle_bound:
        v.append(f"idle {idle} exceeds bound {idle_bound}")
    if f - r > bound:
        v.append(f"response {f - r} exceeds bound {bound}")
    if unattended:
        v.append(f"{unattended} idle processor-time outside key-path windows")
    return report


def isolated_jobs(trace: SimTrace) -> list[JobKey]:
    """Completed jobs whose cluster served no other job of the task meanwhile."""
    out = []
    spans = defaultdict(list)
    for k, rec in trace.jobs.items():
        if rec.finish is not None:
            spans[k[0]].append((rec.release, rec.finish, k))
        else:
            spans[k[0]].append((rec.release, trace.horizon or 10**18, k))
    for task, items in spans.items():
        for s, e, k in items:
            if k not in trace.jobs or trace.jobs[k].finish is None:
                continue
            if all(e2 <= s or s2 >= e for s2, e2, k2 in items if k2 != k):
                out.append(k)
    return sorted(out)


# --- replay and serialization -------------------------------------------------------

FIELDS = ("job", "processor", "start", "end", "kind", "vertex", "resource", "holder_task")


def _job_str(iv: Interval) -> str:
    if iv.job is None:
        return "" if iv.task is None else str(iv.task)
    return f"{iv.job[0]}.{iv.job[1]}"


def write_trace(intervals: Iterable[Interval], out: str | Path | io.TextIOBase | None = None) -> str:
    """Serialize intervals as CSV; idle rows carry only the owning task id."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    opt = lambda x: "" if x is None else x  # noqa: E731
    for iv in intervals:
        w.writerow([_job_str(iv), iv.processor, iv.start, iv.end, iv.kind,
                    opt(iv.vertex), opt(iv.resource), opt(iv.holder_task)])
    text = buf.getvalue()
    if isinstance(out, (str, Path)):
        Path(out).write_text(text)
    elif out is not None:
        out.write(text)
    return text


def read_trace(source: str | Path | Iterable[str]) -> list[Interval]:
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and Path(source).exists()):
        lines = Path(source).read_text().splitlines()
    elif isinstance(source, str):
        lines = source.splitlines()
    else:
        lines = list(source)
    lines = [ln for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    rows = list(csv.reader(lines))
    if rows and rows[0] and rows[0][0].strip() == "job":
        rows = rows[1:]
    out = []
    for n, row in enumerate(rows, 1):
        row = [c.strip() for c in row]
        if len(row) != len(FIELDS):
            raise TraceError(f"record {n}: expected {len(FIELDS)} fields, got {len(row)}: {row}")
        job_s, proc, start, end, kind, vertex, res, holder = row
        if kind not in (EXEC, SPIN, IDLE):
            raise TraceError(f"record {n}: unknown kind {kind!r}")
        opt = lambda s: None if s == "" else int(s)  # noqa: E731
        try:
            if "." in job_s:
                a, b = job_s.split(".")
                job, task = (int(a), int(b)), int(a)
            else:
                job, task = None, opt(job_s)
            iv = Interval(job, int(proc), int(start), int(end), kind, opt(vertex),
                          opt(res), opt(holder), task)
        except ValueError as exc:
            raise TraceError(f"record {n}: {exc}") from None
        if iv.end <= iv.start:
            raise TraceError(f"record {n}: empty or reversed interval")
        out.append(iv)
    return out


def replay_trace(ts: TaskSet, records: Iterable[Interval] | str | Path) -> SimTrace:
    """Build a :class:`SimTrace` from explicit interval records.

    Checks that processors run one thing at a time and belong to one task,
    every vertex executes exactly its WCET after its predecessors finish,
    at most one vertex holds a lock at any time, and every spin interval
    names the task actually holding the lock. Job k of task i is released
    at k * T_i.
    """
    if not isinstance(records, list):
        records = read_trace(records)
    records = sorted(records, key=lambda iv: (iv.processor, iv.start))

    clusters: dict[int, set[int]] = defaultdict(set)
    owner: dict[int, int] = {}
    for iv in records:
        task = iv.job[0] if iv.job is not None else iv.task
        if task is None:
            raise TraceError(f"record on P{iv.processor} at {iv.start} has no task")
        if task not in ts.by_id:
            raise TraceError(f"unknown task {task}")
        if owner.setdefault(iv.processor, task) != task:
            raise TraceError(f"processor {iv.processor} used by tasks {owner[iv.processor]} and {task}")
        clusters[task].add(iv.processor)
    for a, b in zip(records, records[1:]):
        if a.processor == b.processor and b.start < a.end:
            raise TraceError(f"overlapping intervals on processor {a.processor} at {b.start}")

    active = [iv for iv in records if iv.kind != IDLE]
    holds = defaultdict(list)
    for iv in active:
        if iv.job is None or iv.vertex is None:
            raise TraceError(f"{iv.kind} record at {iv.start} lacks job or vertex")
        if iv.kind == EXEC and iv.resource is not None:
            holds[iv.resource].append(iv)
        if iv.kind == SPIN and (iv.resource is None or iv.holder_task is None):
            raise TraceError(f"spin record at {iv.start} needs resource and holder_task")
    for q, hs in holds.items():
        hs.sort(key=lambda iv: iv.start)
        for a, b in zip(hs, hs[1:]):
            if b.start < a.end:
                raise TraceError(f"resource {q} held twice at time {b.start}")
    for iv in active:
        if iv.kind != SPIN:
            continue
        spans = [(h.start, h.end) for h in holds[iv.resource] if h.job[0] == iv.holder_task]
        if _overlap(iv.start, iv.end, _merge(spans)) != iv.length:
            raise TraceError(f"spin on P{iv.processor} at {iv.start}: resource "
                             f"{iv.resource} not held by task {iv.holder_task} throughout")

    jobs: dict[JobKey, JobRecord] = {}
    by_job = defaultdict(list)
    for iv in active:
        by_job[iv.job].append(iv)
    for key, ivs in sorted(by_job.items()):
        task = ts[key[0]]
        rec = JobRecord(key[0], key[1], key[1] * task.period)
        per_vertex = defaultdict(list)
        for iv in ivs:
            if not 0 <= iv.vertex < len(task.vertices):
                raise TraceError(f"job {key}: unknown vertex {iv.vertex}")
            per_vertex[iv.vertex].append(iv)
        for v in task.topological_order:
            pieces = per_vertex.get(v, [])
            work = sum(iv.length for iv in pieces if iv.kind == EXEC)
            wcet = task.vertices[v].wcet
            preds = task.predecessors[v]
            if any(u not in rec.vertex_finish for u in preds):
                if pieces:
                    raise TraceError(f"job {key} vertex {v} runs before its predecessors finish")
                continue
            ready = max((rec.vertex_finish[u] for u in preds), default=rec.release)
            if work > wcet:
                raise TraceError(f"job {key} vertex {v}: executes {work}, wcet {wcet}")
            if not pieces:
                if wcet:
                    continue  # not started yet
                rec.vertex_start[v] = rec.vertex_finish[v] = ready
                continue
            start = min(iv.start for iv in pieces)
            if start < ready:
                raise TraceError(f"job {key} vertex {v} starts at {start} before its "
                                 f"predecessors finish at {ready}")
            if len({iv.processor for iv in pieces}) != 1:
                raise TraceError(f"job {key} vertex {v} migrates between processors")
            rec.vertex_start[v] = start
            if work == wcet:
                rec.vertex_finish[v] = max(iv.end for iv in pieces)
        (tail,) = task.tails
        rec.finish = rec.vertex_finish.get(tail)
        jobs[key] = rec
    horizon = max((iv.end for iv in records), default=0)
    intervals = [iv for iv in records if iv.kind != IDLE]
    return SimTrace(ts, {t: tuple(sorted(p)) for t, p in clusters.items()},
                    intervals, jobs, [], horizon, None)
