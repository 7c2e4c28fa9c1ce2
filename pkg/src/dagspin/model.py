"""DAG tasks, shared resources and platforms.

Time is an abstract non-negative integer unit everywhere in the package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence


class CycleError(ValueError):
    """Raised when a task graph contains a directed cycle."""


class TaskSetError(ValueError):
    """Raised for malformed task sets or task-set files."""


@dataclass(frozen=True)
class Vertex:
    id: int
    wcet: int

    def __post_init__(self):
        if self.wcet < 0:
            raise ValueError(f"vertex {self.id}: negative wcet {self.wcet}")


@dataclass(frozen=True)
class ResourceUsage:
    count: int
    hold_time: int

    def __post_init__(self):
        if self.count < 0 or self.hold_time < 0:
            raise ValueError("resource usage must be non-negative")
        if self.count == 0 and self.hold_time != 0:
            object.__setattr__(self, "hold_time", 0)


@dataclass(frozen=True)
class RequestPlacement:
    """One critical section: ``length`` units holding ``resource`` starting
    ``offset`` units into the execution of ``vertex``."""

    vertex: int
    resource: int
    offset: int
    length: int


@dataclass(frozen=True, eq=False)
class DagTask:
    """A periodic DAG task with constrained deadline.

    Use :func:`make_task` to build one; it inserts zero-WCET dummy head and
    tail vertices when the raw graph has several entry or exit points.
    """

    id: int
    vertices: tuple[Vertex, ...]
    edges: tuple[tuple[int, int], ...]
    period: int
    deadline: int
    resource_usage: Mapping[int, ResourceUsage] = field(default_factory=dict)
    placements: tuple[RequestPlacement, ...] | None = None

    @cached_property
    def wcet(self) -> tuple[int, ...]:
        return tuple(v.wcet for v in self.vertices)

    @cached_property
    def successors(self) -> tuple[tuple[int, ...], ...]:
        succ: list[list[int]] = [[] for _ in self.vertices]
        for u, v in self.edges:
            succ[u].append(v)
        return tuple(tuple(sorted(s)) for s in succ)

    @cached_property
    def predecessors(self) -> tuple[tuple[int, ...], ...]:
        pred: list[list[int]] = [[] for _ in self.vertices]
        for u, v in self.edges:
            pred[v].append(u)
        return tuple(tuple(sorted(p)) for p in pred)

    @property
    def heads(self) -> list[int]:
        return [v.id for v in self.vertices if not self.predecessors[v.id]]

    @property
    def tails(self) -> list[int]:
        return [v.id for v in self.vertices if not self.successors[v.id]]

    @cached_property
    def topological_order(self) -> tuple[int, ...]:
        return topological_order(len(self.vertices), self.edges)

    @cached_property
    def volume(self) -> int:
        return volume(self)

    @cached_property
    def longest_path(self) -> int:
        return longest_path(self)

    @property
    def density(self) -> Fraction:
        return Fraction(self.volume, self.deadline)

    @property
    def utilization(self) -> Fraction:
        return Fraction(self.volume, self.period)

    @property
    def resources(self) -> list[int]:
        """Resources this task actually accesses, ascending."""
        return sorted(q for q, u in self.resource_usage.items() if u.count > 0)

    def usage(self, q: int) -> ResourceUsage:
        return self.resource_usage.get(q, _NO_USAGE)

    def accesses(self, q: int) -> bool:
        return self.usage(q).count > 0

    def with_placements(self, placements: Iterable[RequestPlacement] | None) -> "DagTask":
        return DagTask(self.id, self.vertices, self.edges, self.period, self.deadline,
                       dict(self.resource_usage),
                       None if placements is None else tuple(placements))

    def with_deadline(self, deadline: int, period: int | None = None) -> "DagTask":
        return DagTask(self.id, self.vertices, self.edges,
                       deadline if period is None else period, deadline,
                       dict(self.resource_usage), self.placements)


_NO_USAGE = ResourceUsage(0, 0)


def make_task(id: int, wcets: Sequence[int], edges: Iterable[tuple[int, int]],
              period: int, deadline: int | None = None,
              resource_usage: Mapping[int, ResourceUsage | tuple[int, int]] | None = None,
              placements: Iterable[RequestPlacement] | None = None) -> DagTask:
    """Build a :class:`DagTask` from a WCET list and an edge list.

    Dummy head/tail vertices (WCET 0) get the next free ids. Calling this on
    an already normalized graph adds nothing.
    """
    if not wcets:
        raise TaskSetError(f"task {id}: empty graph")
    wcets = list(wcets)
    edges = sorted(set((int(u), int(v)) for u, v in edges))
    n = len(wcets)
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise TaskSetError(f"task {id}: edge ({u}, {v}) references unknown vertex")
    has_pred = [False] * n
    has_succ = [False] * n
    for u, v in edges:
        has_succ[u] = True
        has_pred[v] = True
    sources = [v for v in range(n) if not has_pred[v]]
    sinks = [v for v in range(n) if not has_succ[v]]
    if len(sources) > 1:
        head = len(wcets)
        wcets.append(0)
        edges.extend((head, s) for s in sources)
    if len(sinks) > 1:
        tail = len(wcets)
        wcets.append(0)
        edges.extend((s, tail) for s in sinks)
    usage = {}
    for q, u in (resource_usage or {}).items():
        u = u if isinstance(u, ResourceUsage) else ResourceUsage(*u)
        if u.count > 0:
            usage[q] = u
    return DagTask(
        id=id,
        vertices=tuple(Vertex(i, c) for i, c in enumerate(wcets)),
        edges=tuple(sorted(edges)),
        period=period,
        deadline=period if deadline is None else deadline,
        resource_usage=usage,
        placements=None if placements is None else tuple(placements),
    )


def topological_order(n: int, edges: Iterable[tuple[int, int]]) -> tuple[int, ...]:
    """Kahn's algorithm, smallest ready id first. Raises :class:`CycleError`."""
    import heapq

    indeg = [0] * n
    succ: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        succ[u].append(v)
        indeg[v] += 1
    ready = [v for v in range(n) if indeg[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        u = heapq.heappop(ready)
        order.append(u)
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(ready, v)
    if len(order) != n:
        raise CycleError("graph contains a cycle")
    return tuple(order)


def volume(task: DagTask) -> int:
    """Total WCET of all vertices."""
    return sum(v.wcet for v in task.vertices)


def longest_path(task: DagTask) -> int:
    """Length of the longest complete path, by DP over a topological order."""
    finish = [0] * len(task.vertices)
    preds = task.predecessors
    for v in task.topological_order:
        start = max((finish[u] for u in preds[v]), default=0)
        finish[v] = start + task.vertices[v].wcet
    return max(finish)


@dataclass(frozen=True)
class ValidationReport:
    task: int
    acyclic: bool
    unique_head: bool
    unique_tail: bool
    deadline_ok: bool
    density: Fraction | None
    sequential: bool
    problems: tuple[str, ...]

    @property
    def valid(self) -> bool:
        return not self.problems


def validate(task: DagTask) -> ValidationReport:
    """Structural checks on one task. Never raises; findings go in the report.

    Tasks with density <= 1 are flagged ``sequential``: they are outside the
    analysis scope but not invalid.
    """
    problems = []
    try:
        task.topological_order
        acyclic = True
    except CycleError:
        acyclic = False
        problems.append("cycle")
    unique_head = len(task.heads) == 1
    unique_tail = len(task.tails) == 1
    if not unique_head:
        problems.append(f"{len(task.heads)} head vertices")
    if not unique_tail:
        problems.append(f"{len(task.tails)} tail vertices")
    deadline_ok = 0 < task.deadline <= task.period
    if task.period <= 0:
        problems.append("non-positive period")
    elif task.deadline > task.period:
        problems.append("deadline exceeds period")
    elif task.deadline <= 0:
        problems.append("non-positive deadline")
    density = Fraction(task.volume, task.deadline) if task.deadline > 0 else None
    if acyclic and task.longest_path > task.volume:
        problems.append("longest path exceeds volume")
    if task.placements is not None:
        problems.extend(_placement_problems(task))
    return ValidationReport(
        task=task.id, acyclic=acyclic, unique_head=unique_head,
        unique_tail=unique_tail, deadline_ok=deadline_ok, density=density,
        sequential=density is not None and density <= 1,
        problems=tuple(problems),
    )


def _placement_problems(task: DagTask) -> list[str]:
    problems = []
    by_vertex: dict[int, list[RequestPlacement]] = {}
    counts: dict[int, int] = {}
    for p in task.placements:
        if not 0 <= p.vertex < len(task.vertices):
            problems.append(f"placement on unknown vertex {p.vertex}")
            continue
        by_vertex.setdefault(p.vertex, []).append(p)
        counts[p.resource] = counts.get(p.resource, 0) + 1
        if p.length <= 0 or p.length > task.usage(p.resource).hold_time:
            problems.append(f"placement length {p.length} on resource {p.resource} "
                            f"outside [1, {task.usage(p.resource).hold_time}]")
    for v, ps in by_vertex.items():
        ps.sort(key=lambda p: p.offset)
        end = 0
        for p in ps:
            if p.offset < end:
                problems.append(f"overlapping critical sections in vertex {v}")
            end = p.offset + p.length
        if end > task.vertices[v].wcet:
            problems.append(f"critical section exceeds wcet of vertex {v}")
    for q in set(counts) | set(task.resources):
        if counts.get(q, 0) != task.usage(q).count:
            problems.append(f"{counts.get(q, 0)} placed requests on resource {q}, "
                            f"declared {task.usage(q).count}")
    return problems


@dataclass(frozen=True, eq=False)
class TaskSet:
    tasks: tuple[DagTask, ...]
    processors: int
    resources: frozenset[int] = frozenset()
    priority_order: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        ids = [t.id for t in self.tasks]
        if len(set(ids)) != len(ids):
            raise TaskSetError("duplicate task ids")
        used = {q for t in self.tasks for q in t.resource_usage}
        resources = frozenset(self.resources) | used if not self.resources else frozenset(self.resources)
        missing = used - resources
        if missing:
            raise TaskSetError(f"resources {sorted(missing)} not declared")
        object.__setattr__(self, "resources", resources)
        if self.priority_order is not None:
            order = tuple(self.priority_order)
            if sorted(order) != sorted(ids):
                raise TaskSetError("priority_order must be a permutation of the task ids")
            object.__setattr__(self, "priority_order", order)
        if self.processors < 0:
            raise TaskSetError("processor count must be non-negative")

    @cached_property
    def by_id(self) -> dict[int, DagTask]:
        return {t.id: t for t in self.tasks}

    def __getitem__(self, task_id: int) -> DagTask:
        return self.by_id[task_id]

    def __iter__(self):
        return iter(self.tasks)

    def __len__(self):
        return len(self.tasks)

    @property
    def ids(self) -> list[int]:
        return [t.id for t in self.tasks]

    def others(self, task_id: int) -> list[DagTask]:
        return [t for t in self.tasks if t.id != task_id]

    def with_priority_order(self, order: Sequence[int] | None) -> "TaskSet":
        return TaskSet(self.tasks, self.processors, self.resources,
                       None if order is None else tuple(order))

    def with_tasks(self, tasks: Iterable[DagTask]) -> "TaskSet":
        return TaskSet(tuple(tasks), self.processors, self.resources, self.priority_order)

    @property
    def total_utilization(self) -> Fraction:
        return sum((t.utilization for t in self.tasks), Fraction(0))


# --- canonical JSON interchange ------------------------------------------------

def task_to_dict(task: DagTask) -> dict:
    d = {
        "id": task.id,
        "period": task.period,
        "deadline": task.deadline,
        "vertices": [{"id": v.id, "wcet": v.wcet} for v in task.vertices],
        "edges": [[u, v] for u, v in task.edges],
        "resource_usage": [
            {"resource": q, "count": u.count, "hold_time": u.hold_time}
            for q, u in sorted(task.resource_usage.items())
        ],
    }
    if task.placements is not None:
        d["request_placement"] = [
            {"vertex": p.vertex, "resource": p.resource,
             "offset_in_vertex": p.offset, "length": p.length}
            for p in task.placements
        ]
    return d


def taskset_to_dict(ts: TaskSet) -> dict:
    d = {
        "processors": ts.processors,
        "resources": sorted(ts.resources),
        "tasks": [task_to_dict(t) for t in ts.tasks],
    }
    if ts.priority_order is not None:
        d["priority_order"] = list(ts.priority_order)
    return d


def task_from_dict(d: Mapping) -> DagTask:
    try:
        vertices = sorted(d["vertices"], key=lambda v: v["id"])
        if [v["id"] for v in vertices] != list(range(len(vertices))):
            raise TaskSetError(f"task {d['id']}: vertex ids must be dense from 0")
        placements = d.get("request_placement")
        return make_task(
            id=int(d["id"]),
            wcets=[int(v["wcet"]) for v in vertices],
            edges=[(int(u), int(v)) for u, v in d.get("edges", [])],
            period=int(d["period"]),
            deadline=int(d["deadline"]),
            resource_usage={
                int(r["resource"]): ResourceUsage(int(r["count"]), int(r["hold_time"]))
                for r in d.get("resource_usage", [])
            },
            placements=None if placements is None else [
                RequestPlacement(int(p["vertex"]), int(p["resource"]),
                                 int(p["offset_in_vertex"]), int(p["length"]))
                for p in placements
            ],
        )
    except KeyError as exc:
        raise TaskSetError(f"task entry missing field {exc}") from None


def taskset_from_dict(d: Mapping) -> TaskSet:
    try:
        tasks = tuple(task_from_dict(t) for t in d["tasks"])
        order = d.get("priority_order")
        return TaskSet(
            tasks=tasks,
            processors=int(d["processors"]),
            resources=frozenset(int(q) for q in d.get("resources", [])),
            priority_order=None if order is None else tuple(int(i) for i in order),
        )
    except KeyError as exc:
        raise TaskSetError(f"task set missing field {exc}") from None


def dump_taskset(ts: TaskSet, path: str | Path | None = None, indent: int | None = 1) -> str:
    text = json.dumps(taskset_to_dict(ts), indent=indent)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def load_taskset(path: str | Path) -> TaskSet:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        line = text.splitlines()[exc.lineno - 1] if exc.lineno <= len(text.splitlines()) else ""
        raise TaskSetError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}\n    {line}") from None
    return taskset_from_dict(data)
