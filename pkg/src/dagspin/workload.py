"""Synthetic and benchmark-derived task sets.

Random task sets follow an Erdős–Rényi recipe: vertex counts and WCETs are
uniform, each forward edge exists with probability ``p``, and a minimal set
of extra edges makes the graph weakly connected. Deadlines come from a
sampled ratio ``L / D`` with ``T = D``, and the platform size is
``ceil(U_sum / U_norm)``.

All randomness is drawn from independent numpy streams keyed by
``(seed..., purpose, index)``. Changing one knob (say the number of resource
types) therefore leaves every other draw untouched, which keeps paired
comparisons across sweep points tight.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .model import DagTask, RequestPlacement, ResourceUsage, TaskSet, make_task


class GenerationError(RuntimeError):
    """The generator could not satisfy its constraints."""


class PlacementError(GenerationError):
    """Requests do not fit into the vertices of a task."""


Range = tuple[int, int]

# stream tags
_DAG, _ACCESS, _HOLD, _THETA, _COUNT, _PLACE, _PICK = range(7)


def _rng(seed, *keys: int) -> np.random.Generator:
    base = list(seed) if isinstance(seed, (tuple, list)) else [seed]
    return np.random.default_rng([int(k) for k in (*base, *keys)])


def _draw(rng: np.random.Generator, r: Range) -> int:
    return int(rng.integers(r[0], r[1] + 1))


@dataclass(frozen=True)
class GenConfig:
    """Generator knobs. Ranges are inclusive ``(lo, hi)`` pairs.

    The defaults are the base point every sweep axis varies from.
    :meth:`desk` shrinks the graphs so sweeps finish in minutes.
    """

    n_tasks: Range = (4, 4)
    edge_prob: float = 0.1
    vertices: Range = (100, 400)
    wcet: Range = (250, 600)
    ld_ratios: tuple[Fraction, ...] = (Fraction(1, 8), Fraction(1, 4))
    resource_types: Range = (4, 4)
    total_accesses: Range = (256, 256)
    max_hold: Range = (15, 15)
    u_norm: Fraction = Fraction(1, 2)
    max_retries: int = 1000

    def __post_init__(self):
        for f in ("n_tasks", "vertices", "wcet", "resource_types", "total_accesses", "max_hold"):
            lo, hi = getattr(self, f)
            if lo > hi or lo < 0:
                raise ValueError(f"{f}: empty or negative range ({lo}, {hi})")
        if self.n_tasks[0] < 1 or self.vertices[0] < 1 or self.max_hold[0] < 1:
            raise ValueError("n_tasks, vertices and max_hold must be at least 1")
        if not 0 <= self.edge_prob <= 1:
            raise ValueError(f"edge_prob {self.edge_prob} outside [0, 1]")
        if not self.ld_ratios or any(not 0 < r <= 1 for r in self.ld_ratios):
            raise ValueError("ld_ratios must be non-empty and in (0, 1]")
        if self.u_norm <= 0:
            raise ValueError("u_norm must be positive")

    @classmethod
    def desk(cls, **overrides) -> "GenConfig":
        return cls(**{"vertices": (20, 60), **overrides})

    @classmethod
    def from_mapping(cls, values: Mapping[str, str], base: "GenConfig | None" = None) -> "GenConfig":
        """Build from string values as found in a key=value file; unknown keys raise."""
        base = base or cls()
        known = {f.name for f in fields(cls)}
        out = {}
        for key, raw in values.items():
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            out[key] = _parse_field(key, raw)
        return replace(base, **out)

    def to_mapping(self) -> dict[str, str]:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                out[f.name] = ",".join(str(x) for x in v)
            else:
                out[f.name] = str(v)
        return out


def _parse_field(key: str, raw: str):
    parts = [p.strip() for p in str(raw).split(",") if p.strip()]
    if not parts:
        raise ValueError(f"{key}: empty value")
    if key == "ld_ratios":
        return tuple(Fraction(p) for p in parts)
    if key == "u_norm":
        return Fraction(parts[0])
    if key == "edge_prob":
        return float(parts[0])
    if key == "max_retries":
        return int(parts[0])
    if len(parts) > 2:
        raise ValueError(f"{key}: expected 'lo,hi' or a single value")
    lo, hi = int(parts[0]), int(parts[-1])
    return (lo, hi)


def read_config(source: str | Path) -> dict[str, str]:
    """Read a flat ``key = value`` file. ``#`` starts a comment."""
    if isinstance(source, Path) or ("\n" not in source and Path(source).is_file()):
        text = Path(source).read_text()
    else:
        text = source
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {n}: expected key = value, got {line!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        if not k:
            raise ValueError(f"line {n}: missing key")
        out[k] = v
    return out


# --- graphs -----------------------------------------------------------------------

def connect_weakly(n: int, edges: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    """Add the fewest forward edges that make the graph weakly connected.

    Components are ordered by their lowest vertex; each one after the first
    gets the edge ``(lowest - 1, lowest)``, whose source always lies in an
    earlier component.
    """
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    edges = list(edges)
    for u, v in edges:
        parent[find(u)] = find(v)
    lowest = {}
    for v in range(n):
        lowest.setdefault(find(v), v)
    for low in sorted(lowest.values())[1:]:
        edges.append((low - 1, low))
    return edges


def random_graph(n: int, p: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    mask = np.triu(rng.random((n, n)) < p, k=1)
    return [(int(u), int(v)) for u, v in zip(*np.nonzero(mask))]


def gen_dag(config: GenConfig, seed, task_id: int = 0, attempt: int = 0) -> DagTask:
    """One random DAG task with timing set from a sampled L/D ratio (T = D)."""
    rng = _rng(seed, _DAG, task_id, attempt)
    n = _draw(rng, config.vertices)
    wcets = rng.integers(config.wcet[0], config.wcet[1] + 1, size=n).tolist()
    edges = connect_weakly(n, random_graph(n, config.edge_prob, rng))
    ratio = config.ld_ratios[int(rng.integers(len(config.ld_ratios)))]
    task = make_task(task_id, wcets, edges, period=1)
    d = math.ceil(Fraction(task.longest_path) / Fraction(ratio))
    return task.with_deadline(d, period=d)


def heavy_dag(config: GenConfig, seed, task_id: int) -> DagTask:
    for attempt in range(config.max_retries):
        task = gen_dag(config, seed, task_id, attempt)
        if task.volume > task.deadline:
            return task
    raise GenerationError(f"task {task_id}: no task with density > 1 after "
                          f"{config.max_retries} attempts")


# --- resources --------------------------------------------------------------------

def split_accesses(total: int, n_tasks: int, rng: np.random.Generator) -> list[int]:
    """Assign each of ``total`` accesses to a uniformly chosen task.

    One float is drawn per access, so a larger total extends a smaller one.
    """
    owners = np.floor(rng.random(total) * n_tasks).astype(np.int64)
    return np.bincount(owners, minlength=n_tasks).tolist()


def gen_taskset(config: GenConfig, seed=0) -> TaskSet:
    """A random task set without request placements.

    Every task has density > 1. Hold times are ``1 + floor(u * max_hold)``
    with one ``u`` per (task, resource), so they grow with ``max_hold``.
    """
    n = _draw(_rng(seed, _COUNT), config.n_tasks)
    tasks = [heavy_dag(config, seed, k) for k in range(n)]
    n_res = _draw(_rng(seed, _THETA), config.resource_types)
    usage: list[dict[int, ResourceUsage]] = [{} for _ in range(n)]
    for q in range(n_res):
        rng = _rng(seed, _ACCESS, q)
        total = _draw(rng, config.total_accesses)
        max_hold = _draw(rng, config.max_hold)
        counts = split_accesses(total, n, _rng(seed, _ACCESS, q, 1))
        us = _rng(seed, _HOLD, q).random(n)
        for k in range(n):
            if counts[k]:
                usage[k][q] = ResourceUsage(counts[k], 1 + int(us[k] * max_hold))
    tasks = [replace(t, resource_usage=u) for t, u in zip(tasks, usage)]
    u_sum = sum((t.utilization for t in tasks), Fraction(0))
    m = max(1, math.ceil(u_sum / Fraction(config.u_norm)))
    return TaskSet(tuple(tasks), processors=m, resources=frozenset(range(n_res)))


def place_requests(task: DagTask, seed=0) -> list[RequestPlacement]:
    """Spread every declared request over vertices that still have room.

    Request lengths are uniform in ``[1, L]``, except that one request per
    resource takes exactly ``L``. Within a vertex, requests keep their draw
    order and are separated by random gaps.
    """
    rng = _rng(seed, _PLACE, task.id)
    reqs = []
    for q in sorted(task.resource_usage):
        u = task.resource_usage[q]
        if u.count == 0:
            continue
        lengths = rng.integers(1, u.hold_time + 1, size=u.count)
        lengths[int(rng.integers(u.count))] = u.hold_time
        reqs.extend((q, int(x)) for x in lengths)
    if not reqs:
        return []
    order = rng.permutation(len(reqs))
    # longest first so a feasible packing is found whenever one is likely
    order = sorted(order, key=lambda k: -reqs[k][1])
    room = np.array([v.wcet for v in task.vertices], dtype=np.int64)
    per_vertex: dict[int, list[tuple[int, int]]] = {}
    for k in order:
        q, length = reqs[k]
        fits = np.nonzero(room >= length)[0]
        if fits.size == 0:
            raise PlacementError(f"task {task.id}: no vertex has room for a request of length {length}")
        v = int(fits[int(rng.integers(fits.size))])
        room[v] -= length
        per_vertex.setdefault(v, []).append((q, length))
    out = []
    for v in sorted(per_vertex):
        items = per_vertex[v]
        rng.shuffle(items)
        slack = int(room[v])
        cuts = np.sort(rng.integers(0, slack + 1, size=len(items)))
        gaps = np.diff(np.concatenate(([0], cuts)))
        t = 0
        for (q, length), gap in zip(items, gaps):
            t += int(gap)
            out.append(RequestPlacement(v, q, t, length))
            t += length
    return out


def place_all(ts: TaskSet, seed=0) -> TaskSet:
    return ts.with_tasks(t.with_placements(place_requests(t, seed)) for t in ts.tasks)


# --- benchmark data ---------------------------------------------------------------

@dataclass(frozen=True)
class BenchmarkProgram:
    name: str
    suite: str
    volume: int
    longest_path: int
    usage: dict[int, ResourceUsage]


def load_openmp_dataset() -> list[BenchmarkProgram]:
    """The eight measured OpenMP programs, in table order."""
    text = resources.files("dagspin").joinpath("data/openmp.csv").read_text()
    rows = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    out = []
    for row in csv.DictReader(io.StringIO("\n".join(rows))):
        usage = {}
        for q in range(10):
            n, hold = int(row[f"N{q}"]), int(row[f"L{q}"])
            if n:
                usage[q] = ResourceUsage(n, hold)
        out.append(BenchmarkProgram(row["name"], row["suite"], int(row["C"]), int(row["L"]), usage))
    return out


def fork_join_task(task_id: int, volume: int, longest: int, period: int,
                   usage: Mapping[int, ResourceUsage] | None = None) -> DagTask:
    """A DAG with exactly the given volume and longest path.

    One vertex of length ``longest`` runs next to ``ceil((C - L) / L)``
    independent vertices of nearly equal length, between dummy head and tail.
    """
    if not 0 < longest <= volume:
        raise ValueError(f"need 0 < L <= C, got C={volume}, L={longest}")
    rest = volume - longest
    k = -(-rest // longest)
    sizes = [rest // k + (1 if j < rest % k else 0) for j in range(k)] if k else []
    wcets = [longest] + sizes
    return make_task(task_id, wcets, [], period=period, resource_usage=dict(usage or {}))


def openmp_taskset(seed=0, n_range: Range = (2, 5),
                   ld_ratios: Sequence[Fraction] = (Fraction(1, 8), Fraction(1, 4)),
                   u_norm: Fraction = Fraction(1, 2)) -> TaskSet:
    """Pick ``n`` distinct programs and time them like the synthetic tasks."""
    programs = load_openmp_dataset()
    rng = _rng(seed, _PICK)
    n = _draw(rng, n_range)
    picks = sorted(rng.choice(len(programs), size=n, replace=False).tolist())
    tasks = []
    for k, idx in enumerate(picks):
        p = programs[idx]
        ratio = Fraction(ld_ratios[int(rng.integers(len(ld_ratios)))])
        d = math.ceil(Fraction(p.longest_path) / ratio)
        tasks.append(fork_join_task(k, p.volume, p.longest_path, d, p.usage))
    u_sum = sum((t.utilization for t in tasks), Fraction(0))
    m = max(1, math.ceil(u_sum / Fraction(u_norm)))
    res = frozenset(q for t in tasks for q in t.resource_usage)
    return TaskSet(tuple(tasks), processors=m, resources=res)
