"""Analysis for priority-ordered spin locks.

Requests of one task share that task's priority and are served FIFO among
themselves, so the intra-task bound is the FIFO one.

The delay-per-request (dpr) recurrence is our own conservative choice: one
lower-priority critical section, at most ``min(N_iq, m_i) - 1`` same-task
requests queued ahead, and every higher-priority request issued inside the
waiting window::

    t = max_{j in lower} L_jq + (min(N_iq, m_i) - 1) L_iq
        + sum_{j in higher} ceil((t + D_j) / T_j) N_jq L_jq

Any over-approximation of dpr keeps the response-time bound safe.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .fifo import fifo_intra, intra_doubled
from .framework import (AnalysisError, InterferenceBound, Reason, Verdict,
                        ceil_div, eta, federated_processors, graham_bound,
                        interference_total)
from .model import TaskSet

DEFAULT_PERMUTATION_CAP = 8

# The intra-task bound is identical to FIFO.
priority_intra = fifo_intra


def _order(ts: TaskSet, order: Sequence[int] | None) -> tuple[int, ...]:
    order = ts.priority_order if order is None else tuple(order)
    if order is None:
        raise AnalysisError("priority order required")
    return tuple(order)


def split_by_priority(order: Sequence[int], i: int) -> tuple[list[int], list[int]]:
    """(higher, lower) task ids relative to task i; order is highest first."""
    k = list(order).index(i)
    return list(order[:k]), list(order[k + 1:])


def dpr_fixpoint(ts: TaskSet, i: int, q: int, m_i: int,
                 order: Sequence[int] | None = None) -> int | None:
    """Worst-case wait of one request of task i for resource q.

    Returns None when the iteration exceeds D_i (divergent).
    """
    higher, lower = split_by_priority(_order(ts, order), i)
    ti = ts[i]
    u = ti.usage(q)
    low = max((ts[j].usage(q).hold_time for j in lower if ts[j].accesses(q)), default=0)
    base = low + max(0, min(u.count, m_i) - 1) * u.hold_time
    hp = [ts[j] for j in higher if ts[j].accesses(q)]
    t = low
    while True:
        nxt = base + sum(ceil_div(t + tj.deadline, tj.period) * tj.usage(q).count
                         * tj.usage(q).hold_time for tj in hp)
        if nxt > ti.deadline:
            return None
        if nxt == t:
            return t
        t = nxt


def var_delta(dpr: int, d_j: int, t_j: int, both_access: bool) -> int:
    """Jobs of task j that can contend with a single request of task i."""
    if not both_access:
        return 0
    return ceil_div(dpr + d_j, t_j)


@dataclass(frozen=True)
class PriorityContext:
    task: int
    resource: int
    higher: tuple[int, ...]
    lower: tuple[int, ...]
    dpr: int | None
    # None when dpr diverged: only the eta-based argument is usable then.
    var_delta: dict[int, int | None]
    eta: dict[int, int]
    lower_hold: int


def priority_context(ts: TaskSet, i: int, q: int, m_i: int,
                     order: Sequence[int] | None = None) -> PriorityContext:
    order = _order(ts, order)
    higher, lower = split_by_priority(order, i)
    ti = ts[i]
    d = dpr_fixpoint(ts, i, q, m_i, order) if ti.accesses(q) else 0
    vd, et = {}, {}
    for j in higher:
        tj = ts[j]
        both = ti.accesses(q) and tj.accesses(q)
        et[j] = eta(ti.deadline, tj.deadline, tj.period, both)
        vd[j] = None if d is None else var_delta(d, tj.deadline, tj.period, both)
    lower_hold = max((ts[j].usage(q).hold_time for j in lower if ts[j].accesses(q)), default=0)
    return PriorityContext(i, q, tuple(higher), tuple(lower), d, vd, et, lower_hold)


def inter_doubled(xs: np.ndarray, ts: TaskSet, i: int, m_i: int,
                  ctx: PriorityContext) -> dict[int, np.ndarray]:
    """2 * per-task terms of P^O(x); lower-priority tasks are lumped under key -1."""
    n = ts[i].usage(ctx.resource).count
    requests = n + (m_i - 1) * xs
    out = {}
    if ctx.lower_hold:
        out[-1] = 2 * requests * ctx.lower_hold
    for j in ctx.higher:
        uj = ts[j].usage(ctx.resource)
        if uj.count == 0 or ctx.eta[j] == 0:
            continue
        cap = m_i * ctx.eta[j] * uj.count
        vd = ctx.var_delta[j]
        blocked = np.full_like(xs, cap) if vd is None else np.minimum(cap, requests * vd * uj.count)
        out[j] = 2 * blocked * uj.hold_time
    return out


def priority_inter(x: int, ts: TaskSet, i: int, m_i: int, ctx: PriorityContext) -> int:
    n = ts[i].usage(ctx.resource).count
    if not 0 <= x <= n:
        raise AnalysisError(f"x={x} outside [0, {n}]")
    terms = inter_doubled(np.array([x]), ts, i, m_i, ctx)
    return sum(int(v[0]) for v in terms.values()) // 2


def priority_interference(ts: TaskSet, i: int, m_i: int,
                          order: Sequence[int] | None = None) -> InterferenceBound:
    order = _order(ts, order)
    ti = ts[i]
    per_resource, limits = {}, {}
    for q in ti.resources:
        u = ti.usage(q)
        ctx = priority_context(ts, i, q, m_i, order)

        def bound(xs, u=u, ctx=ctx):
            return (intra_doubled(xs, u.count, u.hold_time, m_i),
                    inter_doubled(xs, ts, i, m_i, ctx))

        per_resource[q] = bound
        limits[q] = u.count
    return interference_total(per_resource, limits, scale=2)


def wcrt_priority(ts: TaskSet, i: int, m_i: int,
                  order: Sequence[int] | None = None) -> Fraction:
    if m_i < 1:
        raise AnalysisError("m must be >= 1")
    t = ts[i]
    return graham_bound(t.volume, t.longest_path,
                        priority_interference(ts, i, m_i, order).total, m_i)


def analyze_priority(ts: TaskSet, m: dict[int, int],
                     order: Sequence[int] | None = None) -> dict[int, Fraction]:
    return {t.id: wcrt_priority(ts, t.id, m[t.id], order) for t in ts.tasks}


def _min_processors(ts: TaskSet, i: int, order: Sequence[int]) -> tuple[int, Fraction]:
    """Grow m_i from the lock-free value until the bound fits, or past m."""
    t = ts[i]
    m_i = federated_processors(t.volume, t.longest_path, t.deadline)
    while True:
        r = wcrt_priority(ts, i, m_i, order)
        if r <= t.deadline or m_i > ts.processors:
            return m_i, r
        m_i += 1


def partition_priority(ts: TaskSet, order: Sequence[int] | None = None,
                       _cache: dict | None = None) -> Verdict:
    order = _order(ts, order)
    m, bounds = {}, {}
    for i in sorted(ts.ids):
        if _cache is None:
            m[i], bounds[i] = _min_processors(ts, i, order)
        else:
            # Task i's bound depends on the order only through its higher set.
            key = (i, frozenset(split_by_priority(order, i)[0]))
            if key not in _cache:
                _cache[key] = _min_processors(ts, i, order)
            m[i], bounds[i] = _cache[key]
    ok = sum(m.values()) <= ts.processors and all(
        bounds[i] <= ts[i].deadline for i in m)
    return Verdict("priority", ok, m, bounds,
                   None if ok else Reason.BUDGET_EXHAUSTED, priority_order=order)


class PermutationCapError(AnalysisError):
    pass


def search_priority_assignment(ts: TaskSet, cap: int = DEFAULT_PERMUTATION_CAP
                               ) -> tuple[tuple[int, ...] | None, Verdict | None]:
    """Try priority orders in lexicographic order; return the first that works.

    Returns ``(order, verdict)`` or ``(None, None)`` when none is schedulable.
    """
    if len(ts) > cap:
        raise PermutationCapError(f"{len(ts)} tasks exceed the permutation cap {cap}")
    cache: dict = {}
    for perm in itertools.permutations(sorted(ts.ids)):
        v = partition_priority(ts, perm, _cache=cache)
        if v.schedulable:
            return perm, v
    return None, None
