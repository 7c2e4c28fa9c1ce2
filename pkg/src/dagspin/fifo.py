"""Analysis for FIFO-ordered spin locks.

The intra-task term contains a half-integer, so the vectorized helpers
below work on doubled values and the public scalar functions divide by two.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .framework import (AnalysisError, InterferenceBound, Reason, Verdict,
                        eta, federated_processors, graham_bound,
                        interference_total)
from .model import TaskSet


def delta_cap(n: int, m: int) -> Fraction:
    """alpha * (m - (alpha + 1) / 2) with alpha = min(n, m)."""
    a = min(n, m)
    return Fraction(a * (2 * m - a - 1), 2)


def intra_doubled(xs: np.ndarray, n: int, hold: int, m: int) -> np.ndarray:
    """2 * F^I(x) for every x in ``xs``."""
    a = min(n, m)
    base = 2 * (n - xs) * (m - 1) * hold
    return base - np.where(xs == 0, a * (2 * m - a - 1) * hold, 0)


def inter_doubled(xs: np.ndarray, n_i: int, m_i: int,
                  competitors: Mapping[int, tuple[int, int, int, int]]) -> dict[int, np.ndarray]:
    """2 * the per-competitor terms of F^O(x).

    ``competitors`` maps task id j to (m_j, eta_ij, N_jq, L_jq).
    """
    out = {}
    fifo_requests = n_i + (m_i - 1) * xs
    for j, (m_j, e, n_j, hold_j) in competitors.items():
        out[j] = 2 * np.minimum(m_i * e * n_j, fifo_requests * m_j) * hold_j
    return out


def _check_x(x: int, n: int):
    if not 0 <= x <= n:
        raise AnalysisError(f"x={x} outside [0, {n}]")


def fifo_intra(x: int, n: int, hold: int, m: int) -> Fraction:
    _check_x(x, n)
    return Fraction(int(intra_doubled(np.array([x]), n, hold, m)[0]), 2)


def fifo_inter(x: int, n_i: int, m_i: int,
               competitors: Sequence[tuple[int, int, int, int]]) -> int:
    """F^O(x) for explicit competitor tuples (m_j, eta_ij, N_jq, L_jq)."""
    _check_x(x, n_i)
    terms = inter_doubled(np.array([x]), n_i, m_i, dict(enumerate(competitors)))
    return sum(int(v[0]) for v in terms.values()) // 2


def _competitors(ts: TaskSet, i: int, q: int, m: Mapping[int, int]):
    ti = ts[i]
    comp = {}
    for tj in ts.others(i):
        if not tj.accesses(q):
            continue
        u = tj.usage(q)
        comp[tj.id] = (m[tj.id], eta(ti.deadline, tj.deadline, tj.period, True),
                       u.count, u.hold_time)
    return comp


def fifo_interference(ts: TaskSet, i: int, m: Mapping[int, int]) -> InterferenceBound:
    ti = ts[i]
    m_i = m[i]
    per_resource, limits = {}, {}
    for q in ti.resources:
        u = ti.usage(q)
        comp = _competitors(ts, i, q, m)

        def bound(xs, u=u, comp=comp):
            return (intra_doubled(xs, u.count, u.hold_time, m_i),
                    inter_doubled(xs, u.count, m_i, comp))

        per_resource[q] = bound
        limits[q] = u.count
    return interference_total(per_resource, limits, scale=2)


def wcrt_fifo(ts: TaskSet, i: int, m: Mapping[int, int]) -> Fraction:
    """Response-time bound of task i given every task's processor count."""
    if any(v < 1 for v in m.values()):
        raise AnalysisError("every task needs at least one processor")
    t = ts[i]
    return graham_bound(t.volume, t.longest_path, fifo_interference(ts, i, m).total, m[i])


def analyze_fifo(ts: TaskSet, m: Mapping[int, int]) -> dict[int, Fraction]:
    return {t.id: wcrt_fifo(ts, t.id, m) for t in ts.tasks}


def partition_fifo(ts: TaskSet, history: list | None = None) -> Verdict:
    """Iterative partitioning: grow every failing task by one per sweep.

    Tasks are visited in ascending id order and an increment is visible to
    the tasks analysed later in the same sweep. Pass a list as ``history`` to
    collect the m vector after every sweep.
    """
    order = sorted(t.id for t in ts.tasks)
    m = {i: federated_processors(ts[i].volume, ts[i].longest_path, ts[i].deadline)
         for i in order}
    sweeps = 0
    while True:
        sweeps += 1
        update = False
        bounds = {}
        for i in order:
            r = wcrt_fifo(ts, i, m)
            bounds[i] = r
            if r > ts[i].deadline:
                m[i] += 1
                update = True
        if history is not None:
            history.append(dict(m))
        if sum(m.values()) > ts.processors:
            return Verdict("fifo", False, dict(m), bounds, Reason.BUDGET_EXHAUSTED, sweeps)
        if not update:
            return Verdict("fifo", True, dict(m), bounds, None, sweeps)
