"""Analysis for spin locks that serve waiting requests in no particular order."""

from __future__ import annotations

from fractions import Fraction

from .framework import (AnalysisError, Reason, Verdict, ceil_div, eta,
                        graham_bound)
from .model import TaskSet


def intra_bound_unordered(n: int, hold: int, m: int) -> int:
    """Intra-task interference from ``n`` requests of length ``hold``."""
    if m < 1:
        raise AnalysisError("m must be >= 1")
    return (m - 1) * n * hold


def inter_bound_unordered(m: int, eta_ij: int, n_j: int, hold_j: int) -> int:
    """Interference caused by another task's requests on one resource."""
    if m < 1:
        raise AnalysisError("m must be >= 1")
    return m * eta_ij * n_j * hold_j


def _own_lock_demand(ts: TaskSet, i: int) -> int:
    """Sum of N_iq * L_iq over the resources task i accesses."""
    t = ts[i]
    return sum(t.usage(q).count * t.usage(q).hold_time for q in t.resources)


def _foreign_lock_demand(ts: TaskSet, i: int) -> int:
    """Sum over other tasks j and shared resources q of eta * N_jq * L_jq.

    This term of the bound does not depend on m_i.
    """
    ti = ts[i]
    total = 0
    for tj in ts.others(i):
        for q in ti.resources:
            e = eta(ti.deadline, tj.deadline, tj.period, tj.accesses(q))
            u = tj.usage(q)
            total += e * u.count * u.hold_time
    return total


def unordered_interference(ts: TaskSet, i: int, m_i: int) -> int:
    return ((m_i - 1) * _own_lock_demand(ts, i)
            + m_i * _foreign_lock_demand(ts, i))


def wcrt_unordered(ts: TaskSet, i: int, m_i: int) -> Fraction:
    t = ts[i]
    return graham_bound(t.volume, t.longest_path, unordered_interference(ts, i, m_i), m_i)


def min_processors_unordered(ts: TaskSet, i: int) -> int | None:
    """Smallest m_i meeting the deadline, or None when no m_i can.

    Solving ``wcrt_unordered(m) <= D`` for m gives
    ``m >= (C - L - S) / (D - X - L - S)`` with S the task's own lock demand
    and X the foreign lock demand; a non-positive denominator means no
    processor count is enough.
    """
    t = ts[i]
    own = t.longest_path + _own_lock_demand(ts, i)
    denom = t.deadline - (_foreign_lock_demand(ts, i) + own)
    if denom <= 0:
        return None
    return max(1, ceil_div(t.volume - own, denom))


def partition_unordered(ts: TaskSet) -> Verdict:
    """Assign processors task by task in id order until the budget runs out."""
    m: dict[int, int] = {}
    bounds: dict[int, Fraction] = {}
    available = ts.processors
    for t in sorted(ts.tasks, key=lambda t: t.id):
        m_i = min_processors_unordered(ts, t.id)
        if m_i is None:
            return Verdict("unordered", False, m, bounds, Reason.DENOMINATOR_NONPOSITIVE)
        if m_i > available:
            m[t.id] = m_i
            return Verdict("unordered", False, m, bounds, Reason.BUDGET_EXHAUSTED)
        available -= m_i
        m[t.id] = m_i
        bounds[t.id] = wcrt_unordered(ts, t.id, m_i)
    return Verdict("unordered", True, m, bounds)


def analyze_unordered(ts: TaskSet, m: dict[int, int]) -> dict[int, Fraction]:
    return {t.id: wcrt_unordered(ts, t.id, m[t.id]) for t in ts.tasks}
