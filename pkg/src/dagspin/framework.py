"""Order-independent pieces of the response-time analysis.

The per-order analyzers all share the same skeleton::

    R_i <= (C_i + (m_i - 1) L_i + I_i) / m_i

where ``I_i`` collects key-path and delay blocking, weighted as in
:func:`observed_interference`. Each analyzer bounds the per-resource
contribution to ``I_i`` as a function of ``x``, the unknown number of
requests issued by key-path vertices, and the worst ``x`` is found by a
plain scan over ``0..N_iq``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np


class AnalysisError(ValueError):
    """Invalid analysis parameters."""


class InfeasibleTaskError(AnalysisError):
    """A task cannot meet its deadline on any number of processors."""


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def eta(d_i: int, d_j: int, t_j: int, both_access: bool) -> int:
    """Number of jobs of task j that can contend with one job of task i."""
    if t_j <= 0:
        raise AnalysisError(f"non-positive period {t_j}")
    if not both_access:
        return 0
    return ceil_div(d_i + d_j, t_j)


def graham_bound(C: int, L: int, I, m: int) -> Fraction:
    if m < 1:
        raise AnalysisError("at least one processor is required")
    return (Fraction(C) + (m - 1) * L + Fraction(I)) / m


@dataclass(frozen=True)
class BlockingDecomposition:
    """The six disjoint parts of a job's blocking time."""

    key_intra: int = 0
    key_inter: int = 0
    delay_intra: int = 0
    delay_inter: int = 0
    parallel_intra: int = 0
    parallel_inter: int = 0

    def total(self) -> int:
        return (self.key_intra + self.key_inter + self.delay_intra
                + self.delay_inter + self.parallel_intra + self.parallel_inter)

    def as_tuple(self) -> tuple[int, int, int, int, int, int]:
        return (self.key_intra, self.key_inter, self.delay_intra,
                self.delay_inter, self.parallel_intra, self.parallel_inter)


def observed_interference(b: BlockingDecomposition, m: int) -> int:
    """I_i evaluated on a concrete decomposition.

    Key-path intra blocking always has a same-task holder busy on another
    processor, so it is weighted (m - 1); key-path inter blocking gets m.
    Parallel blocking does not appear at all.
    """
    return ((m - 1) * b.key_intra + b.delay_intra
            + m * b.key_inter + b.delay_inter)


@dataclass(frozen=True)
class InterferenceBound:
    intra: dict[int, Fraction] = field(default_factory=dict)
    inter: dict[int, Fraction] = field(default_factory=dict)
    inter_by_task: dict[tuple[int, int], Fraction] = field(default_factory=dict)
    witness: dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> Fraction:
        return sum(self.intra.values(), Fraction(0)) + sum(self.inter.values(), Fraction(0))

    def resource_total(self, q: int) -> Fraction:
        return self.intra.get(q, Fraction(0)) + self.inter.get(q, Fraction(0))


# A per-resource bound takes the array x = 0..N and returns either the
# values array, or (intra array, {other task: inter array}).
ResourceBound = Callable[[np.ndarray], "np.ndarray | tuple[np.ndarray, Mapping[int, np.ndarray]]"]


def interference_total(per_resource: Mapping[int, ResourceBound],
                       limits: Mapping[int, int], scale: int = 1) -> InterferenceBound:
    """Maximize each resource's bound over integer x in [0, limit] and sum.

    Values are exact integers divided by ``scale`` (analyzers that work with
    half-integers pass doubled values and ``scale=2``). Ties pick the
    smallest x.
    """
    intra, inter, by_task, witness = {}, {}, {}, {}
    for q in sorted(per_resource):
        xs = np.arange(limits[q] + 1, dtype=np.int64)
        out = per_resource[q](xs)
        if isinstance(out, tuple):
            intra_v, inter_v = out
        else:
            intra_v, inter_v = out, {}
        intra_v = np.broadcast_to(np.asarray(intra_v, dtype=np.int64), xs.shape)
        inter_v = {j: np.broadcast_to(np.asarray(v, dtype=np.int64), xs.shape)
                   for j, v in inter_v.items()}
        total = intra_v + sum(inter_v.values(), np.zeros_like(xs))
        k = int(np.argmax(total))
        witness[q] = int(xs[k])
        intra[q] = Fraction(int(intra_v[k]), scale)
        inter[q] = Fraction(sum(int(v[k]) for v in inter_v.values()), scale)
        for j, v in inter_v.items():
            by_task[(q, j)] = Fraction(int(v[k]), scale)
    return InterferenceBound(intra, inter, by_task, witness)


class Reason(str, enum.Enum):
    DENOMINATOR_NONPOSITIVE = "denominator_nonpositive"
    BUDGET_EXHAUSTED = "budget_exhausted"
    INFEASIBLE_TASK = "infeasible_task"


@dataclass
class Verdict:
    """Outcome of a processor partitioning run."""

    order: str
    schedulable: bool
    m: dict[int, int]
    bounds: dict[int, Fraction]
    reason: Reason | None = None
    iterations: int = 0
    priority_order: tuple[int, ...] | None = None

    @property
    def used(self) -> int:
        return sum(self.m.values())

    def summary(self) -> str:
        head = "schedulable" if self.schedulable else f"unschedulable ({self.reason.value})"
        return f"{self.order}: {head}, processors used {self.used}"


def federated_processors(C: int, L: int, D: int) -> int:
    """Processors a lock-free task needs under federated scheduling."""
    if D <= L:
        raise InfeasibleTaskError(f"deadline {D} not larger than longest path {L}")
    return max(1, ceil_div(C - L, D - L))
