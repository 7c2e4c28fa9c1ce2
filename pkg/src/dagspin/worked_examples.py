"""Two small hand-built schedules with known blocking numbers.

Both use the same seven-vertex DAG (ids 0..6, volume 10, longest path 5)
running on processors 0..2, next to a small second task on processor 3.
They are handy for checking the trace analysis by hand.
"""

from __future__ import annotations

from .model import RequestPlacement, TaskSet, make_task
from .simulator import EXEC, SPIN, Interval

DAG_WCETS = (1, 2, 1, 2, 2, 1, 1)
DAG_EDGES = ((0, 1), (0, 2), (0, 3), (0, 4), (1, 5), (3, 5), (5, 6), (2, 6), (4, 6))


def _run(job, proc, start, end, vertex, resource=None):
    return Interval(job, proc, start, end, EXEC, vertex, resource, None, job[0])


def _spin(job, proc, start, end, vertex, resource, holder):
    return Interval(job, proc, start, end, SPIN, vertex, resource, holder, job[0])


def mixed_blocking_example() -> tuple[TaskSet, list[Interval]]:
    """Every one of the six blocking parts is non-zero.

    Vertices 1, 2 and 3 of task 0 are entire critical sections on resource 0.
    Task 1 is a diamond of unit vertices whose middle two lock resource 0.
    Expected: decomposition (2, 1, 1, 2, 1, 1), key path (0, 3, 5, 6),
    len* 8, idle 12, response 10 equal to the observed bound.
    """
    a = make_task(0, DAG_WCETS, DAG_EDGES, period=12, resource_usage={0: (3, 2)},
                  placements=[RequestPlacement(1, 0, 0, 2), RequestPlacement(2, 0, 0, 1),
                              RequestPlacement(3, 0, 0, 2)])
    b = make_task(1, (1, 1, 1, 1), ((0, 1), (0, 2), (1, 3), (2, 3)), period=12,
                  resource_usage={0: (2, 1)},
                  placements=[RequestPlacement(1, 0, 0, 1), RequestPlacement(2, 0, 0, 1)])
    ts = TaskSet((a, b), processors=4, resources=frozenset({0}))
    i, j = (0, 0), (1, 0)
    records = [
        _run(i, 0, 0, 1, 0),
        _spin(i, 0, 1, 2, 1, 0, 1),
        _run(i, 0, 2, 4, 1, 0),
        _spin(i, 1, 1, 2, 2, 0, 1),
        _spin(i, 1, 2, 4, 2, 0, 0),
        _spin(i, 1, 4, 5, 2, 0, 1),
        _run(i, 1, 5, 6, 2, 0),
        _run(i, 2, 1, 3, 4),
        _spin(i, 2, 3, 4, 3, 0, 0),
        _spin(i, 2, 4, 5, 3, 0, 1),
        _spin(i, 2, 5, 6, 3, 0, 0),
        _run(i, 2, 6, 8, 3, 0),
        _run(i, 2, 8, 9, 5),
        _run(i, 2, 9, 10, 6),
        _run(j, 3, 0, 1, 0),
        _run(j, 3, 1, 2, 1, 0),
        _spin(j, 3, 2, 4, 2, 0, 0),
        _run(j, 3, 4, 5, 2, 0),
        _run(j, 3, 5, 6, 3),
    ]
    return ts, records


def area_split_example() -> tuple[TaskSet, list[Interval]]:
    """Processor area split into spinning, working and idle time.

    Vertices 1, 2 and 3 of task 0 each start with a unit critical section.
    Expected: B 5, W 10, idle 9, finish 8, so 3 * 8 = 5 + 10 + 9.
    """
    a = make_task(0, DAG_WCETS, DAG_EDGES, period=12, resource_usage={0: (3, 1)},
                  placements=[RequestPlacement(v, 0, 0, 1) for v in (1, 2, 3)])
    b = make_task(1, (1, 1), ((0, 1),), period=12, resource_usage={0: (1, 1)},
                  placements=[RequestPlacement(1, 0, 0, 1)])
    ts = TaskSet((a, b), processors=4, resources=frozenset({0}))
    i, j = (0, 0), (1, 0)
    records = [
        _run(i, 0, 0, 1, 0),
        _run(i, 0, 1, 2, 1, 0),
        _run(i, 0, 2, 3, 1),
        _run(i, 0, 3, 5, 4),
        _spin(i, 1, 1, 2, 2, 0, 0),
        _spin(i, 1, 2, 3, 2, 0, 1),
        _run(i, 1, 3, 4, 2, 0),
        _spin(i, 2, 1, 2, 3, 0, 0),
        _spin(i, 2, 2, 3, 3, 0, 1),
        _spin(i, 2, 3, 4, 3, 0, 0),
        _run(i, 2, 4, 5, 3, 0),
        _run(i, 2, 5, 6, 3),
        _run(i, 2, 6, 7, 5),
        _run(i, 2, 7, 8, 6),
        _run(j, 3, 0, 1, 0),
        _spin(j, 3, 1, 2, 1, 0, 0),
        _run(j, 3, 2, 3, 1, 0),
    ]
    return ts, records
