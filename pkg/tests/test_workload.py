import math
from fractions import Fraction

import numpy as np
import pytest

from dagspin.workload import (GenConfig, GenerationError, PlacementError, connect_weakly,
                              fork_join_task, gen_dag, gen_taskset, load_openmp_dataset,
                              openmp_taskset, place_requests, read_config, split_accesses)
from dagspin.model import make_task

SMALL = GenConfig(vertices=(10, 25), wcet=(5, 40), total_accesses=(4, 40), max_hold=(1, 8),
                  resource_types=(1, 3), n_tasks=(1, 4))


def weakly_connected(task):
    seen, todo = {0}, [0]
    while todo:
        v = todo.pop()
        for w in task.successors[v] + task.predecessors[v]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return len(seen) == len(task.vertices)


def test_connect_weakly():
    edges = connect_weakly(5, [(0, 1), (3, 4)])
    assert all(u < v for u, v in edges)
    assert {(0, 1), (3, 4)} <= set(edges) and len(edges) == 5 - 1
    assert connect_weakly(1, []) == []


def test_gen_dag_shape():
    cfg = GenConfig.desk()
    for k in range(15):
        t = gen_dag(cfg, k)
        real = [v for v in t.vertices if v.wcet > 0]
        assert 20 <= len(real) <= 60
        assert all(250 <= v.wcet <= 600 for v in real)
        assert weakly_connected(t)
        assert t.period == t.deadline
        assert t.deadline in (math.ceil(Fraction(t.longest_path) * 8), math.ceil(Fraction(t.longest_path) * 4))


def test_taskset_properties():
    for k in range(20):
        ts = gen_taskset(SMALL, k)
        assert all(t.volume > t.deadline for t in ts.tasks)
        u = sum((t.utilization for t in ts.tasks), Fraction(0))
        assert ts.processors == max(1, math.ceil(u / SMALL.u_norm))
        assert 1 <= len(ts.resources) <= 3
        for t in ts.tasks:
            for q, us in t.resource_usage.items():
                assert us.count > 0 and 1 <= us.hold_time <= 8


def test_access_split_extends():
    small = split_accesses(128, 4, np.random.default_rng(5))
    big = split_accesses(256, 4, np.random.default_rng(5))
    assert sum(small) == 128 and sum(big) == 256
    assert all(a <= b for a, b in zip(small, big))


def test_axes_share_random_numbers():
    base = GenConfig.desk()
    a = gen_taskset(base, 7)
    b = gen_taskset(GenConfig.desk(total_accesses=(512, 512)), 7)
    c = gen_taskset(GenConfig.desk(max_hold=(40, 40)), 7)
    assert [t.wcet for t in a.tasks] == [t.wcet for t in b.tasks] == [t.wcet for t in c.tasks]
    for q in a.resources:
        for ta, tb, tc in zip(a.tasks, b.tasks, c.tasks):
            if q in ta.resource_usage:
                assert tb.resource_usage[q].count >= ta.resource_usage[q].count
                assert tc.resource_usage[q].hold_time >= ta.resource_usage[q].hold_time


def test_deterministic():
    assert repr(gen_taskset(SMALL, 3)) == repr(gen_taskset(SMALL, 3))
    assert repr(gen_taskset(SMALL, 3)) != repr(gen_taskset(SMALL, 4))


def test_generation_gives_up():
    cfg = GenConfig(vertices=(1, 1), wcet=(5, 5), max_retries=5)
    with pytest.raises(GenerationError):
        gen_taskset(cfg, 0)


def test_placements_match_usage():
    for k in range(20):
        ts = gen_taskset(SMALL, k)
        for t in ts.tasks:
            try:
                ps = place_requests(t, k)
            except PlacementError:
                continue
            for q, us in t.resource_usage.items():
                mine = [p for p in ps if p.resource == q]
                assert len(mine) == us.count
                assert max(p.length for p in mine) == us.hold_time
                assert all(1 <= p.length <= us.hold_time for p in mine)
            for v in {p.vertex for p in ps}:
                spans = sorted((p.offset, p.offset + p.length) for p in ps if p.vertex == v)
                assert spans[0][0] >= 0 and spans[-1][1] <= t.wcet[v]
                assert all(a[1] <= b[0] for a, b in zip(spans, spans[1:]))
            t.with_placements(ps)


def test_placement_without_room():
    t = make_task(0, [2, 2], [(0, 1)], period=10, resource_usage={0: (1, 3)})
    with pytest.raises(PlacementError):
        place_requests(t)


def test_fork_join():
    t = fork_join_task(0, 353, 20, 160)
    assert (t.volume, t.longest_path) == (353, 20)
    t = fork_join_task(0, 58, 58, 100)
    assert (t.volume, t.longest_path) == (58, 58)
    with pytest.raises(ValueError):
        fork_join_task(0, 10, 20, 100)


def test_openmp_sets():
    progs = {(p.volume, p.longest_path) for p in load_openmp_dataset()}
    for s in range(10):
        ts = openmp_taskset(s)
        assert 2 <= len(ts.tasks) <= 5
        assert {(t.volume, t.longest_path) for t in ts.tasks} <= progs
        assert len({(t.volume, t.longest_path) for t in ts.tasks}) == len(ts.tasks)


def test_config_file(tmp_path):
    p = tmp_path / "gen.cfg"
    p.write_text("# small\nvertices = 10, 20\nu_norm = 3/10  # inline\nld_ratios = 1/8,1/4\n")
    cfg = GenConfig.from_mapping(read_config(p))
    assert cfg.vertices == (10, 20) and cfg.u_norm == Fraction(3, 10)
    assert GenConfig.from_mapping(cfg.to_mapping()) == cfg
    with pytest.raises(ValueError):
        GenConfig.from_mapping({"vertexes": "3"})
    with pytest.raises(ValueError):
        GenConfig(vertices=(5, 2))
