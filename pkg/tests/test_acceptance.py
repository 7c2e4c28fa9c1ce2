"""Acceptance checks, one test per criterion.

Run with ``pytest tests/test_acceptance.py`` or directly as a script; either
way a PASS/FAIL line per criterion is printed at the end. The sweep behind
criteria 6 and 7 takes several minutes on one core and writes its CSVs to
``results/`` at the repository root.
"""

import itertools
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from dagspin import (fifo_intra, fifo_interference, interference_total, load_openmp_dataset,
                     longest_path, make_task, min_processors_unordered, priority_intra,
                     replay_trace, wcrt_fifo, wcrt_unordered)
from dagspin.fifo import _competitors, inter_doubled, intra_doubled
from dagspin.harness import (FUZZ_CONFIG, SIM_CONFIG, SweepSpec, acceptance_ratio,
                             identity_fuzz, rows_to_csv, soundness_campaign)
from dagspin.simulator import check_identities, decompose_blocking, extract_key_path
from dagspin.worked_examples import area_split_example, mixed_blocking_example
from dagspin.workload import GenConfig, gen_taskset

from oracles import all_path_lengths, f_inter, f_intra, smallest_m_unordered

RESULTS = Path(__file__).resolve().parents[1] / "results"

SMALL = GenConfig(vertices=(10, 25), wcet=(5, 40), total_accesses=(4, 40), max_hold=(1, 8),
                  resource_types=(1, 3), n_tasks=(1, 4))

AXIS_VALUES = {
    "u_norm": (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9),
    "total_accesses": (16, 128, 256, 384, 512, 640, 768, 896, 1008),
    "resource_types": (1, 2, 4, 6, 8, 10, 12),
    "max_hold": (5, 10, 15, 20, 30, 40, 50, 60),
}


def test_mixed_blocking_example(criterion):
    criterion(1, "mixed-blocking schedule: six-part split, key path, len* and idle bound")
    t0 = time.perf_counter()
    ts, recs = mixed_blocking_example()
    trace = replay_trace(ts, recs)
    job = (0, 0)
    kp = extract_key_path(trace, job)
    d = decompose_blocking(trace, job, kp)
    r = check_identities(trace, job, kp, d)
    elapsed = time.perf_counter() - t0
    criterion.detail(f"split {d.as_tuple()}, key path {kp}, len* {r.len_star}, "
                     f"idle {r.idle} <= {r.idle_bound}, {elapsed:.3f}s")
    assert d.as_tuple() == (2, 1, 1, 2, 1, 1)
    assert kp == (0, 3, 5, 6)  # v1, v4, v6, v7 counted from one
    assert r.len_star == 8 and r.key_path_length == 5
    assert r.idle_bound == 12 and r.idle <= 12
    assert r.ok, r.violations
    assert elapsed < 1


def test_area_split_example(criterion):
    criterion(2, "area-split schedule: B 5, W 10, idle 9 on 3 processors over [0, 8)")
    ts, recs = area_split_example()
    trace = replay_trace(ts, recs)
    job = (0, 0)
    kp = extract_key_path(trace, job)
    r = check_identities(trace, job, kp, decompose_blocking(trace, job, kp))
    criterion.detail(f"m {r.processors}, f-r {r.response}, B {r.blocking}, W {r.working}, idle {r.idle}")
    assert (r.processors, r.response) == (3, 8)
    assert (r.blocking, r.working, r.idle) == (5, 10, 9)
    assert r.processors * r.response == r.blocking + r.working + r.idle == 24
    assert r.ok, r.violations


def test_identity_fuzz(criterion):
    criterion(3, "trace identities on >= 1000 simulated jobs, every discipline and grant mode")
    rep = identity_fuzz(FUZZ_CONFIG, 60)
    criterion.detail(f"{rep.jobs} jobs in {rep.runs} runs, by mode {rep.by_mode}, "
                     f"{len(rep.failures)} failures")
    assert rep.jobs >= 1000
    assert set(rep.by_mode) == {"fifo", "priority", "unordered-random", "unordered-adversarial"}
    assert all(n > 0 for n in rep.by_mode.values())
    assert not rep.failures, [(m, k, r.violations) for m, k, r in rep.failures[:5]]


def test_bound_soundness(criterion):
    criterion(4, "simulated responses never exceed bounds: >= 200 pairs x 10 seeds")
    rep = soundness_campaign(SIM_CONFIG, 120, seeds=10)
    criterion.detail(rep.summary())
    assert rep.pairs >= 200
    assert rep.placement_failures == 0 and rep.runs == 10 * rep.pairs
    assert rep.ok, [(v.kind, v.order, v.job, v.detail) for v in rep.violations[:5]]


def test_oracle_equivalences(criterion):
    criterion(5, "oracles: smallest m, max over x by enumeration, longest path")
    # (a) closed-form processor count against a linear search
    checked = 0
    k = 0
    while checked < 200:
        ts = gen_taskset(SMALL, (31, k))
        k += 1
        for i in ts.ids:
            got = min_processors_unordered(ts, i)
            if got is None:
                continue
            assert got == smallest_m_unordered(ts, i)
            checked += 1
    # (b) per-resource maxima against enumeration of the whole x space
    rng = np.random.default_rng(32)
    joint = 0
    for k in range(80):
        ts = gen_taskset(SMALL, (33, k))
        m = {j: int(rng.integers(1, 5)) for j in ts.ids}
        for i in ts.ids:
            t = ts[i]
            qs = t.resources
            got = fifo_interference(ts, i, m)
            ranges = [range(t.usage(q).count + 1) for q in qs]
            if np.prod([len(r) for r in ranges]) > 20000:
                continue

            def value(q, x):
                u = t.usage(q)
                return f_intra(x, u.count, u.hold_time, m[i]) + f_inter(x, ts, i, q, m)

            best = max(sum(value(q, x) for q, x in zip(qs, xs)) for xs in itertools.product(*ranges))
            assert got.total == best
            for q in qs:
                vals = [value(q, x) for x in range(t.usage(q).count + 1)]
                assert got.witness[q] == vals.index(max(vals))
            joint += 1
            # widening the scanned range with repeats of feasible points changes nothing
            per_resource, wide = {}, {}
            for q in qs:
                u = t.usage(q)
                comp = _competitors(ts, i, q, m)

                def clipped(xs, u=u, comp=comp):
                    xs = np.minimum(xs, u.count)
                    return intra_doubled(xs, u.count, u.hold_time, m[i]), inter_doubled(xs, u.count, m[i], comp)

                per_resource[q] = clipped
                wide[q] = u.count + 7
            wider = interference_total(per_resource, wide, scale=2)
            assert wider.total == got.total and wider.witness == got.witness
    assert joint >= 100
    # (c) longest path against enumeration of every path
    rng = np.random.default_rng(34)
    for k in range(100):
        n = int(rng.integers(2, 31))
        wcets = rng.integers(0, 40, size=n).tolist()
        edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.15]
        t = make_task(0, wcets, edges, period=10**6)
        assert longest_path(t) == max(all_path_lengths(t))
    criterion.detail(f"{checked} processor counts, {joint} joint x-space scans, 100 DAGs")


@pytest.fixture(scope="module")
def sweeps():
    RESULTS.mkdir(exist_ok=True)
    out = {}
    for axis, values in AXIS_VALUES.items():
        rows = acceptance_ratio(SweepSpec(axis, values, sets_per_point=100))
        rows_to_csv(rows, RESULTS / f"sweep_{axis}.csv")
        out[axis] = rows
    return out


def curves(rows):
    by = {}
    for r in rows:
        if r["analyzer"].startswith("XU-"):
            by.setdefault(r["analyzer"], []).append(r)
    return by


def test_dominance(criterion, sweeps):
    criterion(6, "FIFO bound <= unordered bound on 500 paired sets; F^I = P^I; XU-F >= XU-U")
    rng = np.random.default_rng(35)
    tasks = xs = 0
    for k in range(500):
        ts = gen_taskset(SMALL, (36, k))
        m = {j: int(rng.integers(1, 6)) for j in ts.ids}
        for i in ts.ids:
            assert wcrt_fifo(ts, i, m) <= wcrt_unordered(ts, i, m[i])
            tasks += 1
            for q in ts[i].resources:
                u = ts[i].usage(q)
                for x in range(u.count + 1):
                    assert priority_intra(x, u.count, u.hold_time, m[i]) == fifo_intra(x, u.count, u.hold_time, m[i])
                    xs += 1
    points = 0
    for axis, rows in sweeps.items():
        c = curves(rows)
        for f, u in zip(c["XU-F"], c["XU-U"]):
            assert f["value"] == u["value"] and f["total"] == u["total"]
            assert f["accepted"] >= u["accepted"], (axis, f["value"])
            points += 1
    criterion.detail(f"{tasks} tasks, {xs} x values, {points} sweep points")


def test_trends(criterion, sweeps):
    criterion(7, "acceptance ratios weakly decrease along all four axes (100 sets/point)")
    notes = []
    for axis, rows in sweeps.items():
        for name, pts in curves(rows).items():
            assert all(p["ratio"] not in ("skipped", "nan") for p in pts)
            ratios = [p["accepted"] / p["total"] for p in pts]
            ups = [b - a for a, b in zip(ratios, ratios[1:]) if b > a]
            notes.append(f"{axis}/{name} {' '.join(f'{r:.2f}' for r in ratios)}")
            assert len(ups) <= 1 and all(u <= 0.05 for u in ups), (axis, name, ratios)
            assert ratios[0] > ratios[-1], (axis, name, ratios)
    criterion.detail("; ".join(notes))


TABLE = {
    # name: (C, L, {lock: (N, L)})
    "alignment.for": (313168, 11446, {0: (22, 2), 1: (1, 2), 2: (2, 2)}),
    "alignment.single": (315981, 9980, {0: (22, 2), 1: (1, 2), 2: (2, 2)}),
    "fft": (274, 58, {0: (21, 2), 1: (1, 4), 2: (2, 2)}),
    "fib": (353, 20, {0: (20, 2), 2: (2, 2)}),
    "sort": (1757, 217, {0: (20, 2), 1: (2, 4), 2: (2, 2)}),
    "floorplan": (5843, 92, {0: (36, 2), 1: (6, 1), 2: (2, 2), 4: (4, 1)}),
    "MatrixMultiplication": (5873246, 106983, {1: (3, 7), 3: (5, 4)}),
    "Square": (50000812, 1000066, {5: (20, 5), 6: (50, 1), 7: (50, 105), 8: (50, 79), 9: (50, 1)}),
}


def test_openmp_table(criterion):
    criterion(8, "bundled OpenMP measurements match all eight measured rows typed in by hand")
    progs = load_openmp_dataset()
    assert [p.name for p in progs] == list(TABLE)
    for p in progs:
        c, l, locks = TABLE[p.name]
        assert (p.volume, p.longest_path) == (c, l), p.name
        assert {q: (u.count, u.hold_time) for q, u in p.usage.items()} == locks, p.name
    by = {p.name: p for p in progs}
    assert (by["fib"].volume, by["fib"].longest_path) == (353, 20)
    assert (by["Square"].usage[7].count, by["Square"].usage[7].hold_time) == (50, 105)
    criterion.detail("8 rows exact")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-p", "no:cacheprovider"]))
