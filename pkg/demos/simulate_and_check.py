"""Partition a small task set with FIFO locks, simulate it, and compare.

Each completed job's response is printed next to its analytical bound,
along with the result of the trace identity checks.

    python demos/simulate_and_check.py [seed]
"""

import sys

from dagspin import partition_fifo, place_all, simulate
from dagspin.harness import SIM_CONFIG, identity_reports
from dagspin.workload import gen_taskset

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 3
for k in range(seed, seed + 50):
    ts = gen_taskset(SIM_CONFIG, k)
    v = partition_fifo(ts)
    if v.schedulable:
        break
else:
    sys.exit("no schedulable set found; try another seed")

print(f"set {k}: {len(ts)} tasks on {ts.processors} processors, clusters {v.m}")
trace = simulate(place_all(ts, k), v.m, "fifo", seed=k)
checks = {r.job: r for r in identity_reports(trace)}
for job in trace.completed_jobs():
    resp = trace.jobs[job].response
    bound = v.bounds[job[0]]
    note = ""
    if job in checks:
        note = "identities ok" if checks[job].ok else "; ".join(checks[job].violations)
    print(f"job {job[0]}.{job[1]}: response {resp:>4}  bound {float(bound):8.2f}  {note}")
