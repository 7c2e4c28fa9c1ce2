"""Generate a few task sets and compare the three lock-ordering analyses.

For each set we print the processors each analysis asks for and whether it
fits the platform. FIFO never needs more than unordered; the priority
analysis also searches the task order.

    python demos/compare_analyses.py [n_sets]
"""

import sys

from dagspin.harness import run_analyzer
from dagspin.workload import GenConfig, gen_taskset

n = int(sys.argv[1]) if len(sys.argv) > 1 else 8
cfg = GenConfig(u_norm=0.6)
print(f"{'set':>3}  {'tasks':>5}  {'procs':>5}  " + "  ".join(f"{a:>12}" for a in ("XU-U", "XU-F", "XU-P")))
for k in range(n):
    ts = gen_taskset(cfg, (2024, k))
    cells = []
    for a in ("XU-U", "XU-F", "XU-P"):
        v = run_analyzer(a, ts)
        cells.append(f"{v.used:>3} used, {'ok' if v.schedulable else 'no':>3}")
    print(f"{k:>3}  {len(ts):>5}  {ts.processors:>5}  " + "  ".join(f"{c:>12}" for c in cells))
