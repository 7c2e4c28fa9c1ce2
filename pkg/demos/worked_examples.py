"""Replay the two hand-built schedules and print their time accounting.

    python demos/worked_examples.py
"""

from dagspin import replay_trace
from dagspin.simulator import check_identities, decompose_blocking, extract_key_path, write_trace
from dagspin.worked_examples import area_split_example, mixed_blocking_example

NAMES = ("key intra", "key inter", "delay intra", "delay inter", "parallel intra", "parallel inter")

for title, build in (("mixed blocking", mixed_blocking_example), ("area split", area_split_example)):
    ts, records = build()
    trace = replay_trace(ts, records)
    job = (0, 0)
    kp = extract_key_path(trace, job)
    d = decompose_blocking(trace, job, kp)
    r = check_identities(trace, job, kp, d)
    print(f"== {title}")
    print(write_trace(trace.with_idle()), end="")
    print("key path:", " -> ".join(f"v{v + 1}" for v in kp))
    for name, value in zip(NAMES, d.as_tuple()):
        print(f"  {name:15s} {value}")
    print(f"  {r.processors} x {r.response} = B {r.blocking} + W {r.working} + idle {r.idle}")
    print(f"  len* {r.len_star}, idle bound {r.idle_bound}, "
          f"response {r.response} <= {r.observed_bound}")
    print("  identities hold" if r.ok else f"  violations: {r.violations}")
    print()
