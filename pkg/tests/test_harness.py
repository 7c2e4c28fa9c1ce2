import csv
import io
import json
import subprocess
import sys

import pytest

from dagspin import TaskSet, make_task
from dagspin.cli import main
from dagspin.harness import (FUZZ_CONFIG, GEN_FAILED, SIM_CONFIG, SweepSpec, _write_bundle,
                             acceptance_ratio, identity_fuzz, report_to_json, rows_to_csv,
                             run_analyzer, soundness_campaign)
from dagspin.model import dump_taskset
from dagspin.simulator import write_trace
from dagspin.worked_examples import mixed_blocking_example
from dagspin.workload import GenConfig

SMALL = GenConfig(vertices=(10, 25), wcet=(5, 40), total_accesses=(4, 40), max_hold=(1, 8),
                  resource_types=(1, 3), n_tasks=(1, 4))


def test_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec("colour", (1, 2))
    with pytest.raises(ValueError):
        SweepSpec("u_norm", (0.5, 0.3))
    with pytest.raises(ValueError):
        SweepSpec("u_norm", (0.5,), analyzers=("XU-Z",))
    s = SweepSpec("task_count", (2, 3))
    assert s.config_at(3).n_tasks == (3, 3)


def test_spec_file(tmp_path):
    p = tmp_path / "s.cfg"
    p.write_text("axis = max_hold\nvalues = 5,10\nsets_per_point = 3\nvertices = 10,20\n")
    s = SweepSpec.from_file(p)
    assert s.values == ("5", "10") and s.sets_per_point == 3
    assert s.config_at("10").max_hold == (10, 10) and s.base.vertices == (10, 20)


def test_small_sweep_rows():
    spec = SweepSpec("u_norm", (0.2, 0.6), base=SMALL, sets_per_point=6)
    rows = acceptance_ratio(spec)
    assert [(r["value"], r["analyzer"]) for r in rows] == [
        (v, a) for v in ("0.2", "0.6") for a in ("XU-U", "XU-F", "XU-P")]
    for r in rows:
        assert r["total"] == 6 and 0 <= r["accepted"] <= 6
    for k in range(0, 6, 3):
        u, f, p = (rows[k + j]["accepted"] for j in range(3))
        assert u <= f
    text = rows_to_csv(rows)
    assert list(csv.DictReader(io.StringIO(text)))[0]["ratio"] == rows[0]["ratio"]
    assert acceptance_ratio(spec, workers=2) == rows


def test_cap_and_failures_are_reported():
    spec = SweepSpec("task_count", (3,), base=SMALL, sets_per_point=2, permutation_cap=2)
    rows = acceptance_ratio(spec)
    assert [r["ratio"] for r in rows if r["analyzer"] == "XU-P"] == ["skipped"]
    bad = SweepSpec("u_norm", (0.5,), base=GenConfig(vertices=(1, 1), max_retries=3),
                    sets_per_point=2)
    rows = acceptance_ratio(bad)
    assert rows[-1]["analyzer"] == GEN_FAILED and rows[-1]["accepted"] == 2


def test_run_analyzer():
    t = make_task(0, [20] * 5, [], period=60, resource_usage={0: (3, 2)})
    ts = TaskSet((t,), processors=4)
    for a in ("XU-U", "XU-F", "XU-P"):
        assert run_analyzer(a, ts).schedulable
    with pytest.raises(ValueError):
        run_analyzer("XU-Q", ts)


def test_small_campaign_is_clean(tmp_path):
    rep = soundness_campaign(SIM_CONFIG, 6, seeds=2, bundle_dir=tmp_path)
    assert rep.ok, rep.violations
    assert rep.pairs > 0 and rep.runs > 0 and rep.jobs_checked > 0
    assert all(0 < v <= 1 for v in rep.max_tightness.values())
    assert json.loads(report_to_json(rep))["pairs"] == rep.pairs


def test_bundle_layout(tmp_path):
    ts, recs = mixed_blocking_example()
    from dagspin import replay_trace
    path = _write_bundle(tmp_path, "case", ts, replay_trace(ts, recs), ["bound (0, 0): x"])
    names = sorted(p.name for p in (tmp_path / "case").iterdir())
    assert names == ["report.txt", "taskset.json", "trace.csv"] and path.endswith("case")


def test_fuzz_small():
    rep = identity_fuzz(FUZZ_CONFIG, 6)
    assert not rep.failures
    assert set(rep.by_mode) == {"fifo", "priority", "unordered-random", "unordered-adversarial"}


# --- command line -----------------------------------------------------------------


@pytest.fixture
def files(tmp_path):
    ts, recs = mixed_blocking_example()
    tsf = tmp_path / "ts.json"
    dump_taskset(ts, tsf)
    trf = tmp_path / "trace.csv"
    write_trace(recs, trf)
    return tsf, trf, tmp_path


@pytest.fixture
def pair_file(tmp_path):
    a = make_task(0, [20] * 5, [], period=60, resource_usage={0: (3, 2)})
    b = make_task(1, [10] * 4, [], period=40, resource_usage={0: (2, 1)})
    path = tmp_path / "pair.json"
    dump_taskset(TaskSet((a, b), processors=6), path)
    return path


def test_cli_analyze(pair_file, tmp_path, capsys):
    tsf, tmp = pair_file, tmp_path
    assert main(["analyze", str(tsf), "--order", "fifo", "--m", "3,2", "--out", str(tmp / "b.csv")]) == 0
    assert "fifo: schedulable" in capsys.readouterr().out
    assert (tmp / "b.csv").read_text().startswith("task,m,bound")
    assert main(["analyze", str(tsf), "--order", "unordered", "--m", "1,1"]) == 1
    assert main(["analyze", str(tsf), "--order", "priority", "--m", "3,2"]) == 2
    assert main(["analyze", str(tsf), "--order", "priority", "--m", "3,2", "--priority-order", "0,1"]) == 0
    assert main(["analyze", str(tsf), "--order", "fifo", "--m", "3,2,1"]) == 2
    assert main(["analyze", str(tsf), "--order", "fifo", "--m", "4,3"]) == 1


def test_cli_partition_and_search(pair_file, files, capsys):
    tsf = pair_file
    assert main(["partition", str(tsf), "--order", "priority"]) == 0
    assert "priority order:" in capsys.readouterr().out
    assert main(["search-priorities", str(tsf)]) == 0
    assert main(["search-priorities", str(tsf), "--cap", "1"]) == 2
    assert main(["partition", str(files[0]), "--order", "unordered"]) == 1


def test_cli_replay(files, capsys):
    tsf, trf, tmp = files
    assert main(["replay", str(trf), "--taskset", str(tsf), "--job", "0.0"]) == 0
    out = capsys.readouterr().out
    assert "key path 0,3,5,6" in out and "intra/inter 2 1, delay intra/inter 1 2" in out
    assert main(["check-trace", str(trf), "--taskset", str(tsf)]) == 0
    trf.write_text(trf.read_text().replace("0.0,2,6,8,exec", "0.0,2,5,8,exec"))
    assert main(["check-trace", str(trf), "--taskset", str(tsf)]) == 2


def test_cli_generate_and_simulate(tmp_path, capsys):
    cfg = tmp_path / "g.cfg"
    cfg.write_text("\n".join(f"{k} = {v}" for k, v in SIM_CONFIG.to_mapping().items()))
    tsf = tmp_path / "ts.json"
    assert main(["generate", "--config", str(cfg), "--seed", "2", "--out", str(tsf)]) == 0
    n = len(json.loads(tsf.read_text())["tasks"])
    m = ",".join(["3"] * n)
    big = json.loads(tsf.read_text())
    big["processors"] = 3 * n
    tsf.write_text(json.dumps(big))
    trace = tmp_path / "t.csv"
    code = main(["simulate", str(tsf), "--order", "fifo", "--m", m, "--check", "--out", str(trace)])
    assert code == 0 and "0 identity violations" in capsys.readouterr().out
    assert trace.read_text().splitlines()[0].startswith("job,")
    assert main(["generate", "--openmp", "--seed", "1"]) == 0
    assert main(["generate", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_cli_sweep(tmp_path):
    spec = tmp_path / "s.cfg"
    spec.write_text("axis = u_norm\nvalues = 0.2\nsets_per_point = 2\n"
                    "vertices = 10,25\nwcet = 5,40\ntotal_accesses = 4,40\nmax_hold = 1,8\n"
                    "resource_types = 1,3\nn_tasks = 1,4\n")
    out = tmp_path / "r.csv"
    assert main(["sweep", "--spec", str(spec), "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 4


def test_cli_usage_errors():
    assert main([]) == 2
    assert main(["analyze", "/nonexistent.json", "--order", "fifo", "--m", "1"]) == 2


def test_module_entry_point(pair_file):
    r = subprocess.run([sys.executable, "-m", "dagspin", "analyze", str(pair_file), "--order", "fifo",
                        "--m", "3,2"], capture_output=True, text=True)
    assert r.returncode == 0 and "schedulable" in r.stdout
