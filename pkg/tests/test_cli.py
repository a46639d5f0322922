import json

import pytest
import yaml

from memcolor.cli import main
from memcolor.workloads import read_trace

SMALL_WORKLOAD = [
    {"app": "H", "kind": "llch", "pages": 256, "accesses": 40000, "seed": 1},
    {"app": "T", "kind": "llct", "pages": 20000, "accesses": 20000, "seed": 2},
]


def write_config(tmp_path, **overrides):
    doc = {"seed": 3, "core_count": 4, "workload": SMALL_WORKLOAD}
    doc.update(overrides)
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(doc))
    return str(path)


def test_gen_writes_trace(tmp_path, capsys):
    out = tmp_path / "t.trace"
    rc = main(["gen", "--kind", "llct", "--pages", "1000", "--accesses", "1000",
               "--seed", "1", "-o", str(out)])
    assert rc == 0
    trace = read_trace(out)
    assert len({r.vaddr // 4096 for r in trace}) == 1000


def test_gen_deterministic(tmp_path):
    a, b = tmp_path / "a.trace", tmp_path / "b.trace"
    args = ["gen", "--kind", "ccf", "--seed", "9", "--accesses", "2000",
            "--pages", "8", "--stride", "4096"]
    assert main(args + ["-o", str(a)]) == 0
    assert main(args + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_missing_kind_is_usage_error(tmp_path):
    assert main(["gen", "-o", str(tmp_path / "t.trace")]) == 1


def test_run_explicit_policy(tmp_path, capsys):
    cfg = write_config(tmp_path, policy="a-vp")
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["total"]["llc_misses"] > 0
    alloc_lines = (out / "alloc.csv").read_text().splitlines()
    assert alloc_lines[0] == "app_id,vpn,pfn,color,llc_group,bank_group"
    assert len(alloc_lines) > 1


def test_run_auto_emits_decision(tmp_path, capsys):
    cfg = write_config(tmp_path, policy="auto")
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    decision = json.loads((out / "decision.json").read_text())
    # LLCT present on 4 cores -> a-vp
    assert decision["policy"] == "a-vp"
    assert (out / "metrics.json").exists()


def test_run_empty_workload_is_config_error(tmp_path):
    cfg = write_config(tmp_path, workload=[])
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_run_invalid_mapping_is_config_error(tmp_path):
    cfg = write_config(tmp_path, mapping={"o_bits": [10]})
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_run_unknown_policy_is_config_error(tmp_path):
    cfg = write_config(tmp_path, policy="zigzag")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_run_deterministic_reports(tmp_path, capsys):
    cfg = write_config(tmp_path, policy="random")
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["run", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["run", "--config", cfg, "--out", str(out2)]) == 0
    assert (out1 / "metrics.json").read_bytes() == (out2 / "metrics.json").read_bytes()
    assert (out1 / "alloc.csv").read_bytes() == (out2 / "alloc.csv").read_bytes()


def test_classify_online(tmp_path, capsys):
    cfg = write_config(tmp_path, workload=[
        {"app": "H", "kind": "llch", "seed": 1}])
    assert main(["classify", "--config", cfg]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["H"]["category"] == "LLCH"


def test_advise_profile_only(tmp_path, capsys):
    cfg = write_config(tmp_path, workload=[], profile=[
        {"app": "A", "category": "LLCH"},
        {"app": "B", "category": "LLCM"},
    ])
    assert main(["advise", "--config", cfg]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["policy"] == "bank-only"


def test_advise_multithreaded_random(tmp_path, capsys):
    cfg = write_config(tmp_path, workload=[], multithreaded=True, profile=[
        {"app": "A", "category": "LLCH"}])
    assert main(["advise", "--config", cfg]) == 0
    assert json.loads(capsys.readouterr().out)["policy"] == "random"


def test_sweep_report(tmp_path, capsys):
    cfg = write_config(tmp_path, profile=[
        {"app": "H", "category": "LLCH"},
        {"app": "T", "category": "LLCT"},
    ])
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    report = json.loads((out / "sweep.json").read_text())
    assert report["pdt_policy"] == "a-vp"
    assert set(report["per_policy"]) == {
        "interleave", "bank-only", "a-vp", "b-vp", "c-vp", "random"}
    csv_text = (out / "sweep.csv").read_text()
    assert csv_text.splitlines()[0].startswith("policy,proxy_cycles")


def test_sweep_deterministic(tmp_path):
    cfg = write_config(tmp_path)
    o1, o2 = tmp_path / "s1", tmp_path / "s2"
    assert main(["sweep", "--config", cfg, "--out", str(o1)]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(o2)]) == 0
    assert (o1 / "sweep.json").read_bytes() == (o2 / "sweep.json").read_bytes()
    assert (o1 / "sweep.csv").read_bytes() == (o2 / "sweep.csv").read_bytes()


def test_missing_config_file_is_runtime_error(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.yaml"),
                 "--out", str(tmp_path)]) == 3
