import csv
import json

import pytest

from spryfed.cli import main
from spryfed.cli.main import EXIT_FAILED, EXIT_INVALID, EXIT_OK, EXIT_PROTOCOL, resolve_threads
from spryfed.exceptions import ArgumentError, ProtocolError
from spryfed.fedcore import Federation


@pytest.fixture
def write_config(tmp_path, config_data):
    def write(**overrides):
        path = tmp_path / "experiment.json"
        data = config_data(**overrides)
        data["output"] = {"dir": str(tmp_path / "out")}
        path.write_text(json.dumps(data))
        return path
    return write


def test_missing_method_exits_invalid(tmp_path, config_data, capsys):
    data = config_data()
    del data["method"]
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(data))
    assert main(["run", "--config", str(path)]) == EXIT_INVALID
    assert "method" in capsys.readouterr().err


def test_zero_rounds_writes_header_only(write_config, tmp_path):
    path = write_config(federation={"rounds": 0})
    assert main(["run", "--config", str(path), "--threads", "1"]) == EXIT_OK
    lines = (tmp_path / "out" / "metrics.csv").read_text().splitlines()
    assert len(lines) == 2
    assert lines[0].startswith("# spryfed-metrics v1 config_hash=")
    assert lines[1] == "round,method,acc_gen,acc_pers,loss,grad_norm_proxy"
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["rounds"] == 0 and summary["final"] is None
    assert (tmp_path / "out" / "model.ckpt").exists()


def test_runs_are_byte_identical_across_thread_counts(write_config, tmp_path):
    path = write_config(federation={"rounds": 2})
    assert main(["run", "--config", str(path), "--threads", "1", "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(["run", "--config", str(path), "--threads", "3", "--out", str(tmp_path / "b")]) == EXIT_OK
    for name in ("metrics.csv", "summary.json", "model.ckpt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_override_is_recorded(write_config, tmp_path):
    path = write_config(federation={"rounds": 1})
    assert main(["run", "--config", str(path), "--seed", "11", "--threads", "1"]) == EXIT_OK
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["seed"] == 11
    assert len(summary["checkpoint_fingerprint"]) == 64


def test_protocol_error_exits_three(write_config, monkeypatch, capsys):
    def broken(self):
        raise ProtocolError("UNCOVERED_GROUP", "layer group classifier received no update")

    monkeypatch.setattr(Federation, "run", broken)
    assert main(["run", "--config", str(write_config()), "--threads", "1"]) == EXIT_PROTOCOL
    assert "UNCOVERED_GROUP" in capsys.readouterr().err


def test_invalid_thread_count(write_config):
    assert main(["run", "--config", str(write_config()), "--threads", "0"]) == EXIT_INVALID


def test_resolve_threads(monkeypatch):
    monkeypatch.setenv("SPRYFED_THREADS", "5")
    assert resolve_threads(None) == 5
    assert resolve_threads(2) == 2
    monkeypatch.setenv("SPRYFED_THREADS", "many")
    with pytest.raises(ArgumentError):
        resolve_threads(None)
    monkeypatch.delenv("SPRYFED_THREADS")
    assert resolve_threads(None) >= 1


def read_bias(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# spryfed-bias v1 config_hash=")
    rows = list(csv.reader(lines[1:]))
    return rows[0], [[float(x) for x in row[1:]] for row in rows[1:]]


def test_partition_exact_gives_zero_bias(write_config, tmp_path):
    path = write_config(partition={"alpha": "exact", "num_clients": 1})
    assert main(["partition", "--config", str(path)]) == EXIT_OK
    header, values = read_bias(tmp_path / "out" / "bias.csv")
    assert header == ["client", "class0", "class1", "class2"]
    assert all(v == 0.0 for row in values for v in row)
    dump = json.loads((tmp_path / "out" / "partition.json").read_text())
    assert dump["dirichlet_alpha"] == "exact"
    assert len(dump["clients"]) == 1
    assert dump["master_seed"] == 0


def test_partition_skewed_is_nonzero_and_idempotent(write_config, tmp_path):
    path = write_config(partition={"alpha": 0.1})
    assert main(["partition", "--config", str(path)]) == EXIT_OK
    first = (tmp_path / "out" / "partition.json").read_bytes()
    _, values = read_bias(tmp_path / "out" / "bias.csv")
    assert any(v != 0.0 for row in values for v in row)
    assert main(["partition", "--config", str(path)]) == EXIT_OK
    assert (tmp_path / "out" / "partition.json").read_bytes() == first


def test_cost_writes_and_prints_csv(write_config, tmp_path, capsys):
    path = write_config(cost={"clients": [10], "layers": [20], "methods": ["spry"], "modes": ["per_epoch"]})
    assert main(["cost", "--config", str(path)]) == EXIT_OK
    text = (tmp_path / "out" / "costs.csv").read_text()
    assert capsys.readouterr().out == text
    row = text.splitlines()[2].split(",")
    assert row[:7] == ["spry", "per_epoch", "10", "20", "100", "1", "200"]


def test_validate_unknown_suite_exits_invalid(tmp_path):
    assert main(["validate", "--suite", "nonsense", "--out", str(tmp_path)]) == EXIT_INVALID


def test_validate_echoes_seed_and_reruns_identically(tmp_path, capsys):
    args = ["validate", "--suite", "learning_rate", "--seed", "9"]
    assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["seed"] == 9 and report["passed"]
    assert main(args + ["--out", str(tmp_path / "b")]) == EXIT_OK
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_validate_failure_exits_one(tmp_path, monkeypatch):
    from spryfed.validation import suites
    from spryfed.validation.TheoryReport import TheoryReport

    def failing(seed):
        report = TheoryReport(experiment="learning_rate", seed=seed)
        report.check("always", False, 0.0, 1)
        return [report]

    monkeypatch.setitem(suites.SUITES, "learning_rate", failing)
    assert main(["validate", "--suite", "learning_rate", "--out", str(tmp_path)]) == EXIT_FAILED


def test_subcommand_is_required():
    with pytest.raises(SystemExit):
        main([])
