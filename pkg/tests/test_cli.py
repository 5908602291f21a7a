import csv
import json

import pytest

from ridgelab import cli
from ridgelab.discretize import finite_apply, load_network


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_constant_matched_is_one(capsys):
    code, out, _ = _run(capsys, "constant", "--sigma", "gauss", "--rho", "matched", "--dim", "1")
    assert code == 0
    assert abs(json.loads(out)["constant"] - 1.0) <= 1e-6


def test_constant_divergence_exit_code(capsys):
    code, _, err = _run(capsys, "constant", "--sigma", "gauss", "--rho", "gauss", "--dim", "1")
    assert code == 3
    assert "numerical error" in err


def test_constant_zero(capsys, tmp_path):
    path = tmp_path / "c.json"
    code, out, _ = _run(capsys, "constant", "--rho", "zero", "-o", str(path))
    assert code == 0
    assert json.loads(out)["constant"] == 0.0
    assert json.loads(path.read_text()) == json.loads(out)


def test_check_equivariance_pass_and_corrupt(capsys):
    code, out, _ = _run(capsys, "check", "equivariance", "--family", "quad", "--samples", "1000", "--seed", "42")
    assert code == 0
    assert json.loads(out)["outcome"] == "pass"
    code, out, _ = _run(capsys, "check", "equivariance", "--corrupt")
    assert code == 1
    assert json.loads(out)["outcome"] == "fail"


def test_reconstruct_zero_config(capsys, tmp_path):
    code, out, _ = _run(capsys, "reconstruct", "zero", "--out", str(tmp_path))
    assert code == 0
    with open(tmp_path / "reconstruct_0.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "f", "Tf"]
    assert all(float(r[1]) == 0.0 and float(r[2]) == 0.0 for r in rows[1:])
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["targets"][0]["constant"] is None


def test_discretize_export_round_trip(capsys, tmp_path):
    code, _, _ = _run(capsys, "discretize", "fc2_small", "--levels", "2", "4", "--out", str(tmp_path))
    assert code == 0
    with open(tmp_path / "discretize.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["n", "uniform_error"] and [r[0] for r in rows[1:]] == ["2", "4"]
    net = load_network(str(tmp_path / "network_n4.json"))
    assert len(net) == 16
    assert finite_apply(net, [0.0, 0.5]).shape == (2, 1)


def test_same_seed_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path, threads in ((a, "1"), (b, "3")):
        code, _, _ = _run(capsys, "check", "unitarity", "--samples", "5", "--seed", "9", "--threads", threads,
                          "-o", str(path))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_log_sidecar_has_timestamps(capsys, tmp_path):
    log = tmp_path / "run.log"
    out = tmp_path / "s.json"
    suite = tmp_path / "suite.json"
    suite.write_text(json.dumps({"name": "mini", "seed": 1,
                                 "checks": [{"kind": "equivariance", "family": "fc2", "samples": 10}]}))
    code, _, _ = _run(capsys, "suite", str(suite), "-o", str(out), "--log", str(log))
    assert code == 0
    lines = log.read_text().splitlines()
    assert lines and lines[0][:2] == "20"
    assert "T" in lines[0].split()[0]
    assert json.loads(out.read_text())["ok"] is True


def test_failing_suite_exit_code(capsys, tmp_path):
    suite = tmp_path / "suite.json"
    suite.write_text(json.dumps({"name": "bad", "checks": [
        {"kind": "equivariance", "family": "fc2", "samples": 10, "corrupt": True, "expect": "pass"}]}))
    code, out, _ = _run(capsys, "suite", str(suite))
    assert code == 1
    assert json.loads(out)["ok"] is False


@pytest.mark.parametrize("argv", [["reconstruct", "no_such_config"], ["suite", "no_such_suite"],
                                  ["check", "equivariance", "--family", "spin"],
                                  ["check", "equivariance", "--threads", "0"]])
def test_config_errors_exit_2(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == 2
    assert "config error" in err


def test_configs_listing(capsys):
    code, out, _ = _run(capsys, "configs")
    assert code == 0
    assert "suite_default" in out.split()
    code, out, _ = _run(capsys, "configs", "zero")
    assert json.loads(out)["targets"][0]["kind"] == "zero"
