"""
Command line: exit codes, artifacts and reproducibility
"""

import csv
import json

import numpy as np
import pytest

from commands.validate import QUICK, check_clt, check_galois, check_level_walk
from main import build_parser, main


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def _read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_every_command_is_registered():
    parser = build_parser()
    for argv in (["rates-convert", "--beta", "constant:0.1"], ["finite-analyze", "--input", "x.json"],
                 ["conductance", "--input", "x.json"], ["imh"], ["abc"], ["rwm-bounds", "--varsigma", "0.5", "--d", "2"],
                 ["clt", "--gamma-power", "2"], ["drift-wpi", "--input", "x.json"], ["validate-all", "--quick"]):
        assert parser.parse_args(argv).handler is not None


def test_rates_convert_reciprocal(tmp_path):
    prefix = str(tmp_path / "profile")
    assert main(["--output", prefix, "rates-convert", "--beta", "powerlaw:1,1", "--n-max", "10"]) == 0
    columns, rows = _read_csv(prefix + ".csv")
    assert columns == ["n", "gamma"]
    gamma = np.array([float(r[1]) for r in rows])
    np.testing.assert_allclose(gamma, 4.0 / (np.arange(11) + 4.0), rtol=1e-9)
    bundle = json.loads((tmp_path / "profile.json").read_text())
    meta = bundle["artifacts"][0]["metadata"]
    assert meta["command"] == "rates-convert"
    assert meta["seed"] == 42


def test_output_is_reproducible(tmp_path):
    first, second = str(tmp_path / "a"), str(tmp_path / "b")
    args = ["rates-convert", "--beta", "powerlaw:2,1.5", "--n-max", "50"]
    assert main(["--output", first] + args) == 0
    assert main(["--output", second] + args) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_stdout_bundle_without_output(capsys):
    assert main(["clt", "--gamma-power", "1.5", "--n-max", "200", "--b", "2"]) == 0
    bundle = json.loads(capsys.readouterr().out)
    record = bundle["artifacts"][1]["data"]
    assert record["verdict"] == "Converges"
    assert record["lp_threshold"] == pytest.approx(4.0)


def test_bad_rate_exits_one(capsys):
    assert main(["rates-convert", "--beta", "zigzag:1"]) == 1
    assert "[ERROR]" in capsys.readouterr().err


def test_missing_input_exits_one(tmp_path):
    assert main(["finite-analyze", "--input", str(tmp_path / "nope.json")]) == 1


def test_inconclusive_clt_exits_one(capsys):
    assert main(["clt", "--gamma-power", "1.0"]) == 1
    assert "witness" in capsys.readouterr().err


def test_finite_analyze(tmp_path):
    chain = _write(tmp_path / "chain.json", {"states": 2, "matrix": [[0.7, 0.3], [0.3, 0.7]]})
    observable = _write(tmp_path / "f.json", [0.0, 1.0])
    prefix = str(tmp_path / "out")
    assert main(["--output", prefix, "finite-analyze", "--input", chain, "--observable", observable,
                 "--n-max", "20"]) == 0
    columns, rows = _read_csv(prefix + ".csv")
    assert columns == ["n", "exact", "bound"]
    assert len(rows) == 21
    assert all(float(exact) <= float(bound) + 1e-9 for _, exact, bound in rows)
    summary = json.loads((tmp_path / "out.json").read_text())["artifacts"][1]["data"]
    assert summary["spectral_gap"] == pytest.approx(0.6)


def test_bad_chain_exits_one(tmp_path):
    chain = _write(tmp_path / "chain.json", {"states": 2, "matrix": [[0.5, 0.4], [0.3, 0.7]]})
    assert main(["conductance", "--input", chain]) == 1


def test_failed_drift_exits_two(tmp_path, capsys):
    job = _write(tmp_path / "drift.json", {
        "drift": {"V": [1.0, 1.0], "C": [0], "form": {"kind": "geometric", "lam": 0.5, "b": 0.1}},
        "local_pi": {"kind": "minorization", "epsilon": 0.5},
        "chain": {"states": 2, "matrix": [[0.7, 0.3], [0.3, 0.7]]},
    })
    assert main(["drift-wpi", "--input", job]) == 2
    assert "drift fails at state 1" in capsys.readouterr().err


def test_acceptance_checks_without_the_full_suite():
    for check in (check_galois, check_level_walk, check_clt):
        result = check(QUICK)
        assert result.passed, result.row()


def test_bare_output_name_uses_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("WPI_OUTPUT_DIR", str(tmp_path / "runs"))
    assert main(["--output", "profile", "rates-convert", "--beta", "powerlaw:1,1", "--n-max", "5"]) == 0
    assert (tmp_path / "runs" / "profile.csv").exists()
    assert (tmp_path / "runs" / "profile.json").exists()


def test_rate_file_schema_error(tmp_path, capsys):
    rate = _write(tmp_path / "rate.json", {"form": "powerlaw", "c": -1.0})
    assert main(["rates-convert", "--input", rate]) == 1
    assert "rate does not match its schema" in capsys.readouterr().err
