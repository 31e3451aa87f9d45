import json

import pytest

from holosec import cli
from holosec.validation import Check


def _run(tmp_path, *argv):
    return cli.run([*argv, "--out", str(tmp_path)])


def test_snr_sweep_byte_identical(tmp_path):
    args = ["snr-sweep", "--seed", "7", "--trials", "2", "--snr", "0,20"]
    assert _run(tmp_path / "a", *args) == 0
    assert _run(tmp_path / "b", *args) == 0
    a = (tmp_path / "a" / "snr_sweep.csv").read_bytes()
    assert a == (tmp_path / "b" / "snr_sweep.csv").read_bytes()
    man = json.loads((tmp_path / "a" / "snr_sweep.manifest.json").read_text())
    assert man["seed"] == 7 and man["config"]["trials"] == 2 and man["csv_version"] == 1
    assert man["outputs"] == [str(tmp_path / "a" / "snr_sweep.csv")]


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"trials": 1, "snr_db": [10], "pa": "fixed=0.5", "seed": 3}))
    before = cfg.read_text()
    assert _run(tmp_path, "snr-sweep", "--config", str(cfg), "--seed", "4") == 0
    man = json.loads((tmp_path / "snr_sweep.manifest.json").read_text())
    assert man["seed"] == 4 and man["config"]["pa"] == "fixed=0.5"
    assert cfg.read_text() == before


def test_snr_range_syntax(tmp_path):
    assert _run(tmp_path, "snr-sweep", "--trials", "1", "--pa", "fixed=0.5", "--snr", "0:10:5") == 0
    lines = (tmp_path / "snr_sweep.csv").read_text().strip().split("\n")
    assert len(lines) == 4


@pytest.mark.parametrize(
    "argv,needle",
    [
        (["snr-sweep", "--trials", "0"], "trials"),
        (["snr-sweep", "--pa", "greedy"], "pa"),
        (["snr-sweep", "--snr", "abc"], "--snr"),
        (["spacing-sweep", "--delta", "0.7", "--trials", "1"], "spacing"),
        (["csi-sweep", "--xi", "1.5", "--trials", "1"], "xi"),
    ],
)
def test_config_errors_exit_2(tmp_path, capsys, argv, needle):
    assert _run(tmp_path, *argv) == 2
    assert needle in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert _run(tmp_path, "snr-sweep", "--config", str(tmp_path / "nope.json")) == 2
    assert "config" in capsys.readouterr().err


def test_infeasible_exit_3(tmp_path):
    argv = ["heatmap", "--delta", "0.25", "--trials", "1", "--resolution", "1"]
    assert _run(tmp_path, *argv) == 3


def test_validate_exit_0(tmp_path):
    assert _run(tmp_path, "validate") == 0
    assert "semi_unitarity" in (tmp_path / "validate.csv").read_text()


def test_validate_failure_exit_4(tmp_path, monkeypatch):
    import holosec.validation as v

    monkeypatch.setattr(v, "run_all", lambda: [Check("broken", False, "forced")])
    assert _run(tmp_path, "validate") == 4


def test_oracle_compare(tmp_path):
    assert _run(tmp_path, "oracle-compare", "--trials", "3", "--step", "0.05") == 0
    lines = (tmp_path / "oracle_compare.csv").read_text().strip().split("\n")
    assert lines[0] == "problem,sca_min_secrecy,grid_min_secrecy,within_95pct"
    assert len(lines) == 4


def test_negative_range_values_accepted(tmp_path):
    argv = ["snr-sweep", "--trials", "1", "--pa", "fixed=0.5", "--snr", "-10:0:5"]
    assert _run(tmp_path, *argv) == 0
    rows = (tmp_path / "snr_sweep.csv").read_text().strip().split("\n")[1:]
    assert [r.split(",")[2] for r in rows] == ["-10.0", "-5.0", "0.0"]
