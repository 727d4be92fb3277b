import json

import numpy as np
import pytest

from tmsnet import cli
from tmsnet.config import (
    UNITS_NOTE,
    default_config_text,
    detection_from_config,
    load_config,
    network_from_config,
    parse_grid,
)
from tmsnet.models import table1_params, to_mhz
from tmsnet.validate import REFERENCE, run_criterion, run_validate

SMALL = """
[sweep-pump]
grid = 0.0, 0.6, 4
[sweep-time]
grid = log: 0.01, 1, 4
eps_p = 0.25
[sweep-detuning]
grid = -20, 20, 3
eps_p = 0.2
n_max = 3
[sweep-limits]
gamma_phi = 0.0, 0.1, 2
gamma_ng = 0.0, 0.1, 2
asymmetry = 0.5, 1.0, 2
eta = 0.9, 1.0, 2
[four-qubit]
grid = 0.0, 1.0, 2
eta = 1.0
[transfer]
grid = 0.0, 0.5, 3
[tomography]
shots = 2000
readout_error = 0.05
[detection]
samples = 2000
"""


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.ini"
    path.write_text(SMALL)
    return path


def test_parse_grid():
    assert np.allclose(parse_grid("0, 1, 3"), [0, 0.5, 1])
    assert np.allclose(parse_grid("log: 1, 100, 3"), [1, 10, 100])
    with pytest.raises(ValueError):
        parse_grid("0, 1")
    with pytest.raises(ValueError):
        parse_grid("0, 1, 0")


def test_default_config_is_table1():
    cfg = load_config()
    p = network_from_config(cfg)
    ref = table1_params(0.25)
    assert p.jpc == ref.jpc
    assert p.link == ref.link
    for a, b in zip(p.qubits, ref.qubits):
        assert np.isclose(a.gamma_r, b.gamma_r) and np.isclose(a.gamma_ng, b.gamma_ng)
    assert abs(to_mhz(p.jpc.kappa1) - 60.0) < 1e-12
    assert "MHz" in default_config_text()
    setup = detection_from_config(cfg, p)
    assert setup.samples == 100_000
    assert abs(setup.heterodyne[0].n_add - 26.8) < 1e-12


def test_config_override_and_missing(small_config, tmp_path):
    cfg = load_config(small_config)
    assert cfg["sweep-pump"]["grid"].strip() == "0.0, 0.6, 4"
    assert cfg["jpc"]["kappa1_mhz"].strip() == "60"
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "nope.ini")


def test_cli_rejects_bad_arguments(tmp_path, capsys):
    assert cli.main(["sweep-pump", "--config", str(tmp_path / "missing.ini"), "--out", str(tmp_path)]) == 2
    assert cli.main(["sweep-pump", "--seed", "-1", "--out", str(tmp_path)]) == 2
    assert cli.main(["sweep-pump", "--jobs", "0", "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit):
        cli.main(["no-such-command"])


def test_sweep_pump_outputs_deterministic(small_config, tmp_path):
    out1, out2, out3 = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert cli.main(["sweep-pump", "--config", str(small_config), "--out", str(out1)]) == 0
    assert cli.main(["sweep-pump", "--config", str(small_config), "--out", str(out2), "--jobs", "2"]) == 0
    assert cli.main(["sweep-pump", "--config", str(small_config), "--out", str(out3), "--no-plots"]) == 0
    csv1 = (out1 / "sweep-pump.csv").read_bytes()
    assert csv1 == (out2 / "sweep-pump.csv").read_bytes() == (out3 / "sweep-pump.csv").read_bytes()
    assert (out1 / "sweep-pump.svg").read_bytes() == (out2 / "sweep-pump.svg").read_bytes()
    assert not (out3 / "sweep-pump.svg").exists()
    text = csv1.decode()
    assert "MHz" in text.splitlines()[1]
    assert sum(1 for line in text.splitlines() if not line.startswith("#")) == 5


@pytest.mark.parametrize(
    "command, files",
    [
        ("sweep-time", ["sweep-time.csv", "sweep-time.svg"]),
        ("sweep-detuning", ["sweep-detuning.csv"]),
        ("sweep-limits", ["sweep-limits-eta.csv", "sweep-limits-gamma_phi.svg"]),
        ("four-qubit", ["four-qubit.csv"]),
        ("transfer", ["transfer.csv"]),
        ("tomo-demo", ["tomo-expectations.csv", "tomo-rho-mle.csv", "tomo-summary.json"]),
        ("detect-compare", ["detect-compare.csv", "detect-compare.svg", "heterodyne-covariance.csv"]),
    ],
)
def test_commands_write_outputs(command, files, small_config, tmp_path):
    assert cli.main([command, "--config", str(small_config), "--out", str(tmp_path)]) == 0
    for name in files:
        assert (tmp_path / name).stat().st_size > 0


def test_tomo_demo_seeded(small_config, tmp_path):
    for sub in ("a", "b"):
        cli.main(["tomo-demo", "--config", str(small_config), "--out", str(tmp_path / sub), "--seed", "7"])
    a = (tmp_path / "a" / "tomo-expectations.csv").read_text()
    assert a == (tmp_path / "b" / "tomo-expectations.csv").read_text()
    summary = json.loads((tmp_path / "a" / "tomo-summary.json").read_text())
    assert summary["kkt_certificate"] <= 1e-8 and summary["seed"] == 7


def test_detect_compare_units_header(small_config, tmp_path):
    cli.main(["detect-compare", "--config", str(small_config), "--out", str(tmp_path)])
    first = (tmp_path / "detect-compare.csv").read_text().splitlines()[0]
    assert UNITS_NOTE in first


def test_validate_mutation_is_detected():
    good = run_criterion(3)
    assert good.passed and good.runtime_s >= 0
    bad = run_criterion(3, {"c_star": REFERENCE["c_star"] + 1e-3})
    assert not bad.passed
    report = run_validate([2, 3], overrides={"c_star": 0.3})
    assert not report.passed
    data = json.loads(report.to_json())
    assert [c["number"] for c in data["criteria"]] == [2, 3]
    assert all("runtime_s" in c for c in data["criteria"])


def test_validate_command_exit_code(monkeypatch, tmp_path, capsys):
    real = cli.run_validate
    monkeypatch.setattr(cli, "run_validate", lambda echo=None: real([3], overrides={"c_star": 0.3}, echo=echo))
    assert cli.main(["validate", "--out", str(tmp_path)]) == 1
    assert "[FAIL]" in capsys.readouterr().out
    monkeypatch.setattr(cli, "run_validate", lambda echo=None: real([1, 2], echo=echo))
    assert cli.main(["validate", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "report.json").read_text())["passed"] is True
