import math

import numpy as np
import pytest

from tmsnet.entanglement import concurrence
from tmsnet.lindblad import steady_state
from tmsnet.models import build_effective_me, ideal_params, mhz, moments_for_params, squeezing_from_pump, table1_params
from tmsnet.sweeps import (
    SweepConfig,
    chiral_params,
    fit_lorentzian,
    lorentzian,
    parallel_map,
    run_detuning_sweep,
    run_entanglement_transfer,
    run_four_qubit,
    run_limit_sweeps,
    run_pump_sweep,
    run_time_sweep,
    stabilization_time,
)


def test_sweep_config_validation():
    p = ideal_params()
    with pytest.raises(ValueError):
        SweepConfig(p, "eps_p", [])
    with pytest.raises(ValueError):
        SweepConfig(p, "eps_p", [0.3, 0.1])
    with pytest.raises(ValueError):
        SweepConfig(p, "eps_p", [0.1, 1.0])
    with pytest.raises(ValueError):
        SweepConfig(p, "temperature", [0.1])
    with pytest.raises(ValueError):
        SweepConfig(p, "eps_p", [0.1], model="exact")
    with pytest.raises(ValueError):
        run_pump_sweep(SweepConfig(p, "t_pulse", [0.1]))


def test_pump_sweep_ideal_overlay():
    grid = np.linspace(0, 0.8, 9)
    res = run_pump_sweep(SweepConfig(ideal_params(), "eps_p", grid))
    assert len(res.rows) == grid.size
    expected = [math.tanh(2 * squeezing_from_pump(e)) for e in grid]
    assert np.allclose(res.column("concurrence"), expected, atol=1e-8)
    assert np.all(res.column("residual") < 1e-8)
    assert res.flagged == []


def test_pump_sweep_table1_shape():
    res = run_pump_sweep(SweepConfig(table1_params(), "eps_p", np.linspace(0, 0.9, 19)))
    mu = res.column("purity")
    assert abs(mu[0] - 1) < 1e-10
    assert abs(mu[-1] - 0.25) < 0.05
    assert 0.15 <= res.metadata["eps_at_c_max"] <= 0.35


def test_pump_sweep_flags_failures():
    res = run_pump_sweep(
        SweepConfig(ideal_params(kappa=20.0), "eps_p", [0.0, 0.7], model="cascaded", options={"n_max": 2})
    )
    assert res.flagged == [1]
    assert res.rows[1]["flag"].startswith("truncation")


def test_time_sweep():
    grid = [0.0, 1e-4, 0.05, 0.3, 10.0]
    res = run_time_sweep(SweepConfig(table1_params(), "t_pulse", grid, options={"eps_p": 0.25}))
    c = res.column("concurrence")
    assert c[0] == 0 and abs(res.rows[0]["p_gg"] - 1) < 1e-15
    assert c[1] < 1e-3
    assert abs(c[-1] - res.metadata["c_steady"]) < 1e-4
    assert res.metadata["t_stabilize_us"] > 0


def test_stabilization_time_single_qubit_oracle():
    # the crossing time must not depend on the propagation grid
    p = ideal_params(eps_p=0.2)
    liou = build_effective_me(p, moments_for_params(p))
    c_ss = concurrence(steady_state(liou))
    t90 = stabilization_time(liou, c_ss, t_max=20.0, n_steps=4000)
    t90_fine = stabilization_time(liou, c_ss, t_max=20.0, n_steps=40000)
    assert abs(t90 - t90_fine) < 1e-3
    assert 0 < t90 < 20


def test_detuning_sweep_symmetry():
    p = ideal_params(kappa=50.0)
    grid = mhz(np.array([-3.0, 0.0, 3.0]))
    res = run_detuning_sweep(
        SweepConfig(p, "detuning", grid, model="cascaded", options={"eps_p": 0.15, "n_max": 4})
    )
    c = res.column("concurrence")
    assert abs(c[0] - c[2]) < 1e-6
    assert c[1] > c[0]


def test_lorentzian_fit_exact():
    x = np.linspace(-100, 100, 41)
    amp, center, fwhm = fit_lorentzian(x, lorentzian(x, 0.07, 1.5, 44.0))
    assert np.allclose((amp, center, fwhm), (0.07, 1.5, 44.0), rtol=1e-8)


def test_limit_sweep_ideal_saturates():
    res = run_limit_sweeps(SweepConfig(ideal_params(), "eta", [1.0]))
    row = res.rows[0]
    assert row["flag"] == "grid-edge"
    assert row["c_opt"] > 0.99


def test_chiral_params():
    p = chiral_params(gamma_phi=0.1, asymmetry=0.5)
    assert p.qubits[0].gamma_l == 0 and p.qubits[1].gamma_r == 0.5
    assert p.qubits[1].gamma_phi == 0.1


def test_four_qubit_decoupled_row():
    net = chiral_params()
    res = run_four_qubit(SweepConfig(net, "j_exchange", [0.0], options={"eps_grid": (0.3, 0.6)}))
    row = res.rows[0]
    assert row["c_inner"] < 1e-10
    assert row["flag"].startswith("degenerate")


def test_transfer_sweep():
    res = run_entanglement_transfer(SweepConfig(table1_params(), "eps_p", [0.0, 0.25, 0.5]))
    assert res.rows[0]["cv_eof"] == 0 and res.rows[0]["dv_eof"] == 0
    assert np.all(res.column("dv_eof")[1:] < res.column("cv_eof")[1:])
    assert "rate_caveat" in res.metadata


def _square(x):
    return x * x


def test_parallel_map_preserves_order():
    items = list(range(7))
    assert parallel_map(_square, items, jobs=3) == [x * x for x in items]


def test_jobs_do_not_change_results():
    grid = np.linspace(0, 0.5, 6)
    a = run_pump_sweep(SweepConfig(table1_params(), "eps_p", grid, jobs=1)).to_csv()
    b = run_pump_sweep(SweepConfig(table1_params(), "eps_p", grid, jobs=3)).to_csv()
    assert a == b


def test_csv_header_and_units():
    text = run_pump_sweep(SweepConfig(ideal_params(), "eps_p", [0.0, 0.1])).to_csv()
    lines = text.splitlines()
    assert lines[0] == "# sweep-pump"
    assert "MHz" in lines[1]
    header = next(line for line in lines if not line.startswith("#"))
    assert header.startswith("eps_p [1],r,n1 [photons]")
    assert len(lines) == lines.index(header) + 3
