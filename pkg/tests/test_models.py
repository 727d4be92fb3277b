import math

import numpy as np
import pytest

from tmsnet.entanglement import concurrence
from tmsnet.errors import AboveThresholdError, TruncationError
from tmsnet.lindblad import residual, steady_state, trace_defect
from tmsnet.models import (
    FOUR_QUBIT_LAYOUT,
    LinkParams,
    TmsMoments,
    build_effective_me,
    build_four_qubit_me,
    cascaded_layout,
    cascaded_steady_state,
    dark_state,
    effective_steady_state,
    fit_s21_lorentzian,
    gain_bandwidth,
    ideal_params,
    jc_coupling,
    mhz,
    moments_for_params,
    pump_from_squeezing,
    pump_power_to_eps,
    s21_transmission,
    squeezing_from_pump,
    table1_params,
    tms_moments_analytic,
    tms_pure_state,
    to_mhz,
    waveguide_coupling_estimate,
)
from tmsnet.operators import KET_G, bosonic_annihilation, kron, ket_to_dm, partial_trace

R_STAR = 0.5 * math.log((4 + math.sqrt(13)) / 3)


def test_moments_vacuum_and_example():
    m = tms_moments_analytic(0.0)
    assert (m.n1, m.n2, abs(m.m12)) == (0.0, 0.0, 0.0)
    m = tms_moments_analytic(0.22)
    r = 2 * math.atanh(0.22)
    assert abs(m.n1 - math.sinh(r) ** 2) < 1e-14
    assert abs(abs(m.m12) - math.sinh(r) * math.cosh(r)) < 1e-14
    # values for r = 2 artanh(0.22)
    assert abs(r - 0.44731) < 1e-5
    assert abs(m.n1 - 0.21379) < 1e-5
    assert abs(abs(m.m12) - 0.50941) < 1e-5


def test_pump_squeezing_roundtrip():
    assert abs(squeezing_from_pump(pump_from_squeezing(R_STAR)) - R_STAR) < 1e-12
    with pytest.raises(AboveThresholdError):
        squeezing_from_pump(1.0)
    with pytest.raises(AboveThresholdError):
        tms_moments_analytic(1.2)


def test_moments_duan_simon_and_physicality():
    for eps in np.linspace(0, 0.9, 19):
        for phi in (0.0, 1.1, -2.5):
            m = tms_moments_analytic(eps, phi)
            r = squeezing_from_pump(eps)
            ds = 1 + m.n1 + m.n2 - 2 * (m.m12 * complex(math.cos(phi), -math.sin(phi))).real
            assert abs(ds - math.exp(-2 * r)) < 1e-12 * max(1, math.cosh(2 * r))
    lossy = tms_moments_analytic(0.4, link=LinkParams(0.5, 0.3))
    assert lossy.n1 > lossy.n2
    with pytest.raises(ValueError):
        TmsMoments(0.1, 0.1, 1.0)
    with pytest.raises(ValueError):
        LinkParams(1.2, 0.5)


def test_dark_state():
    assert np.allclose(dark_state(0.0), kron(KET_G, KET_G))
    psi = dark_state(1.0, 0.7)
    assert abs(psi[0] - math.sqrt(2 / 3)) < 1e-14
    assert abs(psi[3] - np.exp(0.7j) * math.sqrt(1 / 3)) < 1e-14
    big = dark_state(1e6)
    assert abs(abs(big[0]) - 1 / math.sqrt(2)) < 1e-6 and abs(abs(big[3]) - 1 / math.sqrt(2)) < 1e-6
    assert abs(np.linalg.norm(psi) - 1) < 1e-14


def test_tms_pure_state():
    psi = tms_pure_state(0.0, 3)
    assert abs(psi[0] - 1) < 1e-15 and np.count_nonzero(psi) == 1
    psi = tms_pure_state(1.0, 40, tail_tol=None)
    assert abs(np.linalg.norm(psi) - 1) < 1e-12
    with pytest.raises(TruncationError):
        tms_pure_state(1.0, 40)  # tanh(1)^41 ~ 1.4e-5
    psi = tms_pure_state(1.0, 80)
    n = bosonic_annihilation(80)
    n1 = np.kron(n.conj().T @ n, np.eye(81))
    assert abs((psi.conj() @ n1 @ psi).real - math.sinh(1.0) ** 2) < 1e-8


@pytest.mark.parametrize("r", [0.2, R_STAR, 1.0])
def test_dark_state_nullity(r):
    n_max = int(math.ceil(math.log(1e-10) / math.log(math.tanh(r))))
    state = np.kron(tms_pure_state(r, n_max), dark_state(math.sinh(r) ** 2))
    h = jc_coupling(n_max)
    assert np.linalg.norm(h @ state) <= 1e-10
    wrong = np.kron(tms_pure_state(r, n_max), dark_state(math.sinh(r) ** 2, math.pi))
    assert np.linalg.norm(h @ wrong) > 0.1


def test_jc_vacuum_is_dark():
    h = jc_coupling(3)
    v = np.zeros(h.shape[0], dtype=complex)
    v[0] = 1
    assert np.linalg.norm(h @ v) == 0
    assert abs(h - h.conj().T).max() < 1e-14
    with pytest.raises(ValueError):
        jc_coupling(1)


def test_effective_me_vacuum_and_ideal_limit():
    p = ideal_params()
    rho = steady_state(build_effective_me(p, TmsMoments(0.0, 0.0, 0.0)))
    assert np.allclose(rho, ket_to_dm(kron(KET_G, KET_G)), atol=1e-12)
    for r in (0.1, 0.5, 1.2):
        rho = effective_steady_state(p.with_pump(pump_from_squeezing(r)))
        assert abs(concurrence(rho) - math.tanh(2 * r)) < 1e-8


def test_effective_me_bidirectional_optimum():
    p = ideal_params(bidirectional=True, eps_p=pump_from_squeezing(R_STAR))
    assert abs(concurrence(effective_steady_state(p)) - (13 * math.sqrt(13) - 19) / 108) < 1e-6


def test_phase_invariance_of_concurrence():
    base = table1_params(0.2)
    ref = concurrence(effective_steady_state(base))
    for phi in np.linspace(-math.pi, math.pi, 9):
        assert abs(concurrence(effective_steady_state(base.with_pump(0.2, phi))) - ref) < 1e-10


def test_cascaded_vacuum():
    sol = cascaded_steady_state(ideal_params(eps_p=0.0, kappa=20.0))
    expected = np.zeros(sol.rho.shape[0])
    expected[0] = 1
    assert np.allclose(np.diag(sol.rho).real, expected, atol=1e-10)


def test_cascaded_intracavity_photon_number():
    eps = 0.25
    sol = cascaded_steady_state(ideal_params(eps_p=eps, kappa=50.0))
    a = cascaded_layout(sol.n_max).embed(bosonic_annihilation(sol.n_max), 0)
    n = np.trace(a.conj().T @ a @ sol.rho).real
    assert abs(n - eps**2 / (2 * (1 - eps**2))) < 1e-5


def test_cascaded_matches_effective():
    p = ideal_params(eps_p=0.1, kappa=300.0)
    sol = cascaded_steady_state(p)
    assert sol.top_population < 1e-6
    assert abs(concurrence(sol.qubit_state) - concurrence(effective_steady_state(p))) < 5e-3


def test_cascaded_truncation_flag():
    p = ideal_params(eps_p=0.6, kappa=20.0)
    with pytest.raises(TruncationError):
        cascaded_steady_state(p, n_max=2)
    sol = cascaded_steady_state(p, n_max=2, strict=False)
    assert sol.top_population > 1e-6


def test_gain_bandwidth():
    assert gain_bandwidth(5.0, 0.0) == (1.0, 5.0)
    _, bw = gain_bandwidth(mhz(60.0), 0.25)
    assert abs(to_mhz(bw) - 46.71) < 0.01  # quoted as "about 46 MHz"
    eps = np.linspace(0, 0.99, 100)
    g, w = np.array([gain_bandwidth(1.0, e) for e in eps]).T
    assert np.all(np.diff(g) > 0) and np.all(np.diff(w) < 0)


def test_pump_power_to_eps():
    assert abs(pump_power_to_eps(-66.0) - 0.1) < 1e-12
    assert abs(pump_power_to_eps(-58.0) - 0.2512) < 1e-4
    with pytest.raises(AboveThresholdError):
        pump_power_to_eps(-46.0)


def test_s21_limits():
    assert abs(s21_transmission(0.0, 0.0, 1.0, 2.0) - 0.75) < 1e-15
    assert abs(s21_transmission(0.0, 1e6, 1.0, 2.0) - 1) < 1e-9
    with pytest.raises(ValueError):
        s21_transmission(0.0, 0.0, 1.0, 0.0)


def test_s21_fit_recovers_parameters(rng):
    gamma_d, depth = 1.2, 0.4
    delta = np.linspace(-8, 8, 401)
    data = np.abs(s21_transmission(delta, 0.0, 2 * depth * gamma_d, gamma_d)) + rng.normal(0, 0.01, delta.size)
    g_fit, d_fit = fit_s21_lorentzian(delta, data)
    assert abs(g_fit / gamma_d - 1) < 0.02
    assert abs(d_fit / depth - 1) < 0.02


def test_waveguide_coupling_scaling():
    base = waveguide_coupling_estimate(1.0, 50.0, 1.0, 1.0)
    assert abs(waveguide_coupling_estimate(1.0, 50.0, 2.0, 1.0) / base - 4) < 1e-12
    assert abs(waveguide_coupling_estimate(1.0, 50.0, 1.0, 2.0) / base - 0.5) < 1e-12
    gw = waveguide_coupling_estimate(2 * math.pi * 6.761e9, 50.0, 5e-15, 80e-15)
    assert abs(gw / (2 * math.pi) / 1e6 - 4.4877) < 1e-3  # MHz
    with pytest.raises(ValueError):
        waveguide_coupling_estimate(0.0, 50.0, 1.0, 1.0)


def test_four_qubit_decoupled_limit():
    p = ideal_params(eps_p=0.2)
    m = moments_for_params(p)
    l4 = build_four_qubit_me(p, 0.0, m)
    assert trace_defect(l4) < 1e-10
    # J = 0: evolve from the ground state, inner pair stays put
    from tmsnet.lindblad import evolve_expm

    rho0 = np.zeros((16, 16), dtype=complex)
    rho0[0, 0] = 1
    rho = evolve_expm(l4, rho0, 40.0)
    outer = partial_trace(rho, FOUR_QUBIT_LAYOUT, [0, 1])
    inner = partial_trace(rho, FOUR_QUBIT_LAYOUT, [2, 3])
    assert abs(inner[0, 0] - 1) < 1e-12
    assert np.max(np.abs(outer - effective_steady_state(p))) < 1e-8
    assert residual(build_effective_me(p, m), outer) < 1e-7
    with pytest.raises(ValueError):
        build_four_qubit_me(p, -1.0, m)
