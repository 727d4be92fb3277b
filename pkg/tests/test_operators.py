import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_density
from tmsnet.errors import DimensionMismatchError
from tmsnet.operators import (
    IDENTITY_2,
    KET_E,
    KET_G,
    SIGMA_MINUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    SpaceLayout,
    bosonic_annihilation,
    expect,
    kron,
    ket_to_dm,
    partial_trace,
    psd_sqrt,
    thermal_state,
    unvec,
    vec,
)


def test_kron_identity_and_sigma_z():
    assert np.allclose(kron(IDENTITY_2, IDENTITY_2), np.eye(4))
    # sigma_z = diag(-1, 1) in the (g, e) ordering
    assert np.allclose(np.diag(kron(SIGMA_Z, IDENTITY_2)).real, [-1, -1, 1, 1])


def test_kron_mode_qubit_hand_expansion():
    a = bosonic_annihilation(2)  # 3 levels
    op = kron(a, IDENTITY_2)
    ket = np.kron(np.array([0, 1, 0]), KET_G)
    out = op @ ket
    expected = np.kron(np.array([1, 0, 0]), KET_G)
    assert np.allclose(out, expected)


def test_kron_associative(rng):
    a, b, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
    assert np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c)))) < 1e-14


def test_bosonic_annihilation():
    assert np.allclose(bosonic_annihilation(1), [[0, 1], [0, 0]])
    a = bosonic_annihilation(5)
    assert np.allclose(np.diag(a.conj().T @ a).real, np.arange(6))
    comm = a @ a.conj().T - a.conj().T @ a
    expected = np.eye(6)
    expected[-1, -1] = -5
    assert np.allclose(comm, expected)
    with pytest.raises(ValueError):
        bosonic_annihilation(0)


def test_pauli_conventions():
    assert np.allclose(SIGMA_MINUS @ KET_E, KET_G)
    assert np.allclose(SIGMA_MINUS, (SIGMA_X - 1j * SIGMA_Y) / 2)
    # right-handed Pauli algebra in the (g, e) ordering
    assert np.allclose(SIGMA_X @ SIGMA_Y, 1j * SIGMA_Z)
    assert np.allclose(SIGMA_Y @ SIGMA_Z, 1j * SIGMA_X)


def test_partial_trace_product_and_bell(rng):
    ra, rb = random_density(rng, 3), random_density(rng, 2)
    rho = np.kron(ra, rb)
    assert np.allclose(partial_trace(rho, (3, 2), [0]), ra)
    assert np.allclose(partial_trace(rho, (3, 2), [1]), rb)
    bell = ket_to_dm((np.kron(KET_G, KET_G) + np.kron(KET_E, KET_E)) / np.sqrt(2))
    assert np.allclose(partial_trace(bell, (2, 2), [0]), np.eye(2) / 2)


def test_partial_trace_preserves_trace(rng):
    for _ in range(100):
        rho = random_density(rng, 4)
        red = partial_trace(rho, SpaceLayout((2, 2)), [1])
        assert abs(np.trace(red) - 1) < 1e-12
        assert np.allclose(red, red.conj().T)


def test_partial_trace_complementary_spectra(rng):
    psi = rng.normal(size=12) + 1j * rng.normal(size=12)
    rho = ket_to_dm(psi / np.linalg.norm(psi))
    wa = np.sort(np.linalg.eigvalsh(partial_trace(rho, (3, 4), [0])))[::-1]
    wb = np.sort(np.linalg.eigvalsh(partial_trace(rho, (3, 4), [1])))[::-1]
    assert np.allclose(wa, wb[:3], atol=1e-10)


def test_partial_trace_layout_mismatch():
    with pytest.raises(DimensionMismatchError):
        partial_trace(np.eye(4), (2, 3), [0])


def test_partial_trace_keep_order_matches_einsum_oracle(rng):
    rho = random_density(rng, 8)
    red = partial_trace(rho, (2, 2, 2), [0, 2])
    t = rho.reshape(2, 2, 2, 2, 2, 2)
    oracle = np.trace(t, axis1=1, axis2=4).reshape(4, 4)
    assert np.allclose(red, oracle)


def test_psd_sqrt_examples(rng):
    assert np.allclose(psd_sqrt(np.eye(3)), np.eye(3))
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    p = ket_to_dm(v / np.linalg.norm(v))
    assert np.allclose(psd_sqrt(4 * p), 2 * p)
    with pytest.raises(ValueError):
        psd_sqrt(np.array([[0, 1], [0, 0]], dtype=complex))


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=1, max_value=6))
def test_psd_sqrt_property(seed, d):
    rng = np.random.default_rng(seed)
    a = random_density(rng, d) * rng.uniform(0.1, 10)
    r = psd_sqrt(a)
    assert np.linalg.norm(r @ r - a) < 1e-9
    assert np.max(np.abs(r - r.conj().T)) < 1e-10
    assert np.linalg.eigvalsh(r).min() > -1e-10


def test_expect():
    g = ket_to_dm(KET_G)
    assert expect(SIGMA_Z, g) == -1.0
    n = bosonic_annihilation(60)
    num = n.conj().T @ n
    nbar = 0.7
    # geometric series oracle for a thermal state
    assert abs(expect(num, thermal_state(nbar, 60)) - nbar) < 1e-10
    assert expect(np.eye(2), g) == 1.0
    with pytest.raises(DimensionMismatchError):
        expect(np.eye(3), g)


def test_vec_column_stacking(rng):
    a = rng.normal(size=(3, 3))
    assert np.allclose(vec(a)[:3], a[:, 0])
    assert np.allclose(unvec(vec(a)), a)
