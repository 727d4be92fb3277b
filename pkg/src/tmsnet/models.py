"""Physical models of the squeezer-qubit network.

All rates and detunings are angular frequencies.  The package-wide unit is
rad/us, so a rate quoted as ``gamma / 2pi = 1 MHz`` is ``2 * pi`` here (use
:func:`mhz`).  Times are in microseconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.optimize import least_squares

from .errors import AboveThresholdError, FitError, TruncationError
from .lindblad import (
    CascadePair,
    Dissipator,
    Liouvillian,
    build_liouvillian,
    double_commutator_super,
    steady_state,
)
from .operators import (
    IDENTITY_2,
    KET_E,
    KET_G,
    SIGMA_MINUS,
    SIGMA_Z,
    SpaceLayout,
    bosonic_annihilation,
    dag,
    identity,
    kron,
    partial_trace,
)

TWO_PI = 2 * math.pi


def mhz(value):
    """Convert ``f = omega / 2pi`` in MHz to angular frequency in rad/us."""
    return TWO_PI * np.asarray(value, dtype=float) if np.ndim(value) else TWO_PI * float(value)


def to_mhz(omega):
    return omega / TWO_PI


@dataclass(frozen=True)
class JPCParams:
    kappa1: float
    kappa2: float
    eps_p: float = 0.0
    phi_p: float = 0.0
    omega1: float | None = None  # bookkeeping only
    omega2: float | None = None

    def __post_init__(self):
        if self.kappa1 <= 0 or self.kappa2 <= 0:
            raise ValueError("mode decay rates must be positive")
        check_below_threshold(self.eps_p)


@dataclass(frozen=True)
class QubitParams:
    """Rates of one qubit; ``delta`` is its detuning from the squeezer mode."""

    gamma_r: float
    gamma_l: float = 0.0
    gamma_phi: float = 0.0
    gamma_ng: float = 0.0
    delta: float = 0.0
    anharmonicity: float | None = None  # carried, not used

    def __post_init__(self):
        for name in ("gamma_r", "gamma_l", "gamma_phi", "gamma_ng"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def gamma_1(self) -> float:
        """Total energy relaxation rate without drive."""
        return self.gamma_r + self.gamma_l + self.gamma_ng


@dataclass(frozen=True)
class LinkParams:
    eta1: float = 1.0
    eta2: float = 1.0

    def __post_init__(self):
        for eta in (self.eta1, self.eta2):
            if not 0.0 <= eta <= 1.0:
                raise ValueError(f"transmittance must lie in [0, 1], got {eta}")


@dataclass(frozen=True)
class NetworkParams:
    jpc: JPCParams
    qubits: tuple[QubitParams, QubitParams]
    link: LinkParams = field(default_factory=LinkParams)

    def with_pump(self, eps_p: float, phi_p: float | None = None) -> "NetworkParams":
        jpc = replace(self.jpc, eps_p=eps_p, phi_p=self.jpc.phi_p if phi_p is None else phi_p)
        return replace(self, jpc=jpc)

    @property
    def etas(self) -> tuple[float, float]:
        return (self.link.eta1, self.link.eta2)


@dataclass(frozen=True)
class TmsMoments:
    """Photon numbers and pair correlation delivered to the qubits."""

    n1: float
    n2: float
    m12: complex

    def __post_init__(self):
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError("photon numbers must be >= 0")
        lo, hi = sorted((self.n1, self.n2))
        if abs(self.m12) ** 2 > hi * (lo + 1) * (1 + 1e-12) + 1e-15:
            raise ValueError("correlation exceeds the Gaussian physicality bound")


def table1_params(eps_p: float = 0.0, phi_p: float = 0.0) -> NetworkParams:
    """Network with the measured chip parameters and fitted transmissions."""
    gamma_w = mhz(np.array([1.48, 0.7]))
    gamma_phi = mhz(np.array([0.04, 0.03]))
    gamma_ng = mhz(np.array([0.05, 0.35]))
    qubits = tuple(
        QubitParams(
            gamma_r=gamma_w[i] / 2,
            gamma_l=gamma_w[i] / 2,
            gamma_phi=gamma_phi[i],
            gamma_ng=gamma_ng[i],
            anharmonicity=mhz((-150.0, -180.0)[i]),
        )
        for i in range(2)
    )
    jpc = JPCParams(
        kappa1=mhz(60.0), kappa2=mhz(75.0), eps_p=eps_p, phi_p=phi_p,
        omega1=mhz(6761.0), omega2=mhz(10044.0),
    )
    return NetworkParams(jpc=jpc, qubits=qubits, link=LinkParams(0.5, 0.3))


def ideal_params(
    bidirectional: bool = False,
    eta: float = 1.0,
    gamma_r: float = 1.0,
    kappa: float = 300.0,
    eps_p: float = 0.0,
) -> NetworkParams:
    """Symmetric loss-free network in units of ``gamma_r``."""
    q = QubitParams(gamma_r=gamma_r, gamma_l=gamma_r if bidirectional else 0.0)
    return NetworkParams(
        jpc=JPCParams(kappa1=kappa * gamma_r, kappa2=kappa * gamma_r, eps_p=eps_p),
        qubits=(q, q),
        link=LinkParams(eta, eta),
    )


def check_below_threshold(eps_p: float) -> None:
    if not 0.0 <= eps_p < 1.0:
        raise AboveThresholdError(f"pump strength must satisfy 0 <= eps_p < 1, got {eps_p}")


def squeezing_from_pump(eps_p: float) -> float:
    """Squeezing parameter ``r = 2 artanh(eps_p)`` of the squeezer output."""
    check_below_threshold(eps_p)
    return 2.0 * math.atanh(eps_p)


def pump_from_squeezing(r: float) -> float:
    return math.tanh(r / 2.0)


def tms_moments_analytic(eps_p: float, phi_p: float = 0.0, link: LinkParams | None = None) -> TmsMoments:
    link = link or LinkParams()
    r = squeezing_from_pump(eps_p)
    sh, ch = math.sinh(r), math.cosh(r)
    return TmsMoments(
        n1=link.eta1 * sh**2,
        n2=link.eta2 * sh**2,
        m12=math.sqrt(link.eta1 * link.eta2) * sh * ch * complex(math.cos(phi_p), math.sin(phi_p)),
    )


def moments_for_params(params: NetworkParams) -> TmsMoments:
    return tms_moments_analytic(params.jpc.eps_p, params.jpc.phi_p, params.link)


# -- two-qubit effective master equation ------------------------------------

QUBIT_LAYOUT = SpaceLayout((2, 2))


def _qubit_ops(n_qubits: int):
    layout = SpaceLayout((2,) * n_qubits)
    lowers = [layout.embed(SIGMA_MINUS, k) for k in range(n_qubits)]
    zs = [layout.embed(SIGMA_Z, k) for k in range(n_qubits)]
    return layout, lowers, zs


def _qubit_terms(q: QubitParams, n: float, lower, z):
    return [
        Dissipator(lower, (n + 1) * q.gamma_r + q.gamma_l + q.gamma_ng),
        Dissipator(dag(lower), n * q.gamma_r),
        Dissipator(z, q.gamma_phi / 2),
    ]


def _correlated_super(gamma: float, m12: complex, s1m, s2m, d: int):
    return gamma * (
        m12 * double_commutator_super(dag(s1m), dag(s2m), d)
        + np.conj(m12) * double_commutator_super(s1m, s2m, d)
    )


def build_effective_me(params: NetworkParams, moments: TmsMoments) -> Liouvillian:
    """Two-qubit generator with the squeezer modes eliminated.

    The reservoir enters through the delivered photon numbers and the pair
    correlation ``moments``; detunings enter through ``delta_i sigma_z / 2``.
    """
    layout, (s1, s2), (z1, z2) = _qubit_ops(2)
    q1, q2 = params.qubits
    h = q1.delta * z1 / 2 + q2.delta * z2 / 2
    terms = _qubit_terms(q1, moments.n1, s1, z1) + _qubit_terms(q2, moments.n2, s2, z2)
    liou = build_liouvillian(h, terms, layout=layout)
    corr = _correlated_super(math.sqrt(q1.gamma_r * q2.gamma_r), moments.m12, s1, s2, layout.dim)
    return Liouvillian((liou.matrix + corr).tocsr(), layout, {"model": "effective"})


def effective_steady_state(params: NetworkParams) -> np.ndarray:
    return steady_state(build_effective_me(params, moments_for_params(params)))


# -- full cascaded model -----------------------------------------------------


def cascaded_layout(n_max: int) -> SpaceLayout:
    return SpaceLayout((n_max + 1, n_max + 1, 2, 2))


def build_full_cascaded(params: NetworkParams, n_max: int) -> Liouvillian:
    """Squeezer modes plus qubits, coupled by a unidirectional cascade."""
    if n_max < 2:
        raise ValueError("n_max must be >= 2 for the cascaded model")
    layout = cascaded_layout(n_max)
    a = sp.csr_matrix(bosonic_annihilation(n_max))
    s_minus = sp.csr_matrix(SIGMA_MINUS)
    sz = sp.csr_matrix(SIGMA_Z)
    a1, a2 = layout.embed(a, 0), layout.embed(a, 1)
    s1, s2 = layout.embed(s_minus, 2), layout.embed(s_minus, 3)
    z1, z2 = layout.embed(sz, 2), layout.embed(sz, 3)

    jpc = params.jpc
    q1, q2 = params.qubits
    pump = 0.5 * math.sqrt(jpc.kappa1 * jpc.kappa2) * jpc.eps_p
    phase = complex(math.cos(jpc.phi_p), math.sin(jpc.phi_p))
    h = 1j * pump * (phase * dag(a1) @ dag(a2) - np.conj(phase) * a1 @ a2)
    h = h + q1.delta * z1 / 2 + q2.delta * z2 / 2

    dissipators = [Dissipator(a1, jpc.kappa1), Dissipator(a2, jpc.kappa2)]
    for q, s, z in ((q1, s1, z1), (q2, s2, z2)):
        dissipators.append(Dissipator(s, q.gamma_r + q.gamma_l + q.gamma_ng))
        dissipators.append(Dissipator(z, q.gamma_phi / 2))
    eta1, eta2 = params.etas
    cascades = [
        CascadePair(a1, dag(s1), math.sqrt(jpc.kappa1 * q1.gamma_r * eta1)),
        CascadePair(a2, dag(s2), math.sqrt(jpc.kappa2 * q2.gamma_r * eta2)),
    ]
    liou = build_liouvillian(sp.csr_matrix(h), dissipators, cascades, layout=layout)
    return Liouvillian(liou.matrix, layout, {"model": "cascaded", "n_max": n_max})


def top_fock_population(rho: np.ndarray, n_max: int) -> float:
    """Probability that either squeezer mode sits in its highest Fock level."""
    layout = cascaded_layout(n_max)
    p1 = np.real(np.diag(partial_trace(rho, layout, [0])))[-1]
    p2 = np.real(np.diag(partial_trace(rho, layout, [1])))[-1]
    return float(max(p1, p2))


@dataclass
class CascadedSolution:
    rho: np.ndarray
    n_max: int
    top_population: float
    liouvillian: Liouvillian

    @property
    def qubit_state(self) -> np.ndarray:
        return partial_trace(self.rho, cascaded_layout(self.n_max), [2, 3])


def cascaded_steady_state(
    params: NetworkParams,
    n_max: int | None = None,
    tol: float = 1e-6,
    max_n: int = 12,
    strict: bool = True,
) -> CascadedSolution:
    """Steady state of the cascaded model with a certified Fock cutoff.

    With ``n_max`` given the cutoff is fixed; otherwise it grows from 4 until
    the top Fock level holds at most ``tol``.  An uncertified result raises
    :class:`TruncationError` unless ``strict`` is false, in which case it is
    returned and the caller inspects ``top_population``.
    """
    candidates = [n_max] if n_max is not None else range(4, max_n + 1)
    sol = None
    for n in candidates:
        liou = build_full_cascaded(params, n)
        rho = steady_state(liou)
        sol = CascadedSolution(rho, n, top_fock_population(rho, n), liou)
        if sol.top_population <= tol:
            return sol
    if not strict:
        return sol
    raise TruncationError(
        f"top Fock population {sol.top_population:.2e} > {tol} at n_max={sol.n_max}"
    )


# -- pure states and the dark-state condition --------------------------------


def dark_state(n_char: float, phi_p: float = 0.0) -> np.ndarray:
    """Pure two-qubit state annihilated by the correlated reservoir."""
    if n_char < 0:
        raise ValueError("n_char must be >= 0")
    gg = kron(KET_G, KET_G)
    ee = kron(KET_E, KET_E)
    psi = math.sqrt(n_char + 1) * gg + complex(math.cos(phi_p), math.sin(phi_p)) * math.sqrt(n_char) * ee
    return psi / np.linalg.norm(psi)


def tms_pure_state(r: float, n_max: int, phi: float = 0.0, tail_tol: float | None = 1e-8) -> np.ndarray:
    """Truncated two-mode squeezed vacuum ``sum_n (e^{i phi} tanh r)^n |n, n>``.

    Set ``tail_tol=None`` to skip the truncation check.
    """
    t = math.tanh(r)
    if tail_tol is not None and t ** (n_max + 1) >= tail_tol:
        raise TruncationError(
            f"tanh(r)^(n_max+1) = {t ** (n_max + 1):.2e} >= {tail_tol}; raise n_max"
        )
    dim = n_max + 1
    psi = np.zeros(dim * dim, dtype=complex)
    z = t * complex(math.cos(phi), math.sin(phi))
    for n in range(dim):
        psi[n * dim + n] = z**n
    return psi / np.linalg.norm(psi)


def jc_coupling(n_max: int) -> sp.csr_matrix:
    """Unit-strength exchange coupling between each mode and its qubit.

    Returned as a sparse matrix on the layout (mode 1, mode 2, qubit 1,
    qubit 2).
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    layout = cascaded_layout(n_max)
    a = sp.csr_matrix(bosonic_annihilation(n_max))
    s = sp.csr_matrix(SIGMA_MINUS)
    a1, a2 = layout.embed(a, 0), layout.embed(a, 1)
    s1, s2 = layout.embed(s, 2), layout.embed(s, 3)
    h = 1j * (dag(a1) @ s1 - a1 @ dag(s1) + dag(a2) @ s2 - a2 @ dag(s2))
    return h.tocsr()


# -- gain, calibration and spectroscopy --------------------------------------


def gain_bandwidth(kappa: float, eps_p: float) -> tuple[float, float]:
    """Zero-frequency power gain and amplification bandwidth of the squeezer."""
    check_below_threshold(eps_p)
    p = eps_p**2
    g0 = ((p + 1) / (p - 1)) ** 2
    delta_omega = kappa * ((1 - p) / (1 + p)) ** 2
    return g0, delta_omega


def pump_power_to_eps(p_dbm: float, alpha_dbm: float = -46.0) -> float:
    eps = 10 ** ((p_dbm - alpha_dbm) / 20)
    check_below_threshold(eps)
    return eps


def s21_transmission(delta, omega_drive, gamma_w: float, gamma_d: float):
    """Complex transmission past a qubit side-coupled to a waveguide."""
    if gamma_d <= 0:
        raise ValueError("gamma_d must be positive")
    x = np.asarray(delta, dtype=float) / gamma_d
    sat = np.asarray(omega_drive, dtype=float) ** 2 / (gamma_w * gamma_d)
    return 1 - gamma_w / (2 * gamma_d) * (1 - 1j * x) / (1 + x**2 + sat)


def fit_s21_lorentzian(delta, s21_abs, guess: tuple[float, float] | None = None):
    """Fit ``|S21|`` measured at weak drive.

    Returns ``(gamma_d, depth)`` with ``depth = gamma_w / (2 gamma_d)``.
    """
    delta = np.asarray(delta, dtype=float)
    s21_abs = np.asarray(s21_abs, dtype=float)
    if guess is None:
        depth0 = max(1 - s21_abs.min(), 1e-3)
        half = delta[np.abs(1 - s21_abs) >= depth0 / 2]
        width0 = (half.max() - half.min()) / 2 if half.size > 1 else np.ptp(delta) / 10
        guess = (max(width0, 1e-6), depth0)

    def model(p):
        gamma_d, depth = p
        return np.abs(s21_transmission(delta, 0.0, 2 * depth * gamma_d, gamma_d))

    fit = least_squares(lambda p: model(p) - s21_abs, guess, bounds=([1e-12, 0], [np.inf, 2]))
    if not fit.success:
        raise FitError("S21 fit did not converge", residual=float(np.sqrt(np.mean(fit.fun**2))))
    return float(fit.x[0]), float(fit.x[1])


def waveguide_coupling_estimate(omega_q: float, z0: float, c_coupling: float, c_total: float) -> float:
    """Radiative decay rate of a capacitively coupled transmon (SI units)."""
    if min(omega_q, z0, c_coupling, c_total) <= 0:
        raise ValueError("all inputs must be positive")
    return omega_q**2 * z0 * c_coupling**2 / c_total


# -- four-qubit replication ---------------------------------------------------

FOUR_QUBIT_LAYOUT = SpaceLayout((2, 2, 2, 2))  # (outer 1, outer 2, inner 1, inner 2)


def build_four_qubit_me(params: NetworkParams, j_exchange: float, moments: TmsMoments) -> Liouvillian:
    """Outer qubits driven by the reservoir, inner qubits exchange-coupled.

    Qubit order is (outer 1, outer 2, inner 1, inner 2).  Inner qubit ``i``
    inherits the dephasing and non-guided decay of site ``i``.
    """
    if j_exchange < 0:
        raise ValueError("j_exchange must be >= 0")
    layout, s, z = _qubit_ops(4)
    q1, q2 = params.qubits
    h = params.qubits[0].delta * z[0] / 2 + params.qubits[1].delta * z[1] / 2
    for i in range(2):
        h = h + j_exchange * (dag(s[2 + i]) @ s[i] + dag(s[i]) @ s[2 + i])
    terms = _qubit_terms(q1, moments.n1, s[0], z[0]) + _qubit_terms(q2, moments.n2, s[1], z[1])
    for i, q in enumerate((q1, q2)):
        terms.append(Dissipator(s[2 + i], q.gamma_ng))
        terms.append(Dissipator(z[2 + i], q.gamma_phi / 2))
    liou = build_liouvillian(h, terms, layout=layout)
    corr = _correlated_super(math.sqrt(q1.gamma_r * q2.gamma_r), moments.m12, s[0], s[1], layout.dim)
    return Liouvillian((liou.matrix + corr).tocsr(), layout, {"model": "four-qubit"})


def bell_state(sign: int = +1) -> np.ndarray:
    return (kron(KET_G, KET_G) + sign * kron(KET_E, KET_E)) / math.sqrt(2)


def identity_qubits(n: int) -> np.ndarray:
    return identity(2**n)


__all__ = [
    "IDENTITY_2",
    "TWO_PI",
    "JPCParams",
    "QubitParams",
    "LinkParams",
    "NetworkParams",
    "TmsMoments",
    "mhz",
    "to_mhz",
    "table1_params",
    "ideal_params",
    "squeezing_from_pump",
    "pump_from_squeezing",
    "tms_moments_analytic",
    "moments_for_params",
    "build_effective_me",
    "effective_steady_state",
    "build_full_cascaded",
    "cascaded_steady_state",
    "top_fock_population",
    "dark_state",
    "tms_pure_state",
    "jc_coupling",
    "gain_bandwidth",
    "pump_power_to_eps",
    "s21_transmission",
    "fit_s21_lorentzian",
    "waveguide_coupling_estimate",
    "build_four_qubit_me",
    "bell_state",
]
