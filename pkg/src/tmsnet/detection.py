"""Photon-statistics detection: heterodyne chain versus qubits as detectors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.stats import norm

from .errors import IntegrationError
from .gaussian import quadrature_scale_factor
from .tomography import PauliExpectations


@dataclass(frozen=True)
class DetectorCal:
    gain: float
    n_add: float

    def __post_init__(self):
        if self.gain <= 1:
            raise ValueError("gain must exceed 1")
        if self.n_add < 0:
            raise ValueError("n_add must be >= 0")


@dataclass(frozen=True)
class QubitDetectorCal:
    xi: float
    readout_snr: float

    def __post_init__(self):
        if not 0 < self.xi <= 1:
            raise ValueError("xi must lie in (0, 1]")
        if self.readout_snr <= 0:
            raise ValueError("readout_snr must be > 0")


def qubit_photon_estimate(p_e: float, cal: QubitDetectorCal) -> float:
    """Photon number inferred from the excited population (linear response only)."""
    if not 0.0 <= p_e <= 1.0:
        raise ValueError("p_e must lie in [0, 1]")
    return p_e / cal.xi


def qubit_correlation_estimate(
    exps: PauliExpectations, cal1: QubitDetectorCal, cal2: QubitDetectorCal
) -> complex:
    pref = 0.25 / math.sqrt(cal1.xi * cal2.xi)
    return pref * complex(exps["XX"] - exps["YY"], -(exps["YX"] + exps["XY"]))


def heterodyne_variance(n1: float, n_add: float, samples: int) -> float:
    """Variance of the heterodyne photon-number estimator over ``samples`` records."""
    if samples < 2:
        raise ValueError("samples must be >= 2")
    return (0.5 + n_add + n1) ** 2 / (samples - 1)


def qubit_variance(cal: QubitDetectorCal) -> float:
    """Per-shot variance of the qubit photon-number estimator."""
    return 1.0 / (cal.readout_snr * cal.xi**2)


def snr_from_readout_fidelity(fidelity: float) -> float:
    """SNR of two Gaussian readout blobs whose assignment fidelity is ``fidelity``.

    With ``F = 1 - P(e|g) - P(g|e)`` and blob separation ``d`` in units of
    the blob width, ``F = 2 Phi(d/2) - 1`` and ``SNR = d^2``.
    """
    if not 0 < fidelity < 1:
        raise ValueError("fidelity must lie in (0, 1)")
    return float((2 * norm.ppf((1 + fidelity) / 2)) ** 2)


def variance_crossover(het: DetectorCal, qubit: QubitDetectorCal) -> float | None:
    """Photon number at which per-shot heterodyne and qubit variances match.

    Returns ``None`` when the qubit variance already lies below the
    heterodyne floor at zero photons, so the curves never cross for
    ``n1 >= 0``.
    """
    root = math.sqrt(qubit_variance(qubit)) - 0.5 - het.n_add
    return root if root > 0 else None


@dataclass
class HeterodyneEstimate:
    raw: np.ndarray  # covariance of amplified records
    rescaled: np.ndarray  # after the vacuum-referenced rescaling, amplifier noise included
    v: np.ndarray  # amplifier noise subtracted
    zeta: tuple[float, float]
    samples: int
    seed: int


def _record(rng, v, cal1, cal2, samples, swap):
    field = rng.multivariate_normal(np.zeros(4), v, size=samples, method="cholesky")
    noise = rng.normal(size=(samples, 4)) * np.sqrt(
        np.array([cal1.n_add, cal1.n_add, cal2.n_add, cal2.n_add])
    )
    gains = np.sqrt(np.array([cal1.gain, cal1.gain, cal2.gain, cal2.gain]))
    rec = gains * (field + noise)
    if swap:
        # channel 2 is spectrum inverted: its digitizer records (Q2, I2)
        rec = rec[:, [0, 1, 3, 2]]
    return rec


def heterodyne_sample(
    v: np.ndarray,
    cal1: DetectorCal,
    cal2: DetectorCal,
    samples: int = 100_000,
    seed: int = 0,
    swap_channel2: bool = True,
) -> HeterodyneEstimate:
    """Simulate a heterodyne covariance measurement and its calibration.

    A pump-off record fixes the scale factors; the pump-on record is
    rescaled, the channel-2 quadratures are swapped back when
    ``swap_channel2`` is set, and the added noise is subtracted.
    """
    if samples < 1000:
        raise ValueError("samples must be >= 1000")
    v = np.asarray(v, dtype=float)
    rng = np.random.default_rng(seed)
    off = _record(rng, np.eye(4) / 2, cal1, cal2, samples, swap_channel2)
    on = _record(rng, v, cal1, cal2, samples, swap_channel2)
    if swap_channel2:
        off = off[:, [0, 1, 3, 2]]
        on = on[:, [0, 1, 3, 2]]
    var_off = off.var(axis=0, ddof=1)
    zeta = (
        quadrature_scale_factor(var_off[0], var_off[1], cal1.n_add),
        quadrature_scale_factor(var_off[2], var_off[3], cal2.n_add),
    )
    scale = np.array([zeta[0], zeta[0], zeta[1], zeta[1]])
    raw = np.cov(on, rowvar=False)
    rescaled = np.cov(on * scale, rowvar=False)
    noise = np.diag([cal1.n_add, cal1.n_add, cal2.n_add, cal2.n_add])
    return HeterodyneEstimate(raw, rescaled, rescaled - noise, zeta, samples, seed)


def photon_number_from_covariance(v_rescaled: np.ndarray, n_add1: float) -> float:
    """Channel-1 photon-number estimate from a rescaled covariance."""
    return float((v_rescaled[0, 0] + v_rescaled[1, 1]) / 2 - 0.5 - n_add1)


def monte_carlo_n1_variance(
    n1: float, n_add: float, gain: float, samples: int, repetitions: int, seed: int = 0
) -> float:
    """Empirical variance of the channel-1 photon-number estimator.

    Each repetition draws ``samples`` amplified quadrature pairs of a thermal
    field with ``n1`` photons, divides out the known gain and evaluates the
    estimator.  Field and amplifier noise are independent Gaussians, so they
    are drawn as one Gaussian with the summed variance.
    """
    rng = np.random.default_rng(seed)
    sigma = math.sqrt(0.5 + n1 + n_add)
    estimates = np.empty(repetitions)
    for k in range(repetitions):
        raw = math.sqrt(gain) * sigma * rng.standard_normal((2, samples))
        estimates[k] = (raw / math.sqrt(gain)).var(axis=1, ddof=1).mean() - 0.5 - n_add
    return float(estimates.var(ddof=1))


def lorentzian_response_check(gamma_r: float, gamma_1: float) -> float:
    """Ratio of the integrated qubit response to ``gamma_r / gamma_1``."""
    if not gamma_1 >= gamma_r > 0:
        raise ValueError("require gamma_1 >= gamma_r > 0")
    half = gamma_1 / 2
    value, err = quad(lambda w: 1.0 / (w * w + half * half), -np.inf, np.inf, epsabs=0, epsrel=1e-12)
    if not np.isfinite(value) or err > 1e-8 * value:
        raise IntegrationError(f"quadrature error estimate {err:.2e} too large")
    return gamma_r * value / (2 * math.pi) / (gamma_r / gamma_1)


def lorentzian_window_error(n_widths: float) -> float:
    """Fraction of the response lost when integrating over ``+-n_widths * gamma_1``."""
    return 1 - (2 / math.pi) * math.atan(2 * n_widths)
