"""Two-mode Gaussian states: covariances, symplectic spectra, EOF and calibration.

Quadratures are ordered (I1, Q1, I2, Q2) and the vacuum covariance is
``I / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import FitError, UnphysicalCovarianceError

HBAR = 1.054571817e-34
K_B = 1.380649e-23

OMEGA = np.array([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=float)
PHYSICALITY_TOL = 1e-9


@dataclass(frozen=True)
class TmsvModel:
    r: float
    eta1: float = 1.0
    eta2: float = 1.0

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("r must be >= 0")
        for eta in (self.eta1, self.eta2):
            if not 0.0 <= eta <= 1.0:
                raise ValueError(f"transmittance must lie in [0, 1], got {eta}")


def vacuum_covariance() -> np.ndarray:
    return np.eye(4) / 2


def tmsv_covariance(model: TmsvModel) -> np.ndarray:
    """Covariance of a two-mode squeezed vacuum after losses ``eta1, eta2``."""
    r, e1, e2 = model.r, model.eta1, model.eta2
    a = (e1 * math.cosh(2 * r) + 1 - e1) / 2
    b = (e2 * math.cosh(2 * r) + 1 - e2) / 2
    c = math.sqrt(e1 * e2) * math.sinh(2 * r) / 2
    return np.array(
        [[a, 0, c, 0], [0, a, 0, -c], [c, 0, b, 0], [0, -c, 0, b]], dtype=float
    )


def covariance_from_moments(n1: float, n2: float, m12: complex) -> np.ndarray:
    """Covariance of the Gaussian state with ``<a_i^+ a_i> = n_i``, ``<a1 a2> = m12``."""
    a, b = n1 + 0.5, n2 + 0.5
    re, im = float(np.real(m12)), float(np.imag(m12))
    return np.array(
        [[a, 0, re, im], [0, a, im, -re], [re, im, b, 0], [im, -re, 0, b]], dtype=float
    )


def is_physical(v: np.ndarray, tol: float = PHYSICALITY_TOL) -> bool:
    v = np.asarray(v, dtype=float)
    if v.shape != (4, 4) or np.max(np.abs(v - v.T)) > 1e-12:
        return False
    return bool(np.linalg.eigvalsh(v + 0.5j * OMEGA).min() >= -tol)


def _blocks(v):
    v = np.asarray(v, dtype=float)
    if v.shape != (4, 4):
        raise UnphysicalCovarianceError(f"expected a 4x4 covariance, got shape {v.shape}")
    return v[:2, :2], v[2:, 2:], v[:2, 2:]


def symplectic_eigenvalues(v: np.ndarray, partial_transpose: bool = True) -> tuple[float, float]:
    """Symplectic eigenvalues ``(nu_plus, nu_minus)``.

    By default these belong to the partially transposed state, whose smaller
    eigenvalue decides separability (``nu_minus < 1/2`` means entangled).
    Pass ``partial_transpose=False`` for the spectrum of ``v`` itself.
    """
    a, b, c = _blocks(v)
    sign = -1.0 if partial_transpose else 1.0
    delta = np.linalg.det(a) + np.linalg.det(b) + 2 * sign * np.linalg.det(c)
    det_v = np.linalg.det(np.asarray(v, dtype=float))
    disc = delta**2 - 4 * det_v
    if disc < -1e-12:
        raise UnphysicalCovarianceError(f"negative discriminant {disc:.3e}")
    root = math.sqrt(max(disc, 0.0))
    nu_plus = math.sqrt(max((delta + root) / 2, 0.0))
    nu_minus = math.sqrt(max((delta - root) / 2, 0.0))
    return nu_plus, nu_minus


def _eof_h(x: float) -> float:
    if x >= 1.0:
        return 0.0
    if x <= 0.0:
        raise ValueError("h(x) diverges at x <= 0")
    p = (1 + x) ** 2 / (4 * x)
    q = (1 - x) ** 2 / (4 * x)
    return p * math.log2(p) - (q * math.log2(q) if q > 0 else 0.0)


def cv_eof(v: np.ndarray) -> float:
    """Gaussian entanglement of formation in ebits (exact for symmetric states)."""
    _, nu_minus = symplectic_eigenvalues(v, partial_transpose=True)
    return max(0.0, _eof_h(2 * nu_minus))


def cv_purity(v: np.ndarray) -> float:
    det_v = float(np.linalg.det(np.asarray(v, dtype=float)))
    if det_v <= 0:
        raise UnphysicalCovarianceError(f"covariance determinant {det_v:.3e} <= 0")
    return 1.0 / (4.0 * math.sqrt(det_v))


def duan_simon(n1: float, n2: float, m_corr: float) -> float:
    """EPR variance sum; values below 1 certify entanglement."""
    if n1 < 0 or n2 < 0:
        raise ValueError("photon numbers must be >= 0")
    return 1.0 + n1 + n2 - 2.0 * m_corr


def duan_simon_covariance(v: np.ndarray) -> float:
    """EPR variance sum minimized over a phase rotation of mode 2.

    Uses ``(dX_-)^2 + (dP_+)^2`` with ``X_- = (I1 - I2')/sqrt2`` and
    ``P_+ = (Q1 + Q2')/sqrt2``, where the primed quadratures are rotated by
    the optimal angle.
    """
    a, b, c = _blocks(v)
    corr = math.hypot(c[0, 0] - c[1, 1], c[0, 1] + c[1, 0])
    return float((np.trace(a) + np.trace(b)) / 2 - corr)


def _model_vector(p):
    r, e1, e2 = p
    return tmsv_covariance(TmsvModel(max(r, 0.0), min(max(e1, 0.0), 1.0), min(max(e2, 0.0), 1.0)))


@dataclass(frozen=True)
class TmsvFit:
    model: TmsvModel
    residual: float


def fit_tmsv(v_measured: np.ndarray, starts=(0.1, 0.4, 0.7, 1.0, 1.5)) -> TmsvFit:
    """Least-squares fit of (r, eta1, eta2) to a measured covariance."""
    v_measured = np.asarray(v_measured, dtype=float)
    best = None
    for r0 in starts:
        fit = least_squares(
            lambda p: (_model_vector(p) - v_measured).ravel(),
            x0=[r0, 0.5, 0.5],
            bounds=([0.0, 0.0, 0.0], [10.0, 1.0, 1.0]),
            xtol=1e-15,
            ftol=1e-15,
            gtol=1e-15,
        )
        if best is None or fit.cost < best.cost:
            best = fit
    residual = float(np.linalg.norm(best.fun))
    if best.status <= 0:
        raise FitError("TMSV fit did not converge", residual=residual)
    r, e1, e2 = best.x
    return TmsvFit(TmsvModel(float(r), float(e1), float(e2)), residual)


def added_noise_model(temp, omega: float, gain: float, n_add: float, rbw: float):
    """Detected noise power (W) of an amplifier chain looking at a thermal load.

    ``omega`` in rad/s, ``rbw`` in Hz, ``gain`` linear.
    """
    temp = np.asarray(temp, dtype=float)
    if np.any(temp <= 0):
        raise ValueError("temperature must be > 0")
    x = HBAR * omega / (2 * K_B * temp)
    return HBAR * omega * rbw * gain * (0.5 / np.tanh(x) + n_add)


def fit_added_noise(temps, powers, omega: float, rbw: float) -> tuple[float, float]:
    """Recover ``(gain, n_add)`` from a temperature sweep by linear least squares.

    The model is linear in ``gain`` and ``gain * n_add``.
    """
    temps = np.asarray(temps, dtype=float)
    powers = np.asarray(powers, dtype=float)
    scale = HBAR * omega * rbw
    design = np.column_stack([0.5 / np.tanh(HBAR * omega / (2 * K_B * temps)), np.ones_like(temps)])
    (g, g_nadd), *_ = np.linalg.lstsq(design, powers / scale, rcond=None)
    if g <= 0:
        raise FitError("fitted gain is not positive", residual=float("nan"))
    return float(g), float(g_nadd / g)


def quadrature_scale_factor(var_i_off: float, var_q_off: float, n_add: float) -> float:
    """Factor mapping pump-off quadrature records to variance ``n_add + 1/2``."""
    if var_i_off <= 0 or var_q_off <= 0:
        raise ValueError("variances must be > 0")
    return math.sqrt(2 * (n_add + 0.5) / (var_i_off + var_q_off))


def db_to_linear(db: float) -> float:
    return 10 ** (db / 10)
