"""Two-qubit entanglement measures, closed-form optima and pump optimization."""

from __future__ import annotations

import logging
import math
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DimensionMismatchError
from .operators import SIGMA_Y, dag, kron, psd_sqrt

logger = logging.getLogger(__name__)

YY = kron(SIGMA_Y, SIGMA_Y)
CLAMP = 1e-14
PURE_RTOL = 1e-14


def _check_two_qubit(rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionMismatchError(f"expected a 4x4 two-qubit state, got shape {rho.shape}")
    return rho


def spin_flip(rho: np.ndarray) -> np.ndarray:
    return YY @ np.conj(rho) @ YY


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence from the singular values of ``sqrt(rho~) sqrt(rho)``.

    These are the eigenvalues of ``R = sqrt(sqrt(rho) rho~ sqrt(rho))``.
    Eigenvalues of ``rho`` below ``1e-14`` of the largest are zeroed before
    the square root so that pure states keep rank one.
    """
    rho = _check_two_qubit(rho)
    root = psd_sqrt(rho, rtol=PURE_RTOL)
    root_flip = YY @ np.conj(root) @ YY
    lam = np.linalg.svd(root @ root_flip, compute_uv=False)
    return float(min(1.0, max(0.0, lam[0] - lam[1:].sum())))


def concurrence_from_product(rho: np.ndarray) -> float:
    """Same quantity from the spectrum of ``rho rho~``."""
    rho = _check_two_qubit(rho)
    w = np.real(np.linalg.eigvals(rho @ spin_flip(rho)))
    w = np.sort(np.sqrt(np.where(w < CLAMP, 0.0, w)))[::-1]
    return float(min(1.0, max(0.0, w[0] - w[1:].sum())))


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def dv_eof(c: float) -> float:
    """Entanglement of formation (ebits) of a two-qubit state with concurrence ``c``."""
    if c < -1e-12 or c > 1 + 1e-12:
        raise ValueError(f"concurrence must lie in [0, 1], got {c}")
    c = min(max(c, 0.0), 1.0)
    return binary_entropy((1 + math.sqrt(1 - c * c)) / 2)


def dv_purity(rho: np.ndarray) -> float:
    rho = _check_two_qubit(rho)
    return float(np.real(np.trace(rho @ rho)))


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``."""
    root = psd_sqrt(rho)
    s = np.linalg.svd(root @ psd_sqrt(sigma), compute_uv=False)
    return float(min(1.0, s.sum() ** 2))


def pure_fidelity(psi: np.ndarray, rho: np.ndarray) -> float:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return float(np.real(np.vdot(psi, rho @ psi)))


class AnalyticBounds(NamedTuple):
    c_star: float
    r_star: float
    eps_star: float
    ef_star: float


def analytic_bounds() -> AnalyticBounds:
    """Optimum of the ideal bidirectional network.

    Returns the maximal concurrence, the squeezing and pump strength that
    reach it, and the corresponding entanglement of formation.
    """
    s13 = math.sqrt(13.0)
    c_star = (13 * s13 - 19) / 108
    r_star = 0.5 * math.log((4 + s13) / 3)
    return AnalyticBounds(c_star, r_star, math.tanh(r_star / 2), dv_eof(c_star))


def r_star_alternative() -> float:
    """``artanh((sqrt13 - 1) / 6)``, equal to ``analytic_bounds().r_star``."""
    return math.atanh((math.sqrt(13.0) - 1) / 6)


class PumpOptimum(NamedTuple):
    eps_opt: float
    c_opt: float
    flag: str  # "", "grid-edge" or "all-zero"


DEFAULT_GRID = tuple(np.linspace(0.0, 0.9, 41))


def optimize_pump(
    params,
    eps_grid: Sequence[float] | None = None,
    concurrence_of: Callable[[object, float], float] | None = None,
    xtol: float = 1e-6,
) -> PumpOptimum:
    """Maximize the steady-state concurrence over the pump strength.

    A coarse grid scan is refined by golden-section search around the best
    grid point.  ``concurrence_of(params, eps)`` defaults to the effective
    master equation.  Optima on the grid boundary are returned unrefined and
    flagged ``"grid-edge"``.
    """
    grid = np.asarray(DEFAULT_GRID if eps_grid is None else eps_grid, dtype=float)
    if grid.size < 3 or np.any(np.diff(grid) <= 0):
        raise ValueError("eps_grid must be increasing with at least 3 points")
    if grid[0] < 0 or grid[-1] >= 1:
        raise ValueError("eps_grid must lie within [0, 1)")
    if concurrence_of is None:
        concurrence_of = effective_concurrence

    values = np.array([concurrence_of(params, e) for e in grid])
    k = int(np.argmax(values))
    if values[k] <= 0.0:
        return PumpOptimum(float(grid[0]), 0.0, "all-zero")
    if k == 0 or k == grid.size - 1:
        return PumpOptimum(float(grid[k]), float(values[k]), "grid-edge")

    res = minimize_scalar(
        lambda e: -concurrence_of(params, e),
        bracket=(grid[k - 1], grid[k], grid[k + 1]),
        method="golden",
        tol=xtol,
    )
    if -res.fun < values[k]:
        return PumpOptimum(float(grid[k]), float(values[k]), "")
    return PumpOptimum(float(res.x), float(-res.fun), "")


def effective_concurrence(params, eps_p: float) -> float:
    from .models import effective_steady_state

    return concurrence(effective_steady_state(params.with_pump(eps_p)))


def local_unitary(rng: np.random.Generator) -> np.ndarray:
    """Random product of two single-qubit unitaries."""
    def one():
        z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        q, r = np.linalg.qr(z)
        return q * (np.diag(r) / np.abs(np.diag(r)))

    return kron(one(), one())


def random_state(rng: np.random.Generator, dim: int = 4, rank: int | None = None) -> np.ndarray:
    """Random density matrix from the Ginibre ensemble."""
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ dag(g)
    return rho / np.trace(rho).real
