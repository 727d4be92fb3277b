"""Synthetic two-qubit tomography.

Pauli expectation values are stored as a 4x4 real array indexed by
``(i, j)`` with ``i, j`` in ``I, X, Y, Z`` order, so ``values[1, 2]`` is
``<X (x) Y>``.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .errors import NonConvergenceError, UndefinedFrameError
from .operators import PAULI, dag, kron

LABELS = "IXYZ"
PAULI_2Q = np.array([[kron(PAULI[a], PAULI[b]) for b in LABELS] for a in LABELS])
AXES = ("Z", "+X", "-X", "+Y", "-Y")
DEFAULT_BASES = tuple(itertools.product(AXES, AXES))
FRAME_THRESHOLD = 1e-3
KKT_TOL = 1e-8


@dataclass(frozen=True)
class PauliExpectations:
    values: np.ndarray
    noise_bound: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (4, 4):
            raise ValueError(f"expected 4x4 expectation values, got {v.shape}")
        v[0, 0] = 1.0
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __getitem__(self, key: str) -> float:
        """``exps["XY"]`` returns ``<X (x) Y>``."""
        return float(self.values[LABELS.index(key[0]), LABELS.index(key[1])])

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["i", "j", "value"])
        for a, b in itertools.product(range(4), range(4)):
            writer.writerow([LABELS[a], LABELS[b], repr(float(self.values[a, b]))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path: str | Path) -> "PauliExpectations":
        return cls.from_csv_text(Path(path).read_text())

    @classmethod
    def from_csv_text(cls, text: str) -> "PauliExpectations":
        values = np.full((4, 4), np.nan)
        for row in csv.DictReader(io.StringIO(text)):
            values[LABELS.index(row["i"]), LABELS.index(row["j"])] = float(row["value"])
        if np.isnan(values).any():
            raise ValueError("CSV does not contain all 16 expectation values")
        return cls(values)


def expectations_from_state(rho: np.ndarray) -> PauliExpectations:
    rho = np.asarray(rho, dtype=complex)
    values = np.real(np.einsum("abij,ji->ab", PAULI_2Q, rho))
    return PauliExpectations(values)


def linear_inversion(exps: PauliExpectations) -> np.ndarray:
    """Hermitian, trace-one (not necessarily positive) state matching ``exps``."""
    return np.einsum("ab,abij->ij", exps.values, PAULI_2Q) / 4


def _axis(label: str) -> tuple[int, float]:
    return LABELS.index(label[-1]), -1.0 if label.startswith("-") else 1.0


def simulate_measurements(
    rho: np.ndarray,
    bases=DEFAULT_BASES,
    shots: int = 10_000,
    readout_error: float = 0.0,
    seed: int = 0,
    calibrate: bool = False,
) -> PauliExpectations:
    """Sample projective two-qubit measurements with symmetric readout errors.

    Each basis is measured ``shots`` times.  Each qubit outcome is flipped
    with probability ``readout_error``.  Estimates from bases that measure
    the same Pauli operator (up to sign) are averaged.  With
    ``calibrate=True`` the known contraction ``1 - 2 readout_error`` per
    qubit is divided out.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if not 0.0 <= readout_error <= 0.5:
        raise ValueError("readout_error must lie in [0, 0.5]")
    if calibrate and readout_error >= 0.5:
        raise ValueError("cannot calibrate a fully depolarizing readout")
    rng = np.random.default_rng(seed)
    exact = expectations_from_state(rho).values
    p = readout_error
    flip = np.array([[1 - p, p], [p, 1 - p]])
    sums = np.zeros((4, 4))
    counts = np.zeros((4, 4))
    signs = np.array([1.0, -1.0])
    for b1, b2 in bases:
        i, s1 = _axis(b1)
        j, s2 = _axis(b2)
        e1, e2, e12 = s1 * exact[i, 0], s2 * exact[0, j], s1 * s2 * exact[i, j]
        # joint outcome probabilities for (+,+), (+,-), (-,+), (-,-)
        probs = np.array(
            [
                (1 + sa * e1 + sb * e2 + sa * sb * e12) / 4
                for sa in signs
                for sb in signs
            ]
        ).reshape(2, 2)
        probs = flip @ np.clip(probs, 0.0, None) @ flip.T
        freq = rng.multinomial(shots, probs.ravel() / probs.sum()).reshape(2, 2) / shots
        m1 = signs @ freq.sum(axis=1)
        m2 = signs @ freq.sum(axis=0)
        m12 = signs @ freq @ signs
        for (a, b), value in (((i, 0), s1 * m1), ((0, j), s2 * m2), ((i, j), s1 * s2 * m12)):
            sums[a, b] += value
            counts[a, b] += 1
    if np.any(counts[1:, 1:] == 0) or np.any(counts[1:, 0] == 0) or np.any(counts[0, 1:] == 0):
        raise ValueError("basis set does not cover all 15 non-trivial Pauli operators")
    values = np.divide(sums, counts, out=np.zeros((4, 4)), where=counts > 0)
    if calibrate:
        scale = 1 - 2 * p
        values[1:, 0] /= scale
        values[0, 1:] /= scale
        values[1:, 1:] /= scale**2
    values[0, 0] = 1.0
    bound = 5 / math.sqrt(shots) / ((1 - 2 * p) ** 2 if calibrate else 1.0)
    return PauliExpectations(values, noise_bound=bound)


def frame_rotation_angle(exps: PauliExpectations) -> float:
    """Angle of the z rotation on qubit 2 that removes the XY/YX correlations.

    The result is the correction to apply with :func:`apply_frame_rotation`;
    a state whose ``|ee>`` phase is ``theta`` yields ``-theta``.
    """
    xx, yy = exps["XX"], exps["YY"]
    if abs(xx) < FRAME_THRESHOLD or abs(yy) < FRAME_THRESHOLD:
        raise UndefinedFrameError(
            f"<XX> = {xx:.2e} or <YY> = {yy:.2e} below {FRAME_THRESHOLD}; frame undefined"
        )
    return math.atan(0.5 * (exps["XY"] / xx - exps["YX"] / yy))


def z_rotation_qubit2(phi: float) -> np.ndarray:
    return kron(np.eye(2), np.diag([1.0, np.exp(1j * phi)]))


def apply_frame_rotation(exps: PauliExpectations, phi: float) -> PauliExpectations:
    u = z_rotation_qubit2(phi)
    rho = u @ linear_inversion(exps) @ dag(u)
    out = expectations_from_state(rho)
    return PauliExpectations(out.values, exps.noise_bound)


# -- maximum-likelihood reconstruction ---------------------------------------

_OFF = np.tril_indices(4, -1)


def _unpack(x: np.ndarray) -> np.ndarray:
    t = np.zeros((4, 4), dtype=complex)
    t[np.diag_indices(4)] = x[:4]
    t[_OFF] = x[4:10] + 1j * x[10:16]
    return t


def _pack(t: np.ndarray) -> np.ndarray:
    return np.concatenate([np.real(np.diag(t)), np.real(t[_OFF]), np.imag(t[_OFF])])


def _state_from_t(t: np.ndarray) -> np.ndarray:
    a = dag(t) @ t
    return a / np.trace(a).real


def mle_cost(rho: np.ndarray, exps: PauliExpectations) -> float:
    """Sum of squared deviations over all 16 Pauli expectations."""
    return float(np.sum((expectations_from_state(rho).values - exps.values) ** 2))


def _cost_and_grad(x, target):
    t = _unpack(x)
    a = dag(t) @ t
    tr = np.trace(a).real
    rho = a / tr
    diff = rho - target
    cost = 4 * np.real(np.vdot(diff, diff))
    g = 8 * diff
    g_prime = (g - np.real(np.trace(g @ rho)) * np.eye(4)) / tr
    k = (g_prime @ dag(t)).T
    grad_t = 2 * k
    grad = np.concatenate([np.real(np.diag(grad_t)), np.real(grad_t[_OFF]), -np.imag(grad_t[_OFF])])
    return cost, grad


def project_to_states(h: np.ndarray) -> np.ndarray:
    """Frobenius-nearest density matrix to a Hermitian matrix.

    The spectrum is projected onto the probability simplex.
    """
    h = (h + dag(h)) / 2
    w, v = np.linalg.eigh(h)
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1
    k = np.nonzero(u - css / np.arange(1, u.size + 1) > 0)[0][-1]
    tau = css[k] / (k + 1)
    p = np.clip(w - tau, 0.0, None)
    return (v * p) @ dag(v)


def kkt_certificate(rho: np.ndarray, target: np.ndarray) -> float:
    """Norm of the projected-gradient map; zero exactly at the constrained optimum."""
    step = 1 / 8
    grad = 8 * (rho - target)
    return float(np.linalg.norm(rho - project_to_states(rho - step * grad)) / step)


@dataclass
class MleResult:
    rho: np.ndarray
    cost: float
    certificate: float
    polished: bool


def _start_points(target, rng, n_random):
    clipped = np.linalg.eigh((target + dag(target)) / 2)
    w, v = clipped
    w = np.clip(w, 0.0, None) + 1e-3
    rho0 = (v * w) @ dag(v)
    rho0 /= np.trace(rho0).real
    # rho0 = T^dag T with T lower-triangular, via Cholesky of the index-reversed matrix
    rev = np.linalg.cholesky(rho0[::-1, ::-1])[::-1, ::-1]
    starts = [_pack(dag(rev))]
    for _ in range(n_random):
        starts.append(rng.normal(size=16))
    return starts


def mle_reconstruct_detailed(
    exps: PauliExpectations, n_random: int = 3, seed: int = 0, maxiter: int = 100_000
) -> MleResult:
    target = linear_inversion(exps)
    rng = np.random.default_rng(seed)
    best = None
    for x0 in _start_points(target, rng, n_random):
        res = minimize(
            _cost_and_grad, x0, args=(target,), jac=True, method="BFGS",
            options={"gtol": 1e-12, "maxiter": maxiter},
        )
        if best is None or res.fun < best.fun:
            best = res
    rho = _state_from_t(_unpack(best.x))
    rho = (rho + dag(rho)) / 2
    cert = kkt_certificate(rho, target)
    polished = False
    if cert > KKT_TOL:
        # one projected-gradient step with step 1/L is exact for this quadratic
        for _ in range(50):
            rho = project_to_states(rho - (rho - target))
            cert = kkt_certificate(rho, target)
            if cert <= KKT_TOL:
                break
        polished = True
    if cert > KKT_TOL:
        raise NonConvergenceError(f"MLE did not reach the KKT tolerance ({cert:.2e})", best=rho)
    rho = rho / np.trace(rho).real
    return MleResult(rho, mle_cost(rho, exps), cert, polished)


def mle_reconstruct(exps: PauliExpectations, seed: int = 0) -> np.ndarray:
    """Physical two-qubit state minimizing the squared expectation misfit."""
    return mle_reconstruct_detailed(exps, seed=seed).rho
