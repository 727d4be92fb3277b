"""Liouvillian assembly, steady states and time evolution.

Density matrices are vectorized by stacking columns, so that
``vec(A rho B) = (B^T kron A) vec(rho)``.  Every superoperator in the package
is written against this convention.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DegenerateSteadyStateError, DimensionMismatchError, StepSizeError
from .operators import SpaceLayout, dag, unvec, vec

logger = logging.getLogger(__name__)

DENSE_LIMIT = 4096  # d**2 at or below which dense LU is used
SVD_LIMIT = 1024  # d**2 at or below which the null space is checked by SVD
DEGENERACY_GAP = 1e-8


@dataclass(frozen=True)
class Dissipator:
    """Lindblad term ``rate * D[operator]``."""

    operator: np.ndarray
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"dissipator rate must be >= 0, got {self.rate}")


@dataclass(frozen=True)
class CascadePair:
    """Cascaded drive ``rate * ([a rho, s+] + [s-, rho a^dag])``.

    ``source_op`` is the field operator ``a`` of the upstream system and
    ``sink_raise`` the raising operator ``s+`` of the downstream one.
    """

    source_op: np.ndarray
    sink_raise: np.ndarray
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"cascade rate must be >= 0, got {self.rate}")


@dataclass(frozen=True, eq=False)
class Liouvillian:
    matrix: sp.csr_matrix
    layout: SpaceLayout
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.layout.dim

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho), self.dim)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def __add__(self, other: "Liouvillian") -> "Liouvillian":
        if self.layout != other.layout:
            raise DimensionMismatchError("cannot add Liouvillians on different layouts")
        return Liouvillian((self.matrix + other.matrix).tocsr(), self.layout)


def _csr(a):
    return a.tocsr() if sp.issparse(a) else sp.csr_matrix(np.asarray(a, dtype=complex))


def spre(a, d: int):
    """Superoperator of ``rho -> a rho``."""
    return sp.kron(sp.identity(d, format="csr"), _csr(a), format="csr")


def spost(b, d: int):
    """Superoperator of ``rho -> rho b``."""
    return sp.kron(_csr(b).T, sp.identity(d, format="csr"), format="csr")


def sprepost(a, b, d: int):
    """Superoperator of ``rho -> a rho b``."""
    return sp.kron(_csr(b).T, _csr(a), format="csr")


def dissipator_super(c, d: int):
    c = _csr(c)
    cdc = dag(c) @ c
    return sprepost(c, dag(c), d) - 0.5 * (spre(cdc, d) + spost(cdc, d))


def hamiltonian_super(h, d: int):
    return -1j * (spre(h, d) - spost(h, d))


def cascade_super(a, s_plus, d: int):
    a = _csr(a)
    s_plus = _csr(s_plus)
    s_minus = dag(s_plus)
    a_dag = dag(a)
    # [a rho, s+] + [s-, rho a+] = a rho s+ - s+ a rho + s- rho a+ - rho a+ s-
    return (
        sprepost(a, s_plus, d)
        - spre(s_plus @ a, d)
        + sprepost(s_minus, a_dag, d)
        - spost(a_dag @ s_minus, d)
    )


def double_commutator_super(a, b, d: int):
    """Superoperator of ``rho -> [a, [b, rho]]``."""
    a = _csr(a)
    b = _csr(b)
    return spre(a @ b, d) - sprepost(a, b, d) - sprepost(b, a, d) + spost(b @ a, d)


def build_liouvillian(
    h,
    dissipators: Sequence[Dissipator] = (),
    cascades: Sequence[CascadePair] = (),
    layout: SpaceLayout | None = None,
) -> Liouvillian:
    d = h.shape[0]
    if layout is None:
        layout = SpaceLayout((d,))
    layout.check(h)
    for term in dissipators:
        layout.check(term.operator)
    for pair in cascades:
        layout.check(pair.source_op)
        layout.check(pair.sink_raise)

    mat = hamiltonian_super(h, d)
    for term in dissipators:
        if term.rate:
            mat = mat + term.rate * dissipator_super(term.operator, d)
    for pair in cascades:
        if pair.rate:
            mat = mat + pair.rate * cascade_super(pair.source_op, pair.sink_raise, d)
    return Liouvillian(mat.tocsr(), layout)


def trace_row(d: int) -> np.ndarray:
    return vec(np.eye(d))


def trace_defect(l: Liouvillian) -> float:
    """Largest ``|Tr L(E_mn)|`` over matrix units; zero for a valid generator."""
    return float(np.max(np.abs(l.matrix.T @ trace_row(l.dim)), initial=0.0))


def residual(l: Liouvillian, rho: np.ndarray) -> float:
    """Relative steady-state residual ``|L vec(rho)| / |L|_F``."""
    scale = spla.norm(l.matrix) or 1.0
    return float(np.linalg.norm(l.matrix @ vec(rho)) / scale)


def _clean_state(x: np.ndarray, d: int) -> np.ndarray:
    rho = unvec(x, d)
    rho = (rho + dag(rho)) / 2
    w, v = np.linalg.eigh(rho)
    if w.min() < -1e-9:
        logger.warning("steady state has eigenvalue %.3e; clamping", w.min())
    w = np.clip(w, 0.0, None)
    rho = (v * w) @ dag(v)
    return rho / np.trace(rho).real


def steady_state(l: Liouvillian) -> np.ndarray:
    """Unique steady state of ``l``.

    One row of ``L`` is replaced with the trace functional and the resulting
    system is solved directly (dense LU for small problems, sparse LU
    otherwise).  A degenerate null space raises
    :class:`DegenerateSteadyStateError`.
    """
    d = l.dim
    n = d * d
    rhs = np.zeros(n, dtype=complex)
    rhs[0] = 1.0
    if n <= DENSE_LIMIT:
        mat = l.dense()
        if n <= SVD_LIMIT:
            s = np.linalg.svd(mat, compute_uv=False)
            if len(s) > 1 and s[-2] <= DEGENERACY_GAP * s[0]:
                raise DegenerateSteadyStateError(
                    f"null space of dimension >= 2 (singular values {s[-1]:.2e}, {s[-2]:.2e})"
                )
        mat[0, :] = trace_row(d)
        lu, piv = la.lu_factor(mat, check_finite=False)
        pivots = np.abs(np.diag(lu))
        if pivots.min() <= 1e-14 * pivots.max():
            raise DegenerateSteadyStateError("trace-constrained Liouvillian is singular")
        x = la.lu_solve((lu, piv), rhs)
    else:
        mat = l.matrix.tolil(copy=True)
        mat[0, :] = trace_row(d)
        try:
            lu = spla.splu(mat.tocsc())
        except RuntimeError as exc:
            raise DegenerateSteadyStateError(str(exc)) from exc
        udiag = np.abs(lu.U.diagonal())
        if udiag.min() <= 1e-14 * udiag.max():
            raise DegenerateSteadyStateError("trace-constrained Liouvillian is singular")
        x = lu.solve(rhs)
    return _clean_state(x, d)


def _rk4_step(mat, v, h):
    k1 = mat @ v
    k2 = mat @ (v + 0.5 * h * k1)
    k3 = mat @ (v + 0.5 * h * k2)
    k4 = mat @ (v + h * k3)
    return v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def evolve(l: Liouvillian, rho0: np.ndarray, t: float, steps: int = 1000) -> np.ndarray:
    """Integrate ``d vec(rho)/dt = L vec(rho)`` with fixed-step RK4."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    d = l.dim
    v = vec(np.asarray(rho0, dtype=complex)).copy()
    if t == 0:
        return unvec(v, d).copy()
    h = t / steps
    tr0 = np.trace(unvec(v, d))
    norm0 = max(np.linalg.norm(v), 1.0)
    for _ in range(steps):
        v = _rk4_step(l.matrix, v, h)
    rho = unvec(v, d)
    drift = abs(np.trace(rho) - tr0)
    if not np.all(np.isfinite(v)) or drift > 1e-6 or np.linalg.norm(v) > norm0 * (1 + 1e-6):
        raise StepSizeError(
            f"RK4 unstable for t={t} with {steps} steps (trace drift {drift:.2e}); "
            "increase steps"
        )
    return rho


def spectral_radius(l: Liouvillian) -> float:
    if l.dim**2 <= SVD_LIMIT:
        return float(np.max(np.abs(np.linalg.eigvals(l.dense()))))
    return float(abs(spla.eigs(l.matrix, k=1, which="LM", return_eigenvectors=False)[0]))


def stable_steps(l: Liouvillian, t: float, safety: float = 0.05, minimum: int = 10) -> int:
    """Number of RK4 steps keeping ``h * spectral_radius`` below ``safety`` (accuracy, not just stability)."""
    return max(minimum, int(np.ceil(t * spectral_radius(l) / safety)))


def evolve_expm(l: Liouvillian, rho0: np.ndarray, t: float) -> np.ndarray:
    """Exact propagation by matrix exponential; intended for small ``d``."""
    if l.dim > 16:
        raise ValueError("evolve_expm is limited to Hilbert dimension <= 16")
    v = la.expm(l.dense() * t) @ vec(np.asarray(rho0, dtype=complex))
    return unvec(v, l.dim)
