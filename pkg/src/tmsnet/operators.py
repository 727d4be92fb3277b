"""Dense operator kernel for small tensor-product Hilbert spaces.

Conventions used everywhere in the package:

* qubit basis ``|g> = (1, 0)``, ``|e> = (0, 1)``; ``sigma_z |e> = +|e>`` and
  ``sigma_minus = |g><e|``;
* composite spaces are ordered (mode 1, mode 2, qubit 1, qubit 2), recorded
  by a :class:`SpaceLayout`;
* operators are plain ``numpy`` arrays (complex128).  :func:`kron` also
  accepts ``scipy.sparse`` operands and then returns a sparse CSR matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatchError

HERMITIAN_TOL = 1e-12

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.T.copy()
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
# sigma_y = -i (sigma_plus - sigma_minus) in the (g, e) ordering
SIGMA_Y = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SIGMA_Z = np.diag([-1.0, 1.0]).astype(complex)
IDENTITY_2 = np.eye(2, dtype=complex)

KET_G = np.array([1, 0], dtype=complex)
KET_E = np.array([0, 1], dtype=complex)

PAULI = {"I": IDENTITY_2, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}


@dataclass(frozen=True)
class SpaceLayout:
    """Ordered subsystem dimensions of a composite Hilbert space."""

    factor_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"invalid factor dimensions {self.factor_dims!r}")
        object.__setattr__(self, "factor_dims", dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.factor_dims))

    def __len__(self):
        return len(self.factor_dims)

    def embed(self, op, index: int):
        """Place a single-factor operator at position ``index``."""
        if op.shape != (self.factor_dims[index],) * 2:
            raise DimensionMismatchError(
                f"operator shape {op.shape} does not fit factor {index} "
                f"of dimension {self.factor_dims[index]}"
            )
        sparse = sp.issparse(op)
        factors = [
            op if k == index else identity(d, sparse=sparse)
            for k, d in enumerate(self.factor_dims)
        ]
        return kron(*factors)

    def check(self, op) -> None:
        if op.shape[0] != self.dim or op.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"operator of shape {op.shape} inconsistent with layout "
                f"{self.factor_dims} (dim {self.dim})"
            )


def identity(d: int, sparse: bool = False):
    if sparse:
        return sp.identity(d, dtype=complex, format="csr")
    return np.eye(d, dtype=complex)


def kron(*ops):
    """Kronecker product of one or more operators (left to right)."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    if any(sp.issparse(o) for o in ops):
        return reduce(lambda a, b: sp.kron(a, b, format="csr"), ops)
    return reduce(np.kron, ops)


def dag(a):
    return a.conj().T


def bosonic_annihilation(n_max: int) -> np.ndarray:
    """Lowering operator truncated to Fock states ``0..n_max``."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    return np.diag(np.sqrt(np.arange(1, n_max + 1)), 1).astype(complex)


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    diff = a - dag(a)
    if sp.issparse(diff):
        return diff.nnz == 0 or abs(diff).max() < tol
    return bool(np.max(np.abs(diff), initial=0.0) < tol)


def partial_trace(rho: np.ndarray, layout: SpaceLayout | Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Reduced density matrix on the factors listed in ``keep``.

    The kept factors appear in ascending index order in the result.
    """
    if not isinstance(layout, SpaceLayout):
        layout = SpaceLayout(tuple(layout))
    rho = np.asarray(rho)
    layout.check(rho)
    keep = sorted(set(int(k) for k in keep))
    n = len(layout)
    if any(k < 0 or k >= n for k in keep):
        raise DimensionMismatchError(f"keep indices {keep} out of range for {n} factors")
    dims = layout.factor_dims
    tensor = rho.reshape(dims + dims)
    row = list(range(n))
    col = [n + k if k in keep else k for k in range(n)]
    out = [k for k in keep] + [n + k for k in keep]
    reduced = np.einsum(tensor, row + col, out)
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return reduced.reshape(d, d)


def psd_sqrt(a: np.ndarray, rtol: float = 0.0) -> np.ndarray:
    """Square root of a Hermitian positive semidefinite matrix.

    Eigenvalues down to ``-1e-10`` are clamped to zero; anything more
    negative is rejected.  With ``rtol > 0`` eigenvalues below
    ``rtol * max_eigenvalue`` are also zeroed, which keeps rank-deficient
    inputs exactly rank-deficient.
    """
    a = np.asarray(a, dtype=complex)
    if not is_hermitian(a, tol=1e-10):
        raise ValueError("psd_sqrt requires a Hermitian matrix")
    w, v = np.linalg.eigh((a + dag(a)) / 2)
    if w.min(initial=0.0) < -1e-10:
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {w.min():.3e})")
    cut = rtol * max(w.max(initial=0.0), 0.0)
    w = np.where(w > cut, w, 0.0)
    return (v * np.sqrt(w)) @ dag(v)


def expect(op, rho) -> complex:
    """``Tr{op rho}``; for a Hermitian ``op`` the result is returned as float."""
    if op.shape != rho.shape:
        raise DimensionMismatchError(f"shapes {op.shape} and {rho.shape} differ")
    value = (op @ rho).trace() if not sp.issparse(op) else (op @ rho).diagonal().sum()
    if is_hermitian(op):
        return float(np.real(value))
    return complex(value)


def ket_to_dm(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int | None = None) -> np.ndarray:
    if d is None:
        d = int(round(np.sqrt(v.size)))
    return np.asarray(v).reshape(d, d, order="F")


def thermal_state(nbar: float, n_max: int) -> np.ndarray:
    n = np.arange(n_max + 1)
    p = (nbar / (1 + nbar)) ** n / (1 + nbar)
    return np.diag(p / p.sum()).astype(complex)
