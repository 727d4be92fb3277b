"""Entanglement distribution from a two-mode squeezed reservoir to stationary qubits.

Angular frequencies are in rad/us and times in us throughout; :func:`mhz`
converts rates quoted as ``f = omega / 2pi`` in MHz.
"""

from .entanglement import analytic_bounds, concurrence, dv_eof, dv_purity, optimize_pump
from .gaussian import TmsvModel, cv_eof, cv_purity, duan_simon, tmsv_covariance
from .lindblad import build_liouvillian, evolve, steady_state
from .models import (
    JPCParams,
    LinkParams,
    NetworkParams,
    QubitParams,
    TmsMoments,
    build_effective_me,
    build_full_cascaded,
    mhz,
    table1_params,
    tms_moments_analytic,
)

__version__ = "0.1.0"

__all__ = [
    "analytic_bounds",
    "concurrence",
    "dv_eof",
    "dv_purity",
    "optimize_pump",
    "TmsvModel",
    "cv_eof",
    "cv_purity",
    "duan_simon",
    "tmsv_covariance",
    "build_liouvillian",
    "evolve",
    "steady_state",
    "JPCParams",
    "LinkParams",
    "NetworkParams",
    "QubitParams",
    "TmsMoments",
    "build_effective_me",
    "build_full_cascaded",
    "mhz",
    "table1_params",
    "tms_moments_analytic",
]
