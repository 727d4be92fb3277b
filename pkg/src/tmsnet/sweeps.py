"""Parameter sweeps reproducing the network's characteristic curves.

Each ``run_*`` function returns a :class:`SweepResult` whose rows follow the
grid order.  Grid points are independent; with ``jobs > 1`` they are solved
in worker processes and reassembled in grid order, so results do not depend
on ``jobs``.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as la
from scipy.optimize import OptimizeWarning, curve_fit

from .entanglement import PumpOptimum, concurrence, dv_eof, dv_purity, optimize_pump
from .errors import DegenerateSteadyStateError, TmsnetError
from .gaussian import TmsvModel, cv_eof, duan_simon, tmsv_covariance
from .lindblad import Liouvillian, evolve, evolve_expm, residual, stable_steps, steady_state
from .models import (
    FOUR_QUBIT_LAYOUT,
    LinkParams,
    NetworkParams,
    QubitParams,
    TmsMoments,
    bell_state,
    build_effective_me,
    build_four_qubit_me,
    cascaded_steady_state,
    gain_bandwidth,
    ideal_params,
    moments_for_params,
    squeezing_from_pump,
    to_mhz,
)
from .operators import kron, partial_trace, vec, unvec

RESIDUAL_TOL = 1e-8
VARIABLES = ("eps_p", "t_pulse", "detuning", "j_exchange", "gamma_phi", "gamma_ng", "asymmetry", "eta")
MODELS = ("effective", "cascaded")


@dataclass(frozen=True)
class SweepConfig:
    network: NetworkParams
    variable: str
    grid: tuple[float, ...]
    model: str = "effective"
    outputs: tuple[str, ...] = ()
    options: dict = field(default_factory=dict)
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        grid = tuple(float(g) for g in self.grid)
        if not grid:
            raise ValueError("grid must be non-empty")
        if any(b < a for a, b in zip(grid, grid[1:])):
            raise ValueError("grid must be sorted")
        if self.variable not in VARIABLES:
            raise ValueError(f"unknown sweep variable {self.variable!r}")
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.variable == "eps_p" and (grid[0] < 0 or grid[-1] >= 1):
            raise ValueError("pump strengths must lie in [0, 1)")
        object.__setattr__(self, "grid", grid)


@dataclass
class SweepResult:
    name: str
    columns: list[str]
    units: dict[str, str]
    rows: list[dict]
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([row.get(name, np.nan) for row in self.rows], dtype=float)

    @property
    def flagged(self) -> list[int]:
        return [k for k, row in enumerate(self.rows) if row.get("flag")]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {self.name}\n")
        buf.write("# rates entered as f = omega/2pi in MHz; computed internally as omega in rad/us\n")
        for key in sorted(self.metadata):
            buf.write(f"# {key} = {_fmt(self.metadata[key])}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"{c} [{self.units[c]}]" if self.units.get(c) else c for c in self.columns])
        for row in self.rows:
            writer.writerow([_fmt(row.get(c, "")) for c in self.columns])
        return buf.getvalue()


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value)) if math.isfinite(value) else "nan"
    return str(value)


def parallel_map(fn: Callable, items: Sequence, jobs: int = 1) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _guarded(fn, columns):
    """Run ``fn`` and turn solver failures into a flagged row."""
    try:
        return fn()
    except (TmsnetError, ValueError, np.linalg.LinAlgError) as exc:
        row = {c: float("nan") for c in columns}
        row["flag"] = f"error: {type(exc).__name__}: {exc}".replace(",", ";")
        return row


def _flag_residual(row: dict) -> dict:
    if not row.get("flag") and not row["residual"] < RESIDUAL_TOL:
        row["flag"] = "residual"
    row.setdefault("flag", "")
    return row


def qubit_observables(rho: np.ndarray) -> dict:
    c = concurrence(rho)
    return {
        "p_gg": rho[0, 0].real,
        "p_ge": rho[1, 1].real,
        "p_eg": rho[2, 2].real,
        "p_ee": rho[3, 3].real,
        "re_rho_gg_ee": rho[0, 3].real,
        "im_rho_gg_ee": rho[0, 3].imag,
        "concurrence": c,
        "purity": dv_purity(rho),
        "dv_eof": dv_eof(c),
    }


QUBIT_COLUMNS = ["p_gg", "p_ge", "p_eg", "p_ee", "re_rho_gg_ee", "im_rho_gg_ee", "concurrence", "purity", "dv_eof"]


def solve_qubits(params: NetworkParams, model: str = "effective", n_max: int | None = None):
    """Steady two-qubit state, residual, Fock cutoff used and a flag.

    A fixed ``n_max`` that fails the truncation check still yields a state;
    the row is flagged instead.
    """
    if model == "cascaded":
        sol = cascaded_steady_state(params, n_max=n_max, strict=n_max is None)
        flag = "" if sol.top_population <= 1e-6 else f"truncation: top Fock population {sol.top_population:.1e}"
        return sol.qubit_state, residual(sol.liouvillian, sol.rho), sol.n_max, flag
    liou = build_effective_me(params, moments_for_params(params))
    rho = steady_state(liou)
    return rho, residual(liou, rho), 0, ""


# -- pump sweep ---------------------------------------------------------------

PUMP_COLUMNS = ["eps_p", "r", "n1", "n2", "abs_m12", *QUBIT_COLUMNS, "duan_simon", "cv_eof", "residual", "n_max", "flag"]


def _pump_point(args):
    params, eps, model, n_max = args

    def body():
        p = params.with_pump(eps)
        rho, res, used, flag = solve_qubits(p, model, n_max)
        mom = moments_for_params(p)
        r = squeezing_from_pump(eps)
        row = {"eps_p": eps, "r": r, "n1": mom.n1, "n2": mom.n2, "abs_m12": abs(mom.m12)}
        row.update(qubit_observables(rho))
        row["duan_simon"] = duan_simon(mom.n1, mom.n2, abs(mom.m12))
        row["cv_eof"] = cv_eof(tmsv_covariance(TmsvModel(r, *p.etas)))
        row["residual"] = res
        row["n_max"] = used
        row["flag"] = flag
        return _flag_residual(row)

    row = _guarded(body, PUMP_COLUMNS)
    row["eps_p"] = eps
    return row


def run_pump_sweep(cfg: SweepConfig) -> SweepResult:
    if cfg.variable != "eps_p":
        raise ValueError("pump sweep requires variable 'eps_p'")
    n_max = cfg.options.get("n_max")
    rows = parallel_map(_pump_point, [(cfg.network, e, cfg.model, n_max) for e in cfg.grid], cfg.jobs)
    result = SweepResult("sweep-pump", PUMP_COLUMNS, {"eps_p": "1", "n1": "photons", "n2": "photons"}, rows)
    result.metadata.update(model=cfg.model, seed=cfg.seed)
    c = result.column("concurrence")
    if np.isfinite(c).any():
        k = int(np.nanargmax(c))
        result.metadata.update(c_max=c[k], eps_at_c_max=cfg.grid[k])
    return result


# -- transient ----------------------------------------------------------------


def ground_state(d: int = 4) -> np.ndarray:
    rho = np.zeros((d, d), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def stabilization_time(
    liou: Liouvillian, c_target: float, t_max: float, n_steps: int = 20_000, fraction: float = 0.9
) -> float:
    """First time at which the concurrence reaches ``fraction * c_target``.

    The transient from ``|gg>`` is propagated with the exact one-step
    propagator on a uniform grid and the crossing is interpolated linearly.
    """
    dt = t_max / n_steps
    prop = la.expm(liou.dense() * dt)
    v = vec(ground_state(liou.dim))
    level = fraction * c_target
    c_prev, t_prev = 0.0, 0.0
    for k in range(1, n_steps + 1):
        v = prop @ v
        c = concurrence(unvec(v, liou.dim))
        if c >= level:
            return t_prev + (level - c_prev) / (c - c_prev) * dt
        c_prev, t_prev = c, k * dt
    return float("nan")


TIME_COLUMNS = ["t_pulse", *QUBIT_COLUMNS, "trace_distance_to_steady", "steps", "flag"]


def _time_point(args):
    liou, rho_ss, t = args

    def body():
        steps = stable_steps(liou, t) if t > 0 else 1
        rho = evolve(liou, ground_state(), t, steps=steps)
        rho = (rho + rho.conj().T) / 2
        row = {"t_pulse": t, "steps": steps, "flag": ""}
        row.update(qubit_observables(rho))
        row["trace_distance_to_steady"] = 0.5 * np.abs(np.linalg.eigvalsh(rho - rho_ss)).sum()
        return row

    row = _guarded(body, TIME_COLUMNS)
    row["t_pulse"] = t
    return row


def run_time_sweep(cfg: SweepConfig) -> SweepResult:
    """Qubit state after a pump pulse of duration ``t_pulse`` starting from ``|gg>``."""
    if cfg.variable != "t_pulse":
        raise ValueError("time sweep requires variable 't_pulse'")
    if cfg.grid[0] < 0:
        raise ValueError("pulse durations must be >= 0")
    params = cfg.network.with_pump(cfg.options.get("eps_p", cfg.network.jpc.eps_p))
    liou = build_effective_me(params, moments_for_params(params))
    rho_ss = steady_state(liou)
    c_ss = concurrence(rho_ss)
    rows = parallel_map(_time_point, [(liou, rho_ss, t) for t in cfg.grid], cfg.jobs)
    gamma_r = math.sqrt(params.qubits[0].gamma_r * params.qubits[1].gamma_r)
    t90 = stabilization_time(liou, c_ss, t_max=cfg.options.get("t_max", 5.0))
    result = SweepResult("sweep-time", TIME_COLUMNS, {"t_pulse": "us"}, rows)
    result.metadata.update(
        model="effective",
        eps_p=params.jpc.eps_p,
        c_steady=c_ss,
        t_stabilize_us=t90,
        gamma_r_inverse_us=1 / gamma_r,
        t_stabilize_over_gamma_r_inverse=t90 * gamma_r,
    )
    return result


# -- detuning -----------------------------------------------------------------

DETUNING_COLUMNS = ["delta_mhz", *QUBIT_COLUMNS, "residual", "n_max", "flag"]


def detuned(params: NetworkParams, delta: float) -> NetworkParams:
    """Opposite detunings of the two qubits, keeping their summed frequency fixed."""
    q1, q2 = params.qubits
    return replace(params, qubits=(replace(q1, delta=delta), replace(q2, delta=-delta)))


def _detuning_point(args):
    params, delta, model, n_max = args

    def body():
        rho, res, used, flag = solve_qubits(detuned(params, delta), model, n_max)
        row = {"delta_mhz": to_mhz(delta), "residual": res, "n_max": used, "flag": flag}
        row.update(qubit_observables(rho))
        return _flag_residual(row)

    row = _guarded(body, DETUNING_COLUMNS)
    row["delta_mhz"] = to_mhz(delta)
    return row


def lorentzian(x, amplitude, center, fwhm):
    return amplitude / (1 + (2 * (x - center) / fwhm) ** 2)


def fit_lorentzian(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares Lorentzian ``(amplitude, center, fwhm)``."""
    ok = np.isfinite(y)
    x, y = x[ok], y[ok]
    k = int(np.argmax(y))
    above = x[y >= y[k] / 2]
    guess = (y[k], x[k], max(above.max() - above.min(), np.ptp(x) / 10))
    with warnings.catch_warnings():
        # parameter covariance is unused; with three points it is undefined
        warnings.simplefilter("ignore", OptimizeWarning)
        popt, _ = curve_fit(lorentzian, x, y, p0=guess, maxfev=20_000)
    return float(popt[0]), float(popt[1]), abs(float(popt[2]))


def run_detuning_sweep(cfg: SweepConfig) -> SweepResult:
    """Concurrence versus opposite qubit detunings ``delta_1 = -delta_2 = delta``.

    ``cfg.grid`` holds detunings in angular units.  The cascaded model is the
    intended one; the effective model has no spectral filtering.
    """
    if cfg.variable != "detuning":
        raise ValueError("detuning sweep requires variable 'detuning'")
    params = cfg.network.with_pump(cfg.options.get("eps_p", cfg.network.jpc.eps_p))
    n_max = cfg.options.get("n_max")
    rows = parallel_map(_detuning_point, [(params, d, cfg.model, n_max) for d in cfg.grid], cfg.jobs)
    result = SweepResult("sweep-detuning", DETUNING_COLUMNS, {"delta_mhz": "MHz"}, rows)
    x, y = result.column("delta_mhz"), result.column("concurrence")
    _, gain_bw = gain_bandwidth(params.jpc.kappa1, params.jpc.eps_p)
    result.metadata.update(model=cfg.model, eps_p=params.jpc.eps_p, gain_bandwidth_mhz=to_mhz(gain_bw))
    try:
        amp, center, fwhm = fit_lorentzian(x, y)
        result.metadata.update(fit_amplitude=amp, fit_center_mhz=center, fit_fwhm_mhz=fwhm)
    except (RuntimeError, ValueError) as exc:
        result.metadata["fit_error"] = str(exc)
    return result


# -- limiting factors -----------------------------------------------------------

LIMIT_COLUMNS = ["value", "eps_opt", "c_opt", "flag"]


def chiral_params(
    gamma_phi: float = 0.0,
    gamma_ng: float = 0.0,
    asymmetry: float = 1.0,
    eta: float = 1.0,
) -> NetworkParams:
    """Unidirectional network in units of ``gamma_R`` of qubit 1 with one imperfection set."""
    base = ideal_params(bidirectional=False, eta=eta)
    q1 = QubitParams(gamma_r=1.0, gamma_phi=gamma_phi, gamma_ng=gamma_ng)
    q2 = QubitParams(gamma_r=asymmetry, gamma_phi=gamma_phi, gamma_ng=gamma_ng)
    return replace(base, qubits=(q1, q2))


def _limit_point(args):
    variable, value, grid = args

    def body():
        params = chiral_params(**{variable: value})
        opt = optimize_pump(params, eps_grid=grid)
        return {"value": value, "eps_opt": opt.eps_opt, "c_opt": opt.c_opt, "flag": opt.flag}

    row = _guarded(body, LIMIT_COLUMNS)
    row["value"] = value
    return row


def run_limit_sweeps(cfg: SweepConfig) -> SweepResult:
    """Optimized concurrence of the chiral network versus one imperfection."""
    if cfg.variable not in ("gamma_phi", "gamma_ng", "asymmetry", "eta"):
        raise ValueError("limit sweep variable must be gamma_phi, gamma_ng, asymmetry or eta")
    grid = cfg.options.get("eps_grid")
    rows = parallel_map(_limit_point, [(cfg.variable, v, grid) for v in cfg.grid], cfg.jobs)
    units = {"value": "1 (ratio to gamma_R)" if cfg.variable != "eta" else "1"}
    result = SweepResult(f"sweep-limits-{cfg.variable}", LIMIT_COLUMNS, units, rows)
    result.metadata.update(variable=cfg.variable, model="effective, chiral")
    return result


# -- four qubits ----------------------------------------------------------------

FOUR_COLUMNS = ["j_exchange", "eps_opt", "c_outer", "c_inner", "overlap_target", "max_other_overlap", "residual", "flag"]
BELL = {
    "phi+": bell_state(+1),
    "phi-": bell_state(-1),
    "psi+": kron(np.array([1, 0]), np.array([0, 1])) / math.sqrt(2) + kron(np.array([0, 1]), np.array([1, 0])) / math.sqrt(2),
    "psi-": kron(np.array([1, 0]), np.array([0, 1])) / math.sqrt(2) - kron(np.array([0, 1]), np.array([1, 0])) / math.sqrt(2),
}


def four_qubit_state(params: NetworkParams, j: float, eps: float):
    p = params.with_pump(eps)
    liou = build_four_qubit_me(p, j, moments_for_params(p))
    try:
        rho = steady_state(liou)
        flag = ""
    except DegenerateSteadyStateError:
        # inner qubits without any coupling or loss keep their initial state
        rho = evolve_expm(liou, ground_state(16), 200.0 / min(q.gamma_r for q in p.qubits))
        rho = (rho + rho.conj().T) / 2
        flag = "degenerate: evolved from |0000>"
    return rho, residual(liou, rho), flag


def bell_product_overlaps(rho: np.ndarray) -> dict[tuple[str, str], float]:
    out = {}
    for (a, va), (b, vb) in itertools.product(BELL.items(), BELL.items()):
        v = kron(va, vb)
        out[(a, b)] = float(np.real(np.vdot(v, rho @ v)))
    return out


def _four_point(args):
    params, j, eps_grid = args

    def body():
        best = None
        for eps in eps_grid:
            rho, res, flag = four_qubit_state(params, j, eps)
            c_out = concurrence(partial_trace(rho, FOUR_QUBIT_LAYOUT, [0, 1]))
            c_in = concurrence(partial_trace(rho, FOUR_QUBIT_LAYOUT, [2, 3]))
            if best is None or min(c_out, c_in) > min(best[1], best[2]) + 1e-12:
                best = (eps, c_out, c_in, rho, res, flag)
        eps, c_out, c_in, rho, res, flag = best
        ov = bell_product_overlaps(rho)
        target = ov.pop(("phi+", "phi-"))
        row = {
            "j_exchange": j, "eps_opt": eps, "c_outer": c_out, "c_inner": c_in,
            "overlap_target": target, "max_other_overlap": max(ov.values()),
            "residual": res, "flag": flag,
        }
        return row if flag else _flag_residual(row)

    row = _guarded(body, FOUR_COLUMNS)
    row["j_exchange"] = j
    return row


def run_four_qubit(cfg: SweepConfig) -> SweepResult:
    """Pair concurrences of the four-qubit chain versus exchange coupling.

    At each coupling the pump is chosen on ``eps_grid`` to maximize the
    smaller of the two pair concurrences.
    """
    if cfg.variable != "j_exchange":
        raise ValueError("four-qubit sweep requires variable 'j_exchange'")
    eps_grid = tuple(cfg.options.get("eps_grid", np.linspace(0.05, 0.95, 19)))
    rows = parallel_map(_four_point, [(cfg.network, j, eps_grid) for j in cfg.grid], cfg.jobs)
    result = SweepResult("four-qubit", FOUR_COLUMNS, {"j_exchange": "gamma_R"}, rows)
    single = optimize_pump(cfg.network)
    result.metadata.update(two_qubit_c_opt=single.c_opt, two_qubit_eps_opt=single.eps_opt)
    return result


# -- entanglement transfer ------------------------------------------------------

TRANSFER_COLUMNS = ["eps_p", "cv_eof", "dv_eof", "ratio", "cv_ebit_rate_hz", "dv_ebit_rate_hz", "residual", "flag"]


def _transfer_point(args):
    params, eps = args

    def body():
        p = params.with_pump(eps)
        cv = cv_eof(tmsv_covariance(TmsvModel(squeezing_from_pump(eps), *p.etas)))
        rho, res, _, _ = solve_qubits(p)
        dv = dv_eof(concurrence(rho))
        _, bw = gain_bandwidth(p.jpc.kappa1, eps)
        bw_hz = to_mhz(bw) * 1e6
        row = {
            "eps_p": eps, "cv_eof": cv, "dv_eof": dv,
            "ratio": dv / cv if cv > 0 else float("nan"),
            "cv_ebit_rate_hz": cv * bw_hz, "dv_ebit_rate_hz": dv * bw_hz,
            "residual": res,
        }
        return _flag_residual(row)

    row = _guarded(body, TRANSFER_COLUMNS)
    row["eps_p"] = eps
    return row


def run_entanglement_transfer(cfg: SweepConfig) -> SweepResult:
    """Entanglement of formation of the field and of the qubits versus pump.

    The rate columns multiply by the gain bandwidth ``delta_omega / 2pi`` and
    are indicative only.
    """
    if cfg.variable != "eps_p":
        raise ValueError("transfer sweep requires variable 'eps_p'")
    rows = parallel_map(_transfer_point, [(cfg.network, e) for e in cfg.grid], cfg.jobs)
    units = {"cv_eof": "ebit", "dv_eof": "ebit", "cv_ebit_rate_hz": "ebit/s", "dv_ebit_rate_hz": "ebit/s"}
    result = SweepResult("transfer", TRANSFER_COLUMNS, units, rows)
    dv = result.column("dv_eof")
    if np.isfinite(dv).any():
        k = int(np.nanargmax(dv))
        result.metadata.update(dv_eof_peak=dv[k], eps_at_dv_peak=cfg.grid[k])
    result.metadata["rate_caveat"] = "rates use E_F * delta_omega/2pi; bandwidth convention is an assumption"
    return result


def link_with(params: NetworkParams, eta1: float, eta2: float) -> NetworkParams:
    return replace(params, link=LinkParams(eta1, eta2))


__all__ = [
    "SweepConfig",
    "SweepResult",
    "PumpOptimum",
    "TmsMoments",
    "run_pump_sweep",
    "run_time_sweep",
    "run_detuning_sweep",
    "run_limit_sweeps",
    "run_four_qubit",
    "run_entanglement_transfer",
    "stabilization_time",
    "chiral_params",
    "fit_lorentzian",
    "parallel_map",
]
