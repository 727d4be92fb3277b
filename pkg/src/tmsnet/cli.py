"""Command-line front end: ``tmsnet <subcommand> [--config ...] [--out ...]``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import plotting
from .config import UNITS_NOTE, detection_from_config, load_config, network_from_config, parse_grid
from .detection import heterodyne_sample, heterodyne_variance, qubit_variance, variance_crossover
from .entanglement import concurrence, fidelity
from .gaussian import TmsvModel, tmsv_covariance
from .models import mhz, squeezing_from_pump
from .sweeps import (
    SweepConfig,
    SweepResult,
    chiral_params,
    run_detuning_sweep,
    run_entanglement_transfer,
    run_four_qubit,
    run_limit_sweeps,
    run_pump_sweep,
    run_time_sweep,
    solve_qubits,
)
from .tomography import apply_frame_rotation, frame_rotation_angle, mle_reconstruct_detailed, simulate_measurements
from .errors import UndefinedFrameError
from .validate import run_validate

log = logging.getLogger("tmsnet")


def _write(out: Path, name: str, text: str) -> Path:
    path = out / name
    path.write_text(text)
    log.info("wrote %s", path)
    return path


def _emit(args, result: SweepResult, stem: str, x: str, ys, xlabel=None, ylabel="", logx=False):
    _write(args.out, f"{stem}.csv", result.to_csv())
    if not args.no_plots:
        plotting.line_plot(result, x, ys, args.out / f"{stem}.svg", xlabel=xlabel, ylabel=ylabel, logx=logx)
    print(f"{stem}: {len(result.rows)} rows, {len(result.flagged)} flagged")
    for key in sorted(result.metadata):
        print(f"  {key} = {result.metadata[key]}")


def cmd_sweep_pump(args, cfg, params):
    grid = parse_grid(cfg["sweep-pump"]["grid"])
    res = run_pump_sweep(SweepConfig(params, "eps_p", grid, model=args.model or "effective", seed=args.seed, jobs=args.jobs))
    _emit(args, res, "sweep-pump", "eps_p", ["concurrence", "purity", "dv_eof"], "pump strength eps_p")


def cmd_sweep_time(args, cfg, params):
    sec = cfg["sweep-time"]
    grid = parse_grid(sec["grid"])
    res = run_time_sweep(
        SweepConfig(params, "t_pulse", grid, options={"eps_p": sec.getfloat("eps_p")}, seed=args.seed, jobs=args.jobs)
    )
    _emit(args, res, "sweep-time", "t_pulse", ["concurrence", "p_ee", "purity"], "pulse duration (us)", logx=True)


def cmd_sweep_detuning(args, cfg, params):
    sec = cfg["sweep-detuning"]
    grid = mhz(parse_grid(sec["grid"]))
    options = {"eps_p": sec.getfloat("eps_p"), "n_max": sec.getint("n_max")}
    res = run_detuning_sweep(
        SweepConfig(params, "detuning", grid, model=args.model or "cascaded", options=options, seed=args.seed, jobs=args.jobs)
    )
    _emit(args, res, "sweep-detuning", "delta_mhz", ["concurrence"], "detuning delta/2pi (MHz)")


def cmd_sweep_limits(args, cfg, params):
    sec = cfg["sweep-limits"]
    for variable in ("gamma_phi", "gamma_ng", "asymmetry", "eta"):
        grid = parse_grid(sec[variable])
        res = run_limit_sweeps(SweepConfig(params, variable, grid, seed=args.seed, jobs=args.jobs))
        _emit(args, res, f"sweep-limits-{variable}", "value", ["c_opt"], variable, "optimized concurrence")


def cmd_four_qubit(args, cfg, params):
    sec = cfg["four-qubit"]
    net = chiral_params(eta=sec.getfloat("eta"))
    res = run_four_qubit(SweepConfig(net, "j_exchange", parse_grid(sec["grid"]), seed=args.seed, jobs=args.jobs))
    _emit(args, res, "four-qubit", "j_exchange", ["c_outer", "c_inner", "overlap_target"], "J / gamma_R")


def cmd_transfer(args, cfg, params):
    grid = parse_grid(cfg["transfer"]["grid"])
    res = run_entanglement_transfer(SweepConfig(params, "eps_p", grid, seed=args.seed, jobs=args.jobs))
    _emit(args, res, "transfer", "eps_p", ["cv_eof", "dv_eof"], "pump strength eps_p", "E_F (ebit)")


def _matrix_csv(m: np.ndarray) -> str:
    rows = []
    for row in np.asarray(m):
        cells = []
        for v in row:
            cells.append(repr(float(v)) if np.isrealobj(m) else f"{v.real!r}{v.imag:+.17g}j")
        rows.append(",".join(cells))
    return "\n".join(rows) + "\n"


def cmd_tomo_demo(args, cfg, params):
    sec = cfg["tomography"]
    rho, _, _, _ = solve_qubits(params)
    exps = simulate_measurements(
        rho, shots=sec.getint("shots"), readout_error=sec.getfloat("readout_error"), seed=args.seed, calibrate=True
    )
    _write(args.out, "tomo-expectations.csv", exps.to_csv())
    try:
        phi = frame_rotation_angle(exps)
    except UndefinedFrameError as exc:
        log.warning("%s; skipping frame rotation", exc)
        phi = 0.0
    rotated = apply_frame_rotation(exps, phi)
    res = mle_reconstruct_detailed(rotated, seed=args.seed)
    _write(args.out, "tomo-rho-mle.csv", _matrix_csv(res.rho))
    summary = {
        "eps_p": params.jpc.eps_p,
        "seed": args.seed,
        "frame_rotation_rad": phi,
        "mle_cost": res.cost,
        "kkt_certificate": res.certificate,
        "concurrence_true": concurrence(rho),
        "concurrence_mle": concurrence(res.rho),
        "fidelity_to_true_unrotated": fidelity(rho, mle_reconstruct_detailed(exps, seed=args.seed).rho),
    }
    _write(args.out, "tomo-summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    for k, v in summary.items():
        print(f"  {k} = {v}")


def cmd_detect_compare(args, cfg, params):
    setup = detection_from_config(cfg, params)
    het1 = setup.heterodyne[0]
    n1 = np.geomspace(1e-3, 10.0, 41)
    het = np.array([heterodyne_variance(n, het1.n_add, 2) for n in n1])
    q1 = np.full_like(n1, qubit_variance(setup.qubits[0]))
    q2 = np.full_like(n1, qubit_variance(setup.qubits[1]))
    buf = [f"# detect-compare: per-shot variance of the photon-number estimators; {UNITS_NOTE}"]
    buf.append(f"# crossover_n1 = {variance_crossover(het1, setup.qubits[0])}")
    buf.append("n1 [photons],heterodyne_var,qubit1_var,qubit2_var,ratio_heterodyne_over_qubit1")
    for row in zip(n1, het, q1, q2, het / q1):
        buf.append(",".join(repr(float(v)) for v in row))
    _write(args.out, "detect-compare.csv", "\n".join(buf) + "\n")
    if not args.no_plots:
        plotting.overlay_plot(
            n1, {"heterodyne": het, "qubit 1": q1, "qubit 2": q2}, args.out / "detect-compare.svg",
            "N1 (photons)", "per-shot variance", "detect-compare", logx=True, logy=True,
        )
    model = TmsvModel(squeezing_from_pump(params.jpc.eps_p), *params.etas)
    est = heterodyne_sample(tmsv_covariance(model), *setup.heterodyne, samples=setup.samples, seed=args.seed)
    header = f"# heterodyne covariance estimate (I1,Q1,I2,Q2), samples={setup.samples}, seed={args.seed}\n"
    _write(args.out, "heterodyne-covariance.csv", header + _matrix_csv(est.v))
    print(f"  heterodyne/qubit-1 variance ratio at N1 -> 0: {het[0] / q1[0]:.1f}")


def cmd_validate(args, cfg, params):
    report = run_validate(echo=print)
    _write(args.out, "report.json", report.to_json())
    print("all criteria passed" if report.passed else "some criteria FAILED")
    return 0 if report.passed else 1


COMMANDS = {
    "sweep-pump": cmd_sweep_pump,
    "sweep-time": cmd_sweep_time,
    "sweep-detuning": cmd_sweep_detuning,
    "sweep-limits": cmd_sweep_limits,
    "four-qubit": cmd_four_qubit,
    "transfer": cmd_transfer,
    "tomo-demo": cmd_tomo_demo,
    "detect-compare": cmd_detect_compare,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tmsnet", description="Entanglement distribution with a two-mode squeezed reservoir.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=Path, help="INI file overriding the packaged defaults")
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: ./out)")
    parser.add_argument("--seed", type=int, default=0, help="seed for stochastic steps")
    parser.add_argument("--model", choices=("effective", "cascaded"), help="steady-state model")
    parser.add_argument("--no-plots", action="store_true", help="skip SVG figures")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for grid points")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.seed < 0 or args.seed >= 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 2
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
        params = network_from_config(cfg)
    except (FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    args.out.mkdir(parents=True, exist_ok=True)
    status = COMMANDS[args.command](args, cfg, params)
    return int(status or 0)


if __name__ == "__main__":
    sys.exit(main())
