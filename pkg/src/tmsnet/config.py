"""INI configuration: network parameters, calibrations and sweep grids."""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .detection import DetectorCal, QubitDetectorCal, snr_from_readout_fidelity
from .gaussian import db_to_linear
from .models import JPCParams, LinkParams, NetworkParams, QubitParams, mhz

DEFAULT_CONFIG = "table1.ini"
UNITS_NOTE = "rates entered as f = omega/2pi in MHz; converted internally to omega in rad/us"


def default_config_text() -> str:
    return resources.files("tmsnet").joinpath("data", DEFAULT_CONFIG).read_text()


def load_config(path: str | Path | None = None) -> configparser.ConfigParser:
    """Read ``path`` on top of the packaged defaults."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.read_string(default_config_text())
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"config file {path} not found")
        parser.read(path)
    return parser


def parse_grid(text: str) -> np.ndarray:
    """``"start, stop, num"`` (linear) or ``"log: start, stop, num"``."""
    text = text.strip()
    spacing = np.linspace
    if text.startswith("log:"):
        spacing = np.geomspace
        text = text[4:]
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"grid must be 'start, stop, num', got {text!r}")
    grid = spacing(float(parts[0]), float(parts[1]), int(parts[2]))
    if grid.size == 0:
        raise ValueError("grid is empty")
    return grid


def _qubit(section) -> QubitParams:
    gamma_w = mhz(section.getfloat("gamma_w_mhz"))
    anh = section.get("anharmonicity_mhz", fallback=None)
    return QubitParams(
        gamma_r=gamma_w / 2,
        gamma_l=gamma_w / 2,
        gamma_phi=mhz(section.getfloat("gamma_phi_mhz", fallback=0.0)),
        gamma_ng=mhz(section.getfloat("gamma_ng_mhz", fallback=0.0)),
        delta=mhz(section.getfloat("delta_mhz", fallback=0.0)),
        anharmonicity=None if anh is None else mhz(float(anh)),
    )


def network_from_config(cfg: configparser.ConfigParser) -> NetworkParams:
    j = cfg["jpc"]
    jpc = JPCParams(
        kappa1=mhz(j.getfloat("kappa1_mhz")),
        kappa2=mhz(j.getfloat("kappa2_mhz")),
        eps_p=j.getfloat("eps_p", fallback=0.0),
        phi_p=j.getfloat("phi_p", fallback=0.0),
        omega1=mhz(j.getfloat("omega1_mhz")) if "omega1_mhz" in j else None,
        omega2=mhz(j.getfloat("omega2_mhz")) if "omega2_mhz" in j else None,
    )
    link = LinkParams(cfg["link"].getfloat("eta1"), cfg["link"].getfloat("eta2"))
    return NetworkParams(jpc=jpc, qubits=(_qubit(cfg["qubit1"]), _qubit(cfg["qubit2"])), link=link)


@dataclass(frozen=True)
class DetectionSetup:
    heterodyne: tuple[DetectorCal, DetectorCal]
    qubits: tuple[QubitDetectorCal, QubitDetectorCal]
    samples: int


def detection_from_config(cfg: configparser.ConfigParser, params: NetworkParams) -> DetectionSetup:
    d = cfg["detection"]
    het = tuple(
        DetectorCal(db_to_linear(d.getfloat(f"gain{i}_db")), d.getfloat(f"n_add{i}")) for i in (1, 2)
    )
    qubits = tuple(
        QubitDetectorCal(
            xi=q.gamma_r / q.gamma_1,
            readout_snr=snr_from_readout_fidelity(d.getfloat(f"readout_fidelity{i + 1}")),
        )
        for i, q in enumerate(params.qubits)
    )
    return DetectionSetup(het, qubits, d.getint("samples"))
