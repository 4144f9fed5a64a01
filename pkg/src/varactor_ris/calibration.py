"""One-time fits that produce the shipped default configuration.

Two steps:

1. ``fit_varactor_law`` fits (Cj0, Vj, M) of the junction law to tabulated
   C-V points with the package capacitance held fixed.
2. ``calibrate_cell`` searches (fixed inductance, middle-patch capacitance,
   series resistance, sheet-impedance ratio) so the reflection envelope
   clears the phase-span and amplitude targets with margin while keeping
   the series resistance as large as possible.

Run ``python scripts/calibrate.py`` to reproduce the numbers stored in
``data/default_cell.json``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit, differential_evolution

from .circuit import UnitCellParams, VaractorModel, gamma_grid
from .constants import BAND, CENTER_FREQUENCY

# (reverse bias V, capacitance pF), read from the SMV1231-079LF C-V curve.
VARACTOR_CV_POINTS = (
    (0.0, 2.35),
    (1.0, 1.63),
    (2.0, 1.22),
    (4.0, 0.81),
    (8.0, 0.56),
    (15.0, 0.47),
)
PACKAGE_CAPACITANCE = 0.46e-12

SPAN_TARGET_DEG = 315.0
AMPLITUDE_TARGET = 0.72

# search box: fixed L (H), middle-patch C (F), Rs (ohm), sheet ratio
SEARCH_BOUNDS = ((0.05e-9, 2e-9), (0.1e-12, 0.5e-12), (0.1, 2.5), (1.0, 30.0))


def fit_varactor_law(points=VARACTOR_CV_POINTS, parasitic: float = PACKAGE_CAPACITANCE):
    """Least-squares (Cj0 [F], Vj [V], M) for the junction capacitance law."""
    v = np.array([p[0] for p in points], dtype=float)
    c_pf = np.array([p[1] for p in points], dtype=float)
    cp_pf = parasitic * 1e12

    def law(bias, cj0, vj, m):
        return cj0 / (1.0 + bias / vj) ** m + cp_pf

    (cj0, vj, m), _ = curve_fit(
        law, v, c_pf, p0=(2.0, 5.0, 2.0), bounds=((0.1, 0.1, 0.1), (10.0, 50.0, 20.0)), maxfev=20000
    )
    return float(cj0) * 1e-12, float(vj), float(m)


@dataclass
class EnvelopeReport:
    span_center_deg: float
    min_span_deg: float
    min_magnitude: float


def envelope(params: UnitCellParams, fstep: float = 10e6, vstep: float = 0.1) -> EnvelopeReport:
    """Phase span per frequency and the amplitude floor over the band."""
    freqs = np.arange(BAND[0], BAND[1] + fstep / 2, fstep)
    biases = np.linspace(0.0, 14.0, int(round(14.0 / vstep)) + 1)
    g = gamma_grid(freqs, biases, params)
    ph = np.degrees(np.unwrap(np.angle(g), axis=1))
    span = ph.max(axis=1) - ph.min(axis=1)
    ic = int(np.argmin(np.abs(freqs - CENTER_FREQUENCY)))
    return EnvelopeReport(float(span[ic]), float(span.min()), float(np.abs(g).min()))


def _with(params: UnitCellParams, x) -> UnitCellParams:
    L, cpatch, rs, ratio = (float(v) for v in x)
    varactor = dataclasses.replace(params.varactor, series_resistance=rs)
    return dataclasses.replace(
        params, fixed_inductance=L, fixed_capacitance=cpatch, sheet_impedance_ratio=ratio, varactor=varactor
    )


def _cost(x, base: UnitCellParams) -> float:
    rep = envelope(_with(base, x))
    penalty = max(0.0, SPAN_TARGET_DEG - rep.span_center_deg) + 200.0 * max(0.0, AMPLITUDE_TARGET - rep.min_magnitude)
    return -x[2] + 10.0 * penalty


def calibrate_cell(base: UnitCellParams | None = None, seed: int = 0, maxiter: int = 200) -> UnitCellParams:
    """Search the four free circuit values; deterministic for a given seed."""
    if base is None:
        cj0, vj, m = fit_varactor_law()
        base = UnitCellParams(
            varactor=VaractorModel(
                junction_capacitance_zero_bias=cj0,
                junction_potential=vj,
                grading_exponent=m,
                parasitic_capacitance=PACKAGE_CAPACITANCE,
            )
        )
    result = differential_evolution(
        _cost, SEARCH_BOUNDS, args=(base,), seed=seed, maxiter=maxiter, popsize=20, tol=1e-10, polish=False
    )
    return _with(base, result.x)
