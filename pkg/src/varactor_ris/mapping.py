"""Phase-to-bias inversion and DAC quantisation.

The look-up table samples the cell's reflection phase on a uniform bias
grid at one frequency. Inversion is piecewise linear in (bias, unwrapped
phase). Targets that fall in the unreachable arc left by a sub-360 degree
span are clamped to the closer end of the tuning range in circular
distance; an exact tie goes to the lower-bias end.

All rounding is half away from zero.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

import numpy as np

from .circuit import UnitCellParams, gamma_grid, wrap_phase
from .constants import BIAS_MAX, BIAS_MIN, DAC_FULL_SCALE_CODE, VOLTAGE_RESOLUTION
from .errors import CalibrationError, RangeError, ValidationError
from .synthesis import PhaseProfile

PLAN_HEADER = (
    "row",
    "col",
    "voltage_v",
    "dac_code",
    "required_phase_deg",
    "achieved_phase_deg",
    "phase_error_deg",
)
DAC_LSB = (BIAS_MAX - BIAS_MIN) / DAC_FULL_SCALE_CODE
_TIE_TOL = 1e-9


@dataclass(frozen=True)
class PhaseLut:
    frequency: float
    biases: np.ndarray = field(compare=False)
    phases: np.ndarray = field(compare=False)  # unwrapped, degrees
    magnitudes: np.ndarray = field(compare=False)

    def __post_init__(self):
        b = np.asarray(self.biases, dtype=float)
        p = np.asarray(self.phases, dtype=float)
        m = np.asarray(self.magnitudes, dtype=float)
        if not (b.shape == p.shape == m.shape) or b.ndim != 1 or b.size < 2:
            raise ValidationError("LUT needs >= 2 entries with matching bias/phase/magnitude arrays")
        if np.any(np.diff(b) <= 0):
            raise ValidationError("LUT biases must be strictly increasing")
        dp = np.diff(p)
        if not (np.all(dp > 0) or np.all(dp < 0)):
            raise CalibrationError(f"reflection phase is not monotone in bias at {self.frequency:.6g} Hz")
        for a in (b, p, m):
            a.setflags(write=False)
        object.__setattr__(self, "biases", b)
        object.__setattr__(self, "phases", p)
        object.__setattr__(self, "magnitudes", m)

    def __len__(self) -> int:
        return self.biases.size

    @property
    def span(self) -> float:
        return float(abs(self.phases[-1] - self.phases[0]))

    @property
    def increasing(self) -> bool:
        return bool(self.phases[-1] > self.phases[0])

    @property
    def max_gap(self) -> float:
        """Largest phase step between neighbouring entries, degrees."""
        return float(np.abs(np.diff(self.phases)).max())

    def phase_at(self, bias) -> np.ndarray | float:
        """Linearly interpolated unwrapped phase at ``bias``."""
        out = np.interp(bias, self.biases, self.phases)
        return float(out) if np.ndim(out) == 0 else out

    def max_slope(self) -> float:
        """Steepest |dphase/dbias| between entries, degrees per volt."""
        return float(np.max(np.abs(np.diff(self.phases) / np.diff(self.biases))))


def _bias_grid(step: float) -> np.ndarray:
    n = int(math.floor((BIAS_MAX - BIAS_MIN) / step + 1e-9))
    grid = BIAS_MIN + step * np.arange(n + 1)
    if BIAS_MAX - grid[-1] > 1e-9:
        grid = np.append(grid, BIAS_MAX)
    grid[-1] = min(grid[-1], BIAS_MAX)
    return np.round(grid, 12)


def build_lut(params: UnitCellParams, frequency: float, bias_step: float = 0.1) -> PhaseLut:
    """Sample the cell at ``frequency`` on 0, step, ..., 14 V.

    Raises:
        RangeError: ``bias_step`` not in (0, 14].
        CalibrationError: phase not strictly monotone in bias.
    """
    if not 0 < bias_step <= BIAS_MAX - BIAS_MIN:
        raise RangeError(f"bias_step {bias_step} V outside (0, {BIAS_MAX - BIAS_MIN}]")
    biases = _bias_grid(bias_step)
    g = gamma_grid([frequency], biases, params)[0]
    phases = np.degrees(np.unwrap(np.angle(g)))
    return PhaseLut(float(frequency), biases, phases, np.abs(g))


def _circular_distance(a: float, b: float) -> float:
    return abs(wrap_phase(a - b))


def phase_to_voltage(lut: PhaseLut, target: float) -> tuple[float, float]:
    """Bias whose LUT phase is circularly closest to ``target`` degrees.

    Returns ``(volts, achieved_deg)`` with ``achieved_deg`` wrapped to
    (-180, 180].
    """
    p_lo = float(min(lut.phases[0], lut.phases[-1]))
    span = lut.span
    offset = (float(target) - p_lo) % 360.0
    if offset <= span:
        unwrapped = p_lo + offset
        if lut.increasing:
            bias = float(np.interp(unwrapped, lut.phases, lut.biases))
        else:
            bias = float(np.interp(unwrapped, lut.phases[::-1], lut.biases[::-1]))
        return bias, wrap_phase(unwrapped)

    d_first = _circular_distance(target, lut.phases[0])
    d_last = _circular_distance(target, lut.phases[-1])
    if d_first <= d_last + _TIE_TOL:
        return float(lut.biases[0]), wrap_phase(lut.phases[0])
    return float(lut.biases[-1]), wrap_phase(lut.phases[-1])


def _round_half_up(value: Fraction) -> int:
    sign = -1 if value < 0 else 1
    return sign * math.floor(abs(value) + Fraction(1, 2))


def quantize_voltage(v: float) -> tuple[float, int]:
    """Round to the 0.01 V grid and compute the 16-bit DAC code.

    ``code = round(v_q / 14 * 65535)``, both roundings half away from zero.
    """
    if not BIAS_MIN <= v <= BIAS_MAX:
        raise RangeError(f"voltage {v} V outside [{BIAS_MIN}, {BIAS_MAX}] V")
    vq = Decimal(repr(float(v))).quantize(Decimal(str(VOLTAGE_RESOLUTION)), rounding=ROUND_HALF_UP)
    code = _round_half_up(Fraction(vq) * DAC_FULL_SCALE_CODE / Fraction(repr(BIAS_MAX)))
    return float(vq), int(code)


def decode_code(code: int) -> float:
    """Nominal DAC output voltage for ``code``."""
    if not 0 <= code <= DAC_FULL_SCALE_CODE:
        raise RangeError(f"DAC code {code} outside [0, {DAC_FULL_SCALE_CODE}]")
    return code / DAC_FULL_SCALE_CODE * (BIAS_MAX - BIAS_MIN) + BIAS_MIN


@dataclass(frozen=True)
class VoltagePlan:
    rows: int
    cols: int
    frequency: float
    voltages: np.ndarray = field(compare=False)
    dac_codes: np.ndarray = field(compare=False)
    required_phase: np.ndarray = field(compare=False)
    achieved_phase: np.ndarray = field(compare=False)
    phase_error: np.ndarray = field(compare=False)

    def __post_init__(self):
        for name in ("voltages", "dac_codes", "required_phase", "achieved_phase", "phase_error"):
            arr = np.array(getattr(self, name), dtype=np.int64 if name == "dac_codes" else float)
            if arr.shape != (self.rows, self.cols):
                raise ValidationError(f"{name} shape {arr.shape} does not match plan dims ({self.rows}, {self.cols})")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(PLAN_HEADER)
            for r in range(self.rows):
                for c in range(self.cols):
                    writer.writerow(
                        [
                            r,
                            c,
                            f"{self.voltages[r, c]:.2f}",
                            int(self.dac_codes[r, c]),
                            f"{self.required_phase[r, c]:.6f}",
                            f"{self.achieved_phase[r, c]:.6f}",
                            f"{self.phase_error[r, c]:.6f}",
                        ]
                    )


def plan_voltages(profile: PhaseProfile, lut: PhaseLut) -> VoltagePlan:
    """Invert and quantise every element of ``profile``.

    ``achieved_phase`` is the LUT phase at the quantised voltage and
    ``phase_error`` its circular difference from the required phase.
    """
    if not math.isclose(profile.frequency, lut.frequency, rel_tol=1e-12, abs_tol=1e-3):
        raise ValidationError(f"profile at {profile.frequency} Hz but LUT at {lut.frequency} Hz")
    rows, cols = profile.layout.shape
    volts = np.empty((rows, cols))
    codes = np.empty((rows, cols), dtype=np.int64)
    for r in range(rows):
        for c in range(cols):
            v, _ = phase_to_voltage(lut, profile.required_phase[r, c])
            volts[r, c], codes[r, c] = quantize_voltage(v)
    achieved = wrap_phase(lut.phase_at(volts))
    error = wrap_phase(achieved - profile.required_phase)
    return VoltagePlan(rows, cols, lut.frequency, volts, codes, profile.required_phase, achieved, error)
