"""Equivalent-circuit model of the varactor-loaded unit cell.

The cell is a single shunt branch (diode series resistance, package plus
fixed inductance, varactor plus fixed patch capacitance) in parallel with
the input impedance of the grounded substrate stack. The branch impedance
is multiplied by ``sheet_impedance_ratio`` to express the lumped diode
impedance as a sheet impedance of the periodic surface. The reflection
coefficient at normal incidence is

    gamma = (Zs - eta0) / (Zs + eta0)

with an exp(+j*omega*t) time convention throughout.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .constants import BIAS_MAX, BIAS_MIN, CENTER_FREQUENCY, ETA0, SPEED_OF_LIGHT, wavelength
from .errors import DomainError, FrequencyLookupError, RangeError, ValidationError

SWEEP_HEADER = ("frequency_hz", "bias_v", "gamma_re", "gamma_im", "magnitude", "phase_deg")


@dataclass(frozen=True)
class VaractorModel:
    """Junction-capacitance law ``C(V) = Cj0 / (1 + V/Vj)**M + Cp``.

    Defaults are a least-squares fit to tabulated C-V points of the
    SMV1231-079LF (see ``calibration.VARACTOR_CV_POINTS``).
    """

    junction_capacitance_zero_bias: float = 1.8891e-12
    grading_exponent: float = 5.1636
    junction_potential: float = 10.3416
    parasitic_capacitance: float = 0.46e-12
    series_resistance: float = 0.49
    series_inductance: float = 0.45e-9
    bias_range: tuple[float, float] = (BIAS_MIN, BIAS_MAX)

    def __post_init__(self):
        if not self.junction_capacitance_zero_bias > 0:
            raise DomainError("junction_capacitance_zero_bias must be > 0")
        if not self.junction_potential > 0:
            raise DomainError("junction_potential must be > 0")
        if not self.grading_exponent > 0:
            raise DomainError("grading_exponent must be > 0")
        if self.series_resistance < 0:
            raise DomainError("series_resistance must be >= 0")
        if self.series_inductance < 0 or self.parasitic_capacitance < 0:
            raise DomainError("parasitic elements must be >= 0")
        lo, hi = self.bias_range
        if not lo < hi:
            raise DomainError(f"bias_range must satisfy min < max, got {self.bias_range}")
        object.__setattr__(self, "bias_range", (float(lo), float(hi)))


@dataclass(frozen=True)
class UnitCellParams:
    """Geometry, substrate and lumped-element description of one cell (SI units)."""

    cell_pitch: float = 13.5e-3
    substrate_permittivity: float = 3.55
    substrate_loss_tangent: float = 0.0027
    layer1_height: float = 1.524e-3
    layer2_height: float = 0.813e-3
    patch_lengths: tuple[float, float, float] = (4.2e-3, 10e-3, 8.5e-3)
    gap: float = 0.2e-3
    via_radius: float = 0.4e-3
    total_thickness: float = 3.9e-3
    fixed_inductance: float = 0.05e-9
    fixed_capacitance: float = 0.10e-12
    sheet_impedance_ratio: float = 11.27
    middle_patch_enabled: bool = True
    varactor: VaractorModel = field(default_factory=VaractorModel)

    def __post_init__(self):
        object.__setattr__(self, "patch_lengths", tuple(float(x) for x in self.patch_lengths))
        lengths = {
            "cell_pitch": self.cell_pitch,
            "layer1_height": self.layer1_height,
            "layer2_height": self.layer2_height,
            "gap": self.gap,
            "via_radius": self.via_radius,
            "total_thickness": self.total_thickness,
        }
        for i, value in enumerate(self.patch_lengths):
            lengths[f"patch_lengths[{i}]"] = value
        for name, value in lengths.items():
            if not value > 0:
                raise DomainError(f"{name} must be > 0, got {value}")
        if self.total_thickness < self.layer1_height + self.layer2_height:
            raise DomainError("total_thickness is smaller than the sum of the RF layer heights")
        if not self.substrate_permittivity >= 1:
            raise DomainError("substrate_permittivity must be >= 1")
        if self.substrate_loss_tangent < 0:
            raise DomainError("substrate_loss_tangent must be >= 0")
        if not self.fixed_inductance > 0:
            raise DomainError("fixed_inductance must be > 0")
        if self.fixed_capacitance < 0:
            raise DomainError("fixed_capacitance must be >= 0")
        if not self.sheet_impedance_ratio > 0:
            raise DomainError("sheet_impedance_ratio must be > 0")

    @property
    def slab_height(self) -> float:
        """Height of the RF substrate stack above the ground plane."""
        return self.layer1_height + self.layer2_height

    @property
    def branch_inductance(self) -> float:
        return self.varactor.series_inductance + self.fixed_inductance

    def is_low_profile(self, frequency: float = CENTER_FREQUENCY) -> bool:
        return self.total_thickness < wavelength(frequency) / 10.0


@dataclass(frozen=True)
class ReflectionSample:
    frequency: float
    bias: float
    gamma: complex
    magnitude: float
    phase: float  # degrees, (-180, 180]

    @classmethod
    def from_gamma(cls, frequency: float, bias: float, gamma: complex) -> ReflectionSample:
        gamma = complex(gamma)
        return cls(float(frequency), float(bias), gamma, abs(gamma), wrap_phase(math.degrees(np.angle(gamma))))


def wrap_phase(deg):
    """Wrap degrees into (-180, 180]. Works on scalars and arrays."""
    wrapped = -((-np.asarray(deg, dtype=float) + 180.0) % 360.0) + 180.0
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def _check_bias(bias, model: VaractorModel):
    lo, hi = model.bias_range
    b = np.asarray(bias, dtype=float)
    if b.size and (np.any(b < lo) or np.any(b > hi) or np.any(~np.isfinite(b))):
        bad = b[(b < lo) | (b > hi) | ~np.isfinite(b)].flat[0]
        raise RangeError(f"bias {bad} V outside [{lo}, {hi}] V")


def _capacitance(bias, model: VaractorModel):
    return (
        model.junction_capacitance_zero_bias / (1.0 + bias / model.junction_potential) ** model.grading_exponent
        + model.parasitic_capacitance
    )


def varactor_capacitance(bias: float, model: VaractorModel) -> float:
    """Return the diode capacitance in farads at reverse bias ``bias`` volts.

    Raises:
        RangeError: bias outside ``model.bias_range``.
    """
    _check_bias(bias, model)
    return float(_capacitance(float(bias), model))


def resonant_frequency(inductance: float, capacitance: float) -> float:
    """LC resonance 1 / (2*pi*sqrt(L*C)) in hertz."""
    if not (inductance > 0 and capacitance > 0):
        raise DomainError(f"inductance and capacitance must be > 0, got L={inductance}, C={capacitance}")
    return 1.0 / (2.0 * math.pi * math.sqrt(inductance * capacitance))


def total_capacitance(bias, params: UnitCellParams):
    """Branch capacitance: varactor plus middle-patch capacitance when enabled."""
    c = _capacitance(np.asarray(bias, dtype=float), params.varactor)
    if params.middle_patch_enabled:
        c = c + params.fixed_capacitance
    return c


def branch_impedance(frequency, bias, params: UnitCellParams):
    """Sheet impedance of the tuning branch (vectorised, no range checks)."""
    w = 2.0 * np.pi * np.asarray(frequency, dtype=float)
    c = total_capacitance(bias, params)
    z = params.varactor.series_resistance + 1j * w * params.branch_inductance + 1.0 / (1j * w * c)
    return params.sheet_impedance_ratio * z


def slab_impedance(frequency, params: UnitCellParams):
    """Input impedance of the grounded, lossy substrate stack at normal incidence."""
    eps = params.substrate_permittivity * (1.0 - 1j * params.substrate_loss_tangent)
    n = np.sqrt(eps)
    beta = 2.0 * np.pi * np.asarray(frequency, dtype=float) / SPEED_OF_LIGHT * n
    return 1j * ETA0 / n * np.tan(beta * params.slab_height)


def _surface_impedance(frequency, bias, params: UnitCellParams):
    zb = branch_impedance(frequency, bias, params)
    zd = slab_impedance(frequency, params)
    return zb * zd / (zb + zd)


def _gamma(frequency, bias, params: UnitCellParams):
    zs = _surface_impedance(frequency, bias, params)
    return (zs - ETA0) / (zs + ETA0)


def _check_frequency(frequency):
    f = np.asarray(frequency, dtype=float)
    if f.size and not np.all(f > 0):
        raise DomainError("frequency must be > 0")


def surface_impedance(frequency: float, bias: float, params: UnitCellParams) -> complex:
    """Surface impedance in ohms of the loaded cell."""
    _check_frequency(frequency)
    _check_bias(bias, params.varactor)
    return complex(_surface_impedance(frequency, bias, params))


def reflection_coefficient(frequency: float, bias: float, params: UnitCellParams) -> ReflectionSample:
    _check_frequency(frequency)
    _check_bias(bias, params.varactor)
    return ReflectionSample.from_gamma(frequency, bias, _gamma(frequency, bias, params))


def gamma_grid(frequencies, biases, params: UnitCellParams) -> np.ndarray:
    """Complex reflection over the outer product frequencies x biases."""
    f = np.asarray(frequencies, dtype=float)
    b = np.asarray(biases, dtype=float)
    _check_frequency(f)
    _check_bias(b, params.varactor)
    return _gamma(f[:, None], b[None, :], params)


class ReflectionTable:
    """Dense frequency x bias grid of reflection samples.

    Row ``i`` holds frequency ``frequencies[i]`` and column ``j`` bias
    ``biases[j]``; iteration yields samples frequency-major.
    """

    def __init__(self, frequencies: Sequence[float], biases: Sequence[float], gamma: np.ndarray):
        self.frequencies = tuple(float(f) for f in frequencies)
        self.biases = tuple(float(b) for b in biases)
        gamma = np.array(gamma, dtype=complex)
        if gamma.shape != (len(self.frequencies), len(self.biases)):
            raise ValidationError("gamma grid shape does not match the axes")
        gamma.setflags(write=False)
        self.gamma = gamma

    @property
    def shape(self) -> tuple[int, int]:
        return self.gamma.shape

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.gamma)

    @property
    def phase_deg(self) -> np.ndarray:
        return wrap_phase(np.degrees(np.angle(self.gamma)))

    def unwrapped_phase_deg(self) -> np.ndarray:
        """Phase unwrapped along the bias axis, anchored at the first bias."""
        return np.degrees(np.unwrap(np.angle(self.gamma), axis=1))

    def sample(self, i: int, j: int) -> ReflectionSample:
        return ReflectionSample.from_gamma(self.frequencies[i], self.biases[j], self.gamma[i, j])

    def __len__(self) -> int:
        return self.gamma.size

    def __iter__(self) -> Iterator[ReflectionSample]:
        for i in range(len(self.frequencies)):
            for j in range(len(self.biases)):
                yield self.sample(i, j)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ReflectionTable):
            return NotImplemented
        return (
            self.frequencies == other.frequencies
            and self.biases == other.biases
            and np.array_equal(self.gamma, other.gamma)
        )

    def frequency_index(self, frequency: float) -> int:
        freqs = np.asarray(self.frequencies)
        hits = np.flatnonzero(np.isclose(freqs, frequency, rtol=1e-12, atol=1e-6))
        if hits.size == 0:
            raise FrequencyLookupError(f"frequency {frequency} Hz not present in table")
        return int(hits[0])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SWEEP_HEADER)
            for s in self:
                writer.writerow(
                    [
                        repr(s.frequency),
                        repr(s.bias),
                        repr(s.gamma.real),
                        repr(s.gamma.imag),
                        repr(s.magnitude),
                        repr(s.phase),
                    ]
                )


def _strictly_increasing(values: Sequence[float], name: str) -> None:
    if len(values) == 0:
        raise ValidationError(f"{name} must be non-empty")
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional")
    if np.any(np.diff(arr) <= 0):
        raise ValidationError(f"{name} must be strictly increasing")


def sweep_response(frequencies: Sequence[float], biases: Sequence[float], params: UnitCellParams) -> ReflectionTable:
    """Evaluate the cell over a complete frequency x bias grid."""
    _strictly_increasing(frequencies, "frequencies")
    _strictly_increasing(biases, "biases")
    return ReflectionTable(frequencies, biases, gamma_grid(frequencies, biases, params))


def phase_span(table: ReflectionTable, frequency: float) -> float:
    """Unwrapped max-minus-min reflection phase across all biases, degrees."""
    i = table.frequency_index(frequency)
    row = np.degrees(np.unwrap(np.angle(table.gamma[i])))
    return float(row.max() - row.min())


def phase_slope(frequency: float, bias: float, params: UnitCellParams, rel_step: float = 1e-7) -> float:
    """Central-difference d(phase)/d(frequency) in degrees per hertz."""
    _check_frequency(frequency)
    _check_bias(bias, params.varactor)
    h = frequency * rel_step
    ratio = _gamma(frequency + h, bias, params) / _gamma(frequency - h, bias, params)
    return float(np.degrees(np.angle(ratio)) / (2.0 * h))


def resonance_slope(params: UnitCellParams, bias: float) -> tuple[float, float]:
    """Branch LC resonance frequency and |dphase/df| there (deg/Hz)."""
    c = varactor_capacitance(bias, params.varactor)
    if params.middle_patch_enabled:
        c += params.fixed_capacitance
    f_res = resonant_frequency(params.branch_inductance, c)
    return f_res, abs(phase_slope(f_res, bias, params))
