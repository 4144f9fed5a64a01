"""Scattered field of the biased array and beam metrics.

The field towards (theta, phi) is the superposition

    E = sum_mn  A_mn * G_mn * cos(theta)**q * exp(+j k0 (x u + y v))

with ``A_mn`` the feed illumination (amplitude and phase) at the element,
``G_mn`` the element reflection coefficient, and u, v the direction
cosines. In finite-radius mode the plane-wave kernel is replaced by the
exact spherical phase and 1/distance spread to the observation point.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import UnitCellParams, gamma_grid
from .constants import wavenumber
from .errors import BoundaryError, UndefinedSLLError, UnsupportedOperationError, ValidationError
from .mapping import VoltagePlan
from .synthesis import ArrayLayout, FeedSpec, PhaseProfile, _incident_radians

PATTERN_HEADER = ("theta_deg", "field_re", "field_im", "magnitude_db")
HALF_POWER_DB = 10.0 * math.log10(0.5)
DB_FLOOR = -300.0


@dataclass(frozen=True)
class ObservationGrid:
    theta_deg: np.ndarray = field(default_factory=lambda: np.arange(-90.0, 91.0, 1.0), compare=False)
    phi_cut_deg: float = 0.0
    radius: float | None = None  # None selects far field

    def __post_init__(self):
        t = np.array(self.theta_deg, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValidationError("theta samples must be a non-empty 1-D sequence")
        if np.any(np.diff(t) <= 0) or t[0] < -90.0 or t[-1] > 90.0:
            raise ValidationError("theta samples must be strictly increasing within [-90, 90]")
        if self.radius is not None and not self.radius > 0:
            raise ValidationError("finite radius must be > 0")
        t.setflags(write=False)
        object.__setattr__(self, "theta_deg", t)

    @property
    def far_field(self) -> bool:
        return self.radius is None


@dataclass(frozen=True)
class RadiationPattern:
    grid: ObservationGrid
    field: np.ndarray = field(compare=False)
    frequency: float = 0.0

    def __post_init__(self):
        f = np.array(self.field, dtype=complex)
        if f.shape != self.grid.theta_deg.shape:
            raise ValidationError("field samples do not match the observation grid")
        f.setflags(write=False)
        object.__setattr__(self, "field", f)

    @property
    def theta_deg(self) -> np.ndarray:
        return self.grid.theta_deg

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.field)

    @property
    def magnitude_db(self) -> np.ndarray:
        mag = self.magnitude
        peak = mag.max()
        if peak == 0:
            return np.full(mag.shape, DB_FLOOR)
        with np.errstate(divide="ignore"):
            db = 20.0 * np.log10(mag / peak)
        return np.maximum(db, DB_FLOOR)

    def write_csv(self, path) -> None:
        db = self.magnitude_db
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(PATTERN_HEADER)
            for t, e, d in zip(self.theta_deg, self.field, db):
                writer.writerow([f"{t:g}", repr(float(e.real)), repr(float(e.imag)), f"{d:.6f}"])


@dataclass(frozen=True)
class SpherePattern:
    """Field sampled on a full (theta in [0, 180], phi in [0, 360]) grid."""

    theta_deg: np.ndarray = field(compare=False)
    phi_deg: np.ndarray = field(compare=False)
    field: np.ndarray = field(compare=False)  # shape (n_theta, n_phi)
    frequency: float = 0.0


@dataclass(frozen=True)
class BeamMetrics:
    main_lobe_deg: float
    sll_db: float
    directivity_dbi: float | None
    hpbw_deg: float

    def to_text(self) -> str:
        d = "nan" if self.directivity_dbi is None else f"{self.directivity_dbi:.4f}"
        return (
            f"main_lobe_deg: {self.main_lobe_deg:.4f}\n"
            f"sll_db: {self.sll_db:.4f}\n"
            f"directivity_dbi: {d}\n"
            f"hpbw_deg: {self.hpbw_deg:.4f}\n"
        )


def element_weights(source, layout: ArrayLayout, feed: FeedSpec, params: UnitCellParams | None) -> np.ndarray:
    """Complex excitation A_mn * G_mn of each element, shape (rows, cols)."""
    if isinstance(source, VoltagePlan):
        if source.shape != layout.shape:
            raise ValidationError(f"plan dims {source.shape} do not match layout {layout.shape}")
        if params is None:
            raise ValidationError("a VoltagePlan needs unit-cell params to evaluate reflection")
        volts = source.voltages
        uniq, inverse = np.unique(volts, return_inverse=True)
        g = gamma_grid([source.frequency], uniq, params)[0][inverse].reshape(volts.shape)
        frequency = source.frequency
    elif isinstance(source, PhaseProfile):
        if source.layout.shape != layout.shape:
            raise ValidationError(f"profile dims {source.layout.shape} do not match layout {layout.shape}")
        g = np.exp(1j * np.radians(source.required_phase))
        frequency = source.frequency
    else:
        raise ValidationError(f"unsupported pattern source {type(source).__name__}")

    x, y = layout.coordinates()
    illum = np.exp(1j * _incident_radians(x, y, feed, frequency))
    if feed.wave_model == "spherical" and feed.amplitude_taper:
        fx, fy, fz = feed.position
        illum = illum / np.sqrt((fx - x) ** 2 + (fy - y) ** 2 + fz**2)
    return illum * g


def _element_factor(theta_rad: np.ndarray, q: float) -> np.ndarray:
    c = np.clip(np.cos(theta_rad), 0.0, None)
    return np.ones_like(c) if q == 0 else c**q


def array_field(weights, layout: ArrayLayout, frequency: float, theta_rad, phi_rad, q: float = 1.0, radius=None):
    """Superposed field at directions (theta_rad, phi_rad) of matching shape."""
    theta_rad, phi_rad = np.broadcast_arrays(np.asarray(theta_rad, float), np.asarray(phi_rad, float))
    k0 = wavenumber(frequency)
    x, y = layout.coordinates()
    w = np.asarray(weights).ravel()
    xs, ys = x.ravel(), y.ravel()
    st = np.sin(theta_rad)[..., None]
    ux = st * np.cos(phi_rad)[..., None]
    uy = st * np.sin(phi_rad)[..., None]
    if radius is None:
        kernel = np.exp(1j * k0 * (ux * xs + uy * ys))
    else:
        uz = np.cos(theta_rad)[..., None]
        d = np.sqrt((radius * ux - xs) ** 2 + (radius * uy - ys) ** 2 + (radius * uz) ** 2)
        kernel = (radius / d) * np.exp(-1j * k0 * (d - radius))
    return (kernel @ w) * _element_factor(theta_rad, q)


def compute_pattern(
    source,
    layout: ArrayLayout,
    feed: FeedSpec,
    params: UnitCellParams | None = None,
    grid: ObservationGrid | None = None,
    q: float = 1.0,
) -> RadiationPattern:
    """Principal-plane cut of the scattered field.

    ``source`` is a :class:`VoltagePlan` (reflection from the circuit model
    at the planned voltages) or a :class:`PhaseProfile` (ideal unit-magnitude
    reflection at the required phases).
    """
    grid = grid or ObservationGrid()
    w = element_weights(source, layout, feed, params)
    theta = np.radians(grid.theta_deg)
    phi = np.full_like(theta, math.radians(grid.phi_cut_deg))
    field_ = array_field(w, layout, source.frequency, theta, phi, q=q, radius=grid.radius)
    return RadiationPattern(grid, field_, source.frequency)


def compute_sphere_pattern(
    source,
    layout: ArrayLayout,
    feed: FeedSpec,
    params: UnitCellParams | None = None,
    theta_step_deg: float = 1.0,
    phi_step_deg: float = 2.0,
    q: float = 1.0,
) -> SpherePattern:
    """Far-field samples over the whole sphere; zero behind the ground plane."""
    w = element_weights(source, layout, feed, params)
    theta = np.linspace(0.0, 180.0, int(round(180.0 / theta_step_deg)) + 1)
    phi = np.linspace(0.0, 360.0, int(round(360.0 / phi_step_deg)) + 1)
    tt, pp = np.meshgrid(np.radians(theta), np.radians(phi), indexing="ij")
    field_ = array_field(w, layout, source.frequency, tt, pp, q=q)
    field_ = np.where(tt <= math.pi / 2 + 1e-12, field_, 0.0)
    return SpherePattern(theta, phi, field_, source.frequency)


def main_lobe(pattern: RadiationPattern) -> float:
    """Angle of the global maximum; ties go to the smaller |theta|."""
    mag = pattern.magnitude
    peak = mag.max()
    candidates = np.flatnonzero(mag >= peak * (1.0 - 1e-12))
    theta = pattern.theta_deg
    best = min(candidates, key=lambda i: (abs(theta[i]), -theta[i]))
    return float(theta[best])


def _peak_index(pattern: RadiationPattern) -> int:
    return int(np.flatnonzero(pattern.theta_deg == main_lobe(pattern))[0])


def _main_lobe_region(mag: np.ndarray, peak: int) -> tuple[int, int]:
    lo = peak
    while lo > 0 and mag[lo - 1] <= mag[lo]:
        lo -= 1
    hi = peak
    while hi < mag.size - 1 and mag[hi + 1] <= mag[hi]:
        hi += 1
    return lo, hi


def side_lobe_level(pattern: RadiationPattern) -> float:
    """Highest secondary maximum relative to the peak, dB.

    The main-lobe region extends from the peak to the first local minimum
    on each side. Grid end points count as maxima when they exceed their
    only neighbour.

    Raises:
        UndefinedSLLError: nothing rises again outside the main lobe.
    """
    mag = pattern.magnitude
    peak = _peak_index(pattern)
    lo, hi = _main_lobe_region(mag, peak)
    best = 0.0
    n = mag.size
    for i in list(range(0, lo)) + list(range(hi + 1, n)):
        left_ok = i == 0 or mag[i] > mag[i - 1]
        right_ok = i == n - 1 or mag[i] >= mag[i + 1]
        if n > 1 and left_ok and right_ok:
            best = max(best, mag[i])
    if best <= 0.0:
        raise UndefinedSLLError("pattern has no side lobe outside the main-lobe region")
    return float(20.0 * math.log10(best / mag[peak]))


def _crossing(theta, db, i_in, i_out, level):
    t0, t1, d0, d1 = theta[i_in], theta[i_out], db[i_in], db[i_out]
    return t0 + (level - d0) * (t1 - t0) / (d1 - d0)


def half_power_beamwidth(pattern: RadiationPattern) -> float:
    """Width between the half-power crossings around the peak, degrees.

    Crossings are interpolated linearly in dB between samples.
    """
    db = pattern.magnitude_db
    theta = pattern.theta_deg
    peak = _peak_index(pattern)
    i = peak
    while i > 0 and db[i - 1] > HALF_POWER_DB:
        i -= 1
    if i == 0:
        raise BoundaryError("lower half-power crossing lies outside the observation grid")
    left = _crossing(theta, db, i, i - 1, HALF_POWER_DB)
    j = peak
    while j < db.size - 1 and db[j + 1] > HALF_POWER_DB:
        j += 1
    if j == db.size - 1:
        raise BoundaryError("upper half-power crossing lies outside the observation grid")
    right = _crossing(theta, db, j, j + 1, HALF_POWER_DB)
    return float(right - left)


def directivity(pattern) -> float:
    """Peak directivity in dBi from a full-sphere sampling (trapezoidal rule)."""
    if not isinstance(pattern, SpherePattern):
        raise UnsupportedOperationError(
            "directivity needs full-sphere samples; use compute_sphere_pattern() instead of a cut"
        )
    power = np.abs(pattern.field) ** 2
    theta = np.radians(pattern.theta_deg)
    phi = np.radians(pattern.phi_deg)
    inner = np.trapezoid(power * np.sin(theta)[:, None], theta, axis=0)
    total = np.trapezoid(inner, phi)
    if total <= 0:
        raise ValidationError("pattern carries no power")
    return float(10.0 * math.log10(4.0 * math.pi * power.max() / total))


def beam_metrics(pattern: RadiationPattern, sphere: SpherePattern | None = None) -> BeamMetrics:
    return BeamMetrics(
        main_lobe_deg=main_lobe(pattern),
        sll_db=side_lobe_level(pattern),
        directivity_dbi=None if sphere is None else directivity(sphere),
        hpbw_deg=half_power_beamwidth(pattern),
    )
