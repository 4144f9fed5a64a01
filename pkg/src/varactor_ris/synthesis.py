"""Per-element reflection phases that steer the feed's wave into a beam.

Conventions (exp(+j*omega*t)):

* The array lies in z = 0, centred on the origin. Column index runs along
  x, row index along y.
* Incident phase at an element is ``-k0 * r`` for a spherical feed at
  distance ``r`` and ``-k0 * (d . r)`` for a plane wave travelling along
  ``d``.
* The required reflection phase is ``-k0 * (x*u + y*v) - incident`` with
  ``u = sin(theta)cos(phi)``, ``v = sin(theta)sin(phi)``. Re-radiation
  adds ``+k0 * (x*u' + y*v')`` towards the observer, so the array field
  peaks at (theta, phi).
* Profiles are referenced to the array centre: the same expression
  evaluated at the origin is subtracted, so a symmetric feed with a
  broadside beam gives phase 0 there.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import wrap_phase
from .constants import wavenumber
from .errors import RangeError, ValidationError


@dataclass(frozen=True)
class ArrayLayout:
    rows: int = 10
    cols: int = 10
    pitch: float = 13.5e-3

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValidationError("rows and cols must be >= 1")
        if not self.pitch > 0:
            raise ValidationError("pitch must be > 0")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def check_index(self, element_index) -> tuple[int, int]:
        row, col = element_index
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise RangeError(f"element {element_index} outside {self.rows}x{self.cols} layout")
        return int(row), int(col)

    def position(self, element_index) -> tuple[float, float, float]:
        row, col = self.check_index(element_index)
        return (
            (col - (self.cols - 1) / 2.0) * self.pitch,
            (row - (self.rows - 1) / 2.0) * self.pitch,
            0.0,
        )

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """x and y grids of shape (rows, cols)."""
        x = (np.arange(self.cols) - (self.cols - 1) / 2.0) * self.pitch
        y = (np.arange(self.rows) - (self.rows - 1) / 2.0) * self.pitch
        return np.meshgrid(x, y)


@dataclass(frozen=True)
class FeedSpec:
    position: tuple[float, float, float] = (0.0, 0.0, 0.45)
    wave_model: str = "spherical"
    plane_incidence_direction: tuple[float, float, float] = (0.0, 0.0, -1.0)
    amplitude_taper: bool = True

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))
        object.__setattr__(self, "plane_incidence_direction", tuple(float(v) for v in self.plane_incidence_direction))
        if self.wave_model not in ("spherical", "plane"):
            raise ValidationError(f"wave_model must be 'spherical' or 'plane', got {self.wave_model!r}")
        if self.wave_model == "spherical" and not self.position[2] > 0:
            raise ValidationError("spherical feed must sit above the array (position z > 0)")
        norm = math.sqrt(sum(v * v for v in self.plane_incidence_direction))
        if abs(norm - 1.0) > 1e-12:
            raise ValidationError(f"plane_incidence_direction must be a unit vector (norm {norm})")

    @classmethod
    def plane(cls, direction=(0.0, 0.0, -1.0)) -> FeedSpec:
        return cls(wave_model="plane", plane_incidence_direction=direction, amplitude_taper=False)


@dataclass(frozen=True)
class BeamSpec:
    theta: float
    phi: float = 0.0
    frequency: float = 6.1e9

    def __post_init__(self):
        if not -90.0 <= self.theta <= 90.0:
            raise RangeError(f"theta {self.theta} deg outside [-90, 90]")
        if not 0.0 <= self.phi < 360.0:
            raise RangeError(f"phi {self.phi} deg outside [0, 360)")
        if not self.frequency > 0:
            raise RangeError("frequency must be > 0")

    def direction_cosines(self) -> tuple[float, float]:
        t, p = math.radians(self.theta), math.radians(self.phi)
        return math.sin(t) * math.cos(p), math.sin(t) * math.sin(p)


@dataclass(frozen=True)
class PhaseProfile:
    layout: ArrayLayout
    frequency: float
    required_phase: np.ndarray = field(compare=False)
    beam: BeamSpec | None = None
    feed: FeedSpec | None = None

    def __post_init__(self):
        phase = np.array(self.required_phase, dtype=float)
        if phase.shape != self.layout.shape:
            raise ValidationError(f"profile shape {phase.shape} does not match layout {self.layout.shape}")
        phase.setflags(write=False)
        object.__setattr__(self, "required_phase", phase)

    def write_csv(self, path) -> None:
        """Header block of ``# key: value`` lines followed by the rows x cols grid."""
        with open(path, "w", newline="") as fh:
            fh.write(f"# frequency_hz: {self.frequency!r}\n")
            if self.beam is not None:
                fh.write(f"# theta_deg: {self.beam.theta!r}\n# phi_deg: {self.beam.phi!r}\n")
            if self.feed is not None:
                fh.write(f"# feed_model: {self.feed.wave_model}\n")
                fh.write("# feed_position_m: " + ",".join(repr(v) for v in self.feed.position) + "\n")
                if self.feed.wave_model == "plane":
                    fh.write(
                        "# feed_direction: " + ",".join(repr(v) for v in self.feed.plane_incidence_direction) + "\n"
                    )
            fh.write(f"# rows: {self.layout.rows}\n# cols: {self.layout.cols}\n# pitch_m: {self.layout.pitch!r}\n")
            writer = csv.writer(fh, lineterminator="\n")
            for row in self.required_phase:
                writer.writerow([f"{v:.6f}" for v in row])


def _incident_radians(x, y, feed: FeedSpec, frequency: float):
    k0 = wavenumber(frequency)
    if feed.wave_model == "spherical":
        fx, fy, fz = feed.position
        return -k0 * np.sqrt((fx - x) ** 2 + (fy - y) ** 2 + fz**2)
    dx, dy, _ = feed.plane_incidence_direction
    return -k0 * (dx * x + dy * y)


def incident_phase(element_index, feed: FeedSpec, layout: ArrayLayout, frequency: float) -> float:
    """Wrapped phase (degrees) of the feed's field at an element."""
    x, y, _ = layout.position(element_index)
    return wrap_phase(math.degrees(_incident_radians(x, y, feed, frequency)))


def _required_radians(x, y, beam: BeamSpec, feed: FeedSpec):
    u, v = beam.direction_cosines()
    k0 = wavenumber(beam.frequency)
    raw = -k0 * (x * u + y * v) - _incident_radians(x, y, feed, beam.frequency)
    reference = -_incident_radians(0.0, 0.0, feed, beam.frequency)
    return raw - reference


def required_phase(element_index, beam: BeamSpec, feed: FeedSpec, layout: ArrayLayout) -> float:
    """Wrapped reflection phase (degrees) that collimates the feed into ``beam``."""
    x, y, _ = layout.position(element_index)
    return wrap_phase(math.degrees(_required_radians(x, y, beam, feed)))


def synthesize_profile(beam: BeamSpec, feed: FeedSpec, layout: ArrayLayout) -> PhaseProfile:
    x, y = layout.coordinates()
    phase = wrap_phase(np.degrees(_required_radians(x, y, beam, feed)))
    return PhaseProfile(layout=layout, frequency=beam.frequency, required_phase=phase, beam=beam, feed=feed)
