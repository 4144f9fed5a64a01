"""End-to-end beam scenario: profile -> LUT -> voltage plan -> frames -> pattern."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from .circuit import UnitCellParams
from .constants import BAND
from .controller import ControlFrame, encode_plan, write_capture
from .errors import RisError
from .mapping import PhaseLut, VoltagePlan, build_lut, plan_voltages
from .radiation import (
    BeamMetrics,
    ObservationGrid,
    RadiationPattern,
    SpherePattern,
    beam_metrics,
    compute_pattern,
    compute_sphere_pattern,
)
from .synthesis import ArrayLayout, BeamSpec, FeedSpec, PhaseProfile, synthesize_profile

log = logging.getLogger(__name__)

REFERENCE_FREQUENCIES = (5.8e9, 6.1e9, 6.4e9)
REFERENCE_ANGLES = (15.0, 30.0)
LUT_STEP = 0.01


@dataclass(frozen=True)
class ScenarioSpec:
    frequency: float
    theta: float
    phi: float = 0.0
    feed: FeedSpec = field(default_factory=FeedSpec)
    mode: str = "quantized"
    element_exponent: float = 1.0

    def __post_init__(self):
        if self.mode not in ("ideal", "quantized"):
            raise RisError(f"mode must be 'ideal' or 'quantized', got {self.mode!r}")

    @property
    def is_reference_scenario(self) -> bool:
        in_band = BAND[0] - 1.0 <= self.frequency <= BAND[1] + 1.0
        return in_band and self.theta in REFERENCE_ANGLES and self.phi == 0.0

    @property
    def directory_name(self) -> str:
        return f"f{self.frequency / 1e9:g}_t{self.theta:g}"


class StageError(RisError):
    """Wraps a failure with the pipeline stage it came from."""

    def __init__(self, stage: str, exc: Exception):
        super().__init__(f"{stage}: {exc}")
        self.stage = stage


@dataclass
class ScenarioResult:
    spec: ScenarioSpec
    profile: PhaseProfile
    lut: PhaseLut
    plan: VoltagePlan
    frames: list[ControlFrame]
    pattern: RadiationPattern
    metrics: BeamMetrics
    sphere: SpherePattern | None = None


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except RisError as exc:
        raise StageError(name, exc) from exc


def run_scenario(
    spec: ScenarioSpec,
    params: UnitCellParams,
    layout: ArrayLayout | None = None,
    grid: ObservationGrid | None = None,
    with_directivity: bool = True,
) -> ScenarioResult:
    layout = layout or ArrayLayout()
    beam = _stage("synthesis", BeamSpec, spec.theta, spec.phi, spec.frequency)
    profile = _stage("synthesis", synthesize_profile, beam, spec.feed, layout)
    lut = _stage("mapping", build_lut, params, spec.frequency, LUT_STEP)
    plan = _stage("mapping", plan_voltages, profile, lut)
    frames = _stage("controller", encode_plan, plan) if plan.shape == (10, 10) else []
    source = plan if spec.mode == "quantized" else profile
    pattern = _stage("radiation", compute_pattern, source, layout, spec.feed, params, grid, spec.element_exponent)
    sphere = None
    if with_directivity:
        sphere = _stage("radiation", compute_sphere_pattern, source, layout, spec.feed, params, q=spec.element_exponent)
    metrics = _stage("radiation", beam_metrics, pattern, sphere)
    return ScenarioResult(spec, profile, lut, plan, frames, pattern, metrics, sphere)


def write_scenario(result: ScenarioResult, out_dir) -> Path:
    """Write the fixed set of artefacts into ``out_dir/f<GHz>_t<deg>``."""
    target = Path(out_dir) / result.spec.directory_name
    target.mkdir(parents=True, exist_ok=True)
    result.profile.write_csv(target / "profile.csv")
    result.plan.write_csv(target / "plan.csv")
    result.pattern.write_csv(target / "pattern.csv")
    (target / "metrics.txt").write_text(_metrics_block(result))
    write_capture(target / "frames.cap", result.frames)
    log.info("wrote scenario artefacts to %s", target)
    return target


def _metrics_block(result: ScenarioResult) -> str:
    spec = result.spec
    header = (
        f"frequency_hz: {spec.frequency!r}\n"
        f"theta_target_deg: {spec.theta:g}\n"
        f"phi_deg: {spec.phi:g}\n"
        f"mode: {spec.mode}\n"
        f"max_abs_phase_error_deg: {float(abs(result.plan.phase_error).max()):.4f}\n"
    )
    return header + result.metrics.to_text()


def pointing_error(result: ScenarioResult) -> float:
    return abs(result.metrics.main_lobe_deg - result.spec.theta)
