"""Acceptance criteria for the default calibrated configuration.

Each ``check_*`` function returns a :class:`CriterionResult`; exceptions
inside a check count as a failure rather than aborting the whole run.
Runtime limits are part of the pass condition where one is stated.
"""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .circuit import UnitCellParams, gamma_grid, phase_span, resonance_slope, sweep_response, wrap_phase
from .constants import BAND, CENTER_FREQUENCY, DAC_FULL_SCALE_CODE, wavenumber
from .controller import (
    ChannelAddress,
    ControlFrame,
    DacBankState,
    apply_frames,
    channel_map,
    encode_plan,
    read_codes,
)
from .errors import FrameRejectedError, RisError
from .mapping import build_lut, plan_voltages, quantize_voltage
from .pipeline import LUT_STEP, REFERENCE_ANGLES, REFERENCE_FREQUENCIES, ScenarioSpec, run_scenario
from .radiation import (
    ObservationGrid,
    RadiationPattern,
    array_field,
    compute_pattern,
    element_weights,
    half_power_beamwidth,
    main_lobe,
    side_lobe_level,
)
from .synthesis import ArrayLayout, BeamSpec, FeedSpec, synthesize_profile

SEED = 20250101
DAMPING_BIASES = (0.0, 3.5, 7.0, 10.5, 14.0)


@dataclass
class CriterionResult:
    key: str
    name: str
    measured: str
    threshold: str
    passed: bool
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.key:>3} {self.name}: {self.measured} (threshold {self.threshold}, {self.seconds:.2f} s)"


def _timed(fn: Callable[..., tuple[str, str, bool]], key: str, name: str, limit: float | None, *args):
    t0 = time.perf_counter()
    try:
        measured, threshold, ok = fn(*args)
    except RisError as exc:
        measured, threshold, ok = f"error: {exc}", "no error", False
    dt = time.perf_counter() - t0
    if limit is not None:
        threshold = f"{threshold}; runtime < {limit:g} s"
        ok = ok and dt < limit
    return CriterionResult(key, name, measured, threshold, bool(ok), dt)


def _in_band_grid():
    freqs = np.round(np.linspace(BAND[0], BAND[1], 61), 3)
    biases = np.round(np.linspace(0.0, 14.0, 141), 12)
    return freqs, biases


# 1 ---------------------------------------------------------------------------
def _phase_span(params):
    biases = np.round(np.linspace(0.0, 14.0, 1401), 12)
    table = sweep_response([CENTER_FREQUENCY], biases, params)
    span = phase_span(table, CENTER_FREQUENCY)
    return f"{span:.2f} deg", "310 <= span < 360 deg", 310.0 <= span < 360.0


def check_phase_span(params: UnitCellParams) -> CriterionResult:
    return _timed(_phase_span, "1", "phase span at 6.1 GHz", 1.0, params)


# 2 ---------------------------------------------------------------------------
def _amplitude(params):
    freqs, biases = _in_band_grid()
    floor = float(np.abs(sweep_response(freqs, biases, params).gamma).min())
    return f"min |gamma| = {floor:.4f}", "|gamma| >= 0.70", floor >= 0.70


def check_amplitude_floor(params: UnitCellParams) -> CriterionResult:
    return _timed(_amplitude, "2", "amplitude floor 5.8-6.4 GHz x 0-14 V", 5.0, params)


# 3 ---------------------------------------------------------------------------
def _beams(params):
    worst_point, worst_sll, ok, parts = 0.0, -math.inf, True, []
    for f in REFERENCE_FREQUENCIES:
        for theta in REFERENCE_ANGLES:
            res = run_scenario(ScenarioSpec(f, theta), params, with_directivity=False)
            err = abs(res.metrics.main_lobe_deg - theta)
            sll = res.metrics.sll_db
            worst_point, worst_sll = max(worst_point, err), max(worst_sll, sll)
            ok = ok and err <= 2.0 and sll <= -8.0
            parts.append(f"{f / 1e9:g}GHz/{theta:g}:{res.metrics.main_lobe_deg:g}deg,{sll:.1f}dB")
    measured = f"max pointing error {worst_point:g} deg, worst SLL {worst_sll:.2f} dB [{'; '.join(parts)}]"
    return measured, "error <= 2 deg and SLL <= -8 dB", ok


def check_beam_pointing(params: UnitCellParams) -> CriterionResult:
    return _timed(_beams, "3", "beam pointing, six scenarios", 10.0, params)


# 4 ---------------------------------------------------------------------------
def uniform_line_factor(theta_deg, n: int, spacing: float, frequency: float) -> np.ndarray:
    """Closed-form sin(N psi/2) / sin(psi/2) of a centred uniform line array."""
    psi = wavenumber(frequency) * spacing * np.sin(np.radians(theta_deg))
    out = np.empty_like(psi)
    small = np.abs(np.sin(psi / 2)) < 1e-12
    out[small] = n
    out[~small] = np.sin(n * psi[~small] / 2) / np.sin(psi[~small] / 2)
    return out


def _array_factor():
    layout = ArrayLayout()
    feed = FeedSpec.plane()
    profile = synthesize_profile(BeamSpec(0.0, 0.0, CENTER_FREQUENCY), feed, layout)
    pattern = compute_pattern(profile, layout, feed, grid=ObservationGrid(), q=0)
    ref = layout.rows * uniform_line_factor(pattern.theta_deg, layout.cols, layout.pitch, CENTER_FREQUENCY)
    rel = float(np.max(np.abs(pattern.field - ref)) / np.max(np.abs(ref)))
    sll = side_lobe_level(pattern)
    hpbw = half_power_beamwidth(pattern)
    ok = rel <= 1e-6 and abs(sll + 13.0) <= 0.3 and abs(hpbw - 18.5) <= 1.0
    return (
        f"rel field error {rel:.2e}, SLL {sll:.3f} dB, HPBW {hpbw:.3f} deg",
        "rel <= 1e-6, SLL -13.0 +/- 0.3 dB, HPBW 18.5 +/- 1 deg",
        ok,
    )


def check_array_factor(params: UnitCellParams | None = None) -> CriterionResult:
    return _timed(_array_factor, "4", "uniform array-factor oracle", None)


# 5 ---------------------------------------------------------------------------
def _damping(params):
    with_patch = dataclasses.replace(params, middle_patch_enabled=True)
    without = dataclasses.replace(params, middle_patch_enabled=False)
    ok, parts = True, []
    for v in DAMPING_BIASES:
        f_on, s_on = resonance_slope(with_patch, v)
        f_off, s_off = resonance_slope(without, v)
        ok = ok and s_on < s_off and f_on < f_off
        parts.append(
            f"{v:g}V: {s_on * 1e9:.5f} < {s_off * 1e9:.5f} deg/GHz "
            f"(x f_res: {s_on * f_on:.1f} vs {s_off * f_off:.1f} deg)"
        )
    return "; ".join(parts), "|dphi/df| at resonance strictly lower with middle patch", ok


def check_resonance_damping(params: UnitCellParams) -> CriterionResult:
    return _timed(_damping, "5", "resonance damping by middle patch", 1.0, params)


# 6 ---------------------------------------------------------------------------
def _quantization():
    # exact rational arithmetic: the worst case sits exactly on the half-LSB bound
    rng = np.random.default_rng(SEED)
    steps = rng.integers(0, 1401, size=10_000)
    bound = Fraction(14, 2 * DAC_FULL_SCALE_CODE)
    worst = Fraction(0)
    for s in steps:
        v = Fraction(int(s), 100)
        vq, code = quantize_voltage(float(v))
        decoded = Fraction(code) * 14 / DAC_FULL_SCALE_CODE
        worst = max(worst, abs(decoded - v), abs(Fraction(repr(vq)) - v))
    grid = [round(k * 0.01, 2) for k in range(1401)]
    codes = [quantize_voltage(v)[1] for v in grid]
    monotone = all(a <= b for a, b in zip(codes, codes[1:]))
    return (
        f"max |decode(encode(v)) - v| = {float(worst) * 1e6:.4f} uV, codes monotone: {monotone}",
        f"<= {float(bound) * 1e6:.4f} uV and monotone",
        worst <= bound and monotone,
    )


def check_quantization(params: UnitCellParams | None = None) -> CriterionResult:
    return _timed(_quantization, "6", "quantisation round trip", None)


# 7 ---------------------------------------------------------------------------
def _controller(params):
    cells = [(r, c) for r in range(10) for c in range(10)]
    bijective = len({channel_map(cell) for cell in cells}) == 100

    layout, feed = ArrayLayout(), FeedSpec()
    profile = synthesize_profile(BeamSpec(15.0, 0.0, CENTER_FREQUENCY), feed, layout)
    plan = plan_voltages(profile, build_lut(params, CENTER_FREQUENCY, LUT_STEP))
    frames = encode_plan(plan)
    state = apply_frames([f.to_bytes() for f in frames], DacBankState())
    exact = np.array_equal(read_codes(state), plan.dac_codes)

    bad = bytearray(ControlFrame(frames[0].opcode, ((ChannelAddress(0, 0), 1234),)).to_bytes())
    bad[-1] ^= 0x01
    try:
        apply_frames([bytes(bad)], state)
        atomic = False
    except FrameRejectedError as exc:
        atomic = exc.applied_state == state
    return (
        f"readback exact: {exact}, corrupted frame rejected w/o change: {atomic}, bijective: {bijective}",
        "all true",
        exact and atomic and bijective,
    )


def check_controller(params: UnitCellParams) -> CriterionResult:
    return _timed(_controller, "7", "controller round trip", None, params)


# 8 ---------------------------------------------------------------------------
def _passivity(params):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(10_000):
        varactor = dataclasses.replace(params.varactor, series_resistance=float(rng.uniform(0.0, 50.0)))
        p = dataclasses.replace(
            params,
            varactor=varactor,
            substrate_loss_tangent=float(rng.uniform(0.0, 0.05)),
            sheet_impedance_ratio=float(rng.uniform(0.5, 30.0)),
            fixed_capacitance=float(rng.uniform(0.0, 1e-12)),
            fixed_inductance=float(rng.uniform(1e-12, 3e-9)),
        )
        g = gamma_grid([rng.uniform(1e9, 20e9)], [rng.uniform(0.0, 14.0)], p)[0, 0]
        worst = max(worst, abs(g))
    return f"max |gamma| = {worst:.12f}", "<= 1 + 1e-9", worst <= 1.0 + 1e-9


def _monotone(params):
    freqs = np.linspace(BAND[0], BAND[1], 21)
    biases = np.linspace(0.0, 14.0, 1401)
    ph = np.degrees(np.unwrap(np.angle(gamma_grid(freqs, biases, params)), axis=1))
    d = np.diff(ph, axis=1)
    ok_rows = np.all(d > 0, axis=1) | np.all(d < 0, axis=1)
    return f"{int(ok_rows.sum())}/21 frequencies monotone", "21/21", bool(ok_rows.all())


def _synthesis_mirror():
    layout, feed = ArrayLayout(), FeedSpec.plane()
    worst = 0.0
    for theta in (5.0, 15.0, 30.0, 60.0):
        pos = synthesize_profile(BeamSpec(theta, 0.0, CENTER_FREQUENCY), feed, layout).required_phase
        neg = synthesize_profile(BeamSpec(-theta, 0.0, CENTER_FREQUENCY), feed, layout).required_phase
        diff = wrap_phase(pos[:, ::-1] - neg)
        const = diff[0, 0]
        worst = max(worst, float(np.abs(wrap_phase(diff - const)).max()))
    return f"max deviation {worst:.2e} deg", "<= 1e-9 deg", worst <= 1e-9


def plane_wave_limit_deviation(z: float = 100.0, frequency: float = CENTER_FREQUENCY, theta: float = 15.0) -> float:
    """Worst element deviation (deg) between spherical-feed and plane-wave profiles.

    The best global constant (mid-range of the differences) is removed.
    """
    layout = ArrayLayout()
    beam = BeamSpec(theta, 0.0, frequency)
    sph = synthesize_profile(beam, FeedSpec(position=(0.0, 0.0, z)), layout).required_phase
    pw = synthesize_profile(beam, FeedSpec.plane(), layout).required_phase
    diff = wrap_phase(sph - pw)
    return float((diff.max() - diff.min()) / 2.0)


def _plane_limit():
    dev = plane_wave_limit_deviation(100.0)
    return f"max deviation {dev:.4f} deg at z = 100 m", "<= 0.1 deg", dev <= 0.1


def _pattern_invariants(params):
    layout, feed = ArrayLayout(), FeedSpec()
    profile = synthesize_profile(BeamSpec(15.0, 0.0, CENTER_FREQUENCY), feed, layout)
    plan = plan_voltages(profile, build_lut(params, CENTER_FREQUENCY, LUT_STEP))
    grid = ObservationGrid()
    w = element_weights(plan, layout, feed, params)
    theta = np.radians(grid.theta_deg)
    phi = np.zeros_like(theta)

    base = RadiationPattern(grid, array_field(w, layout, plan.frequency, theta, phi), plan.frequency)
    scaled = RadiationPattern(grid, array_field(3.7 * w, layout, plan.frequency, theta, phi), plan.frequency)
    lin = max(
        float(np.max(np.abs(base.magnitude_db - scaled.magnitude_db))),
        abs(main_lobe(base) - main_lobe(scaled)),
        abs(side_lobe_level(base) - side_lobe_level(scaled)),
        abs(half_power_beamwidth(base) - half_power_beamwidth(scaled)),
    )
    mirrored = array_field(w[:, ::-1], layout, plan.frequency, theta, phi)
    peak = np.max(np.abs(base.field))
    mir = float(np.max(np.abs(mirrored - base.field[::-1])) / peak)
    return f"linearity {lin:.2e}, mirror {mir:.2e}", "both <= 1e-9", lin <= 1e-9 and mir <= 1e-9


def check_properties(params: UnitCellParams) -> list[CriterionResult]:
    return [
        _timed(_passivity, "8a", "passivity, 10000 random lossy samples", None, params),
        _timed(_monotone, "8b", "phase monotone in bias at 21 in-band frequencies", None, params),
        _timed(_synthesis_mirror, "8c", "synthesis mirror symmetry", None),
        _timed(_plane_limit, "8d", "plane-wave limit of spherical feed", None),
        _timed(_pattern_invariants, "8e", "pattern linearity and mirror invariants", None, params),
    ]


def run_all(params: UnitCellParams) -> list[CriterionResult]:
    results = [
        check_phase_span(params),
        check_amplitude_floor(params),
        check_beam_pointing(params),
        check_array_factor(params),
        check_resonance_damping(params),
        check_quantization(params),
        check_controller(params),
    ]
    results.extend(check_properties(params))
    return results


def format_report(results: list[CriterionResult]) -> str:
    lines = [r.line() for r in results]
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} criteria passed")
    return "\n".join(lines)
