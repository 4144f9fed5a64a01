"""Phase-to-voltage mapping and DAC quantisation."""

import csv
from decimal import Decimal
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from varactor_ris.circuit import UnitCellParams, reflection_coefficient, wrap_phase
from varactor_ris.errors import CalibrationError, RangeError, ValidationError
from varactor_ris.mapping import (
    PhaseLut,
    build_lut,
    decode_code,
    phase_to_voltage,
    plan_voltages,
    quantize_voltage,
)
from varactor_ris.synthesis import ArrayLayout, BeamSpec, FeedSpec, synthesize_profile

F0 = 6.1e9
HALF_LSB = Fraction(14, 2 * 65535)


@pytest.fixture(scope="module")
def lut():
    return build_lut(UnitCellParams(), F0, 0.1)


@pytest.fixture(scope="module")
def plan15(lut):
    prof = synthesize_profile(BeamSpec(15.0, 0.0, F0), FeedSpec(), ArrayLayout())
    return prof, plan_voltages(prof, lut)


def reachable(lut, targets):
    lo = min(lut.phases[0], lut.phases[-1])
    return ((np.asarray(targets) - lo) % 360.0) <= lut.span


class TestBuildLut:
    def test_coarsest_step(self):
        lut = build_lut(UnitCellParams(), F0, 14.0)
        assert len(lut) == 2
        assert list(lut.biases) == [0.0, 14.0]

    def test_default_step(self, lut):
        assert len(lut) == 141
        assert lut.biases[-1] == 14.0
        assert lut.span >= 310.0
        assert lut.span == pytest.approx(oracles.span_deg(F0, [k / 10 for k in range(141)]), abs=1e-9)

    def test_uneven_step_keeps_endpoint(self):
        lut = build_lut(UnitCellParams(), F0, 0.3)
        assert lut.biases[-1] == 14.0
        assert np.all(np.diff(lut.biases) > 0)

    @pytest.mark.parametrize("step", [0.0, -0.1, 14.5])
    def test_bad_step(self, step):
        with pytest.raises(RangeError):
            build_lut(UnitCellParams(), F0, step)

    def test_non_monotone_names_frequency(self):
        with pytest.raises(CalibrationError, match="6.1e"):
            PhaseLut(F0, [0.0, 1.0, 2.0], [0.0, 10.0, 5.0], [1.0, 1.0, 1.0])


class TestPhaseToVoltage:
    def test_exact_entry(self, lut):
        k = 37
        v, achieved = phase_to_voltage(lut, wrap_phase(lut.phases[k]))
        assert v == pytest.approx(lut.biases[k], abs=1e-9)
        assert achieved == pytest.approx(wrap_phase(lut.phases[k]), abs=1e-9)

    def test_midpoint_of_unreachable_arc_goes_low(self, lut):
        lo_end, hi_end = lut.phases[0], lut.phases[-1]
        gap = 360.0 - lut.span
        mid = wrap_phase(hi_end + gap / 2.0)
        v, achieved = phase_to_voltage(lut, mid)
        assert v == 0.0
        assert achieved == pytest.approx(wrap_phase(lo_end), abs=1e-9)

    def test_unreachable_snaps_to_nearest_end(self, lut):
        gap = 360.0 - lut.span
        near_high = wrap_phase(lut.phases[-1] + gap * 0.2)
        near_low = wrap_phase(lut.phases[-1] + gap * 0.8)
        assert phase_to_voltage(lut, near_high)[0] == 14.0
        assert phase_to_voltage(lut, near_low)[0] == 0.0

    def test_inversion_soundness_against_circuit(self, lut):
        params = UnitCellParams()
        targets = np.linspace(-179.5, 180.0, 360)
        for t in targets[reachable(lut, targets)]:
            v, _ = phase_to_voltage(lut, t)
            actual = reflection_coefficient(F0, v, params).phase
            assert abs(wrap_phase(actual - t)) <= lut.max_gap

    @settings(max_examples=100, deadline=None)
    @given(target=st.floats(-179.999, 180.0))
    def test_reachable_targets_are_met_exactly(self, target):
        lut = build_lut(UnitCellParams(), F0, 0.5)
        v, achieved = phase_to_voltage(lut, target)
        assert 0.0 <= v <= 14.0
        if reachable(lut, [target])[0]:
            assert abs(wrap_phase(achieved - target)) < 1e-9


class TestQuantizeVoltage:
    @pytest.mark.parametrize(
        "v,expected",
        [(0.0, (0.0, 0)), (14.0, (14.0, 65535)), (7.0, (7.0, 32768))],
    )
    def test_reference_points(self, v, expected):
        assert quantize_voltage(v) == expected

    def test_half_code_rounds_away_from_zero(self):
        # 7/14 * 65535 = 32767.5 exactly
        assert Fraction(700, 100) * 65535 / 14 == Fraction(65535, 2)
        assert quantize_voltage(7.0)[1] == 32768

    @pytest.mark.parametrize("text", ["0.005", "1.005", "2.675", "7.005", "13.995", "3.14", "10.0"])
    def test_matches_integer_oracle(self, text):
        cv, code = oracles.quantize_centivolts(text)
        assert quantize_voltage(float(text)) == (cv / 100, code)

    @pytest.mark.parametrize("v", [-0.001, 14.001, 20.0])
    def test_out_of_range(self, v):
        with pytest.raises(RangeError):
            quantize_voltage(v)

    @settings(max_examples=300, deadline=None)
    @given(v=st.floats(0.0, 14.0))
    def test_idempotent(self, v):
        q = quantize_voltage(v)
        assert quantize_voltage(q[0]) == q

    @settings(max_examples=300, deadline=None)
    @given(a=st.floats(0.0, 14.0), b=st.floats(0.0, 14.0))
    def test_codes_monotone(self, a, b):
        lo, hi = sorted((a, b))
        assert quantize_voltage(lo)[1] <= quantize_voltage(hi)[1]

    @settings(max_examples=300, deadline=None)
    @given(v=st.floats(0.0, 14.0))
    def test_round_trip_within_half_lsb(self, v):
        vq, code = quantize_voltage(v)
        assert abs(Fraction(code) * 14 / 65535 - Fraction(Decimal(repr(vq)))) <= HALF_LSB
        assert abs(decode_code(code) - vq) <= float(HALF_LSB) + 1e-15

    def test_decode_range(self):
        assert decode_code(0) == 0.0
        assert decode_code(65535) == 14.0
        with pytest.raises(RangeError):
            decode_code(65536)


class TestPlanVoltages:
    def test_broadside_plane_is_uniform(self, lut):
        prof = synthesize_profile(BeamSpec(0.0, 0.0, F0), FeedSpec.plane(), ArrayLayout())
        plan = plan_voltages(prof, lut)
        assert np.all(plan.voltages == plan.voltages[0, 0])
        assert plan.voltages.shape == (10, 10)

    def test_voltages_on_grid(self, plan15):
        _, plan = plan15
        cents = plan.voltages * 100
        assert np.all(np.abs(cents - np.round(cents)) < 1e-9)
        assert plan.voltages.min() >= 0.0 and plan.voltages.max() <= 14.0
        for v, code in zip(plan.voltages.ravel(), plan.dac_codes.ravel()):
            assert quantize_voltage(v) == (v, code)

    def test_error_bound_outside_dead_arc(self, lut, plan15):
        prof, plan = plan15
        mask = reachable(lut, prof.required_phase)
        assert mask.sum() == 88
        bound = lut.max_gap / 2 + lut.max_slope() * 0.005
        assert np.abs(plan.phase_error[mask]).max() <= bound

    def test_dead_arc_error_bounded_by_half_gap(self, lut, plan15):
        _, plan = plan15
        assert np.abs(plan.phase_error).max() <= (360.0 - lut.span) / 2 + lut.max_slope() * 0.005

    def test_refinement_moves_voltages_at_most_one_step(self, plan15):
        prof, coarse = plan15
        fine = plan_voltages(prof, build_lut(UnitCellParams(), F0, 0.01))
        assert np.abs(fine.voltages - coarse.voltages).max() <= 0.01 + 1e-9

    def test_frequency_mismatch(self, lut):
        prof = synthesize_profile(BeamSpec(15.0, 0.0, 6.0e9), FeedSpec(), ArrayLayout())
        with pytest.raises(ValidationError):
            plan_voltages(prof, lut)

    def test_csv_export(self, plan15, tmp_path):
        _, plan = plan15
        path = tmp_path / "plan.csv"
        plan.write_csv(path)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == [
            "row",
            "col",
            "voltage_v",
            "dac_code",
            "required_phase_deg",
            "achieved_phase_deg",
            "phase_error_deg",
        ]
        assert len(rows) == 101
        assert rows[1][:2] == ["0", "0"] and rows[2][:2] == ["0", "1"]
