"""Unit-cell circuit model."""

import cmath
import csv
import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from varactor_ris.circuit import (
    ReflectionSample,
    ReflectionTable,
    UnitCellParams,
    VaractorModel,
    branch_impedance,
    phase_span,
    reflection_coefficient,
    resonance_slope,
    resonant_frequency,
    surface_impedance,
    sweep_response,
    varactor_capacitance,
    wrap_phase,
)
from varactor_ris.errors import DomainError, FrequencyLookupError, RangeError, ValidationError

BAND_FREQS = 5.8e9 + 10e6 * np.arange(61)
BIASES = np.round(0.1 * np.arange(141), 10)

# Frozen from oracles.cell_gamma (admittance form, scalar cmath).
FROZEN_GAMMA = {
    (6.1e9, 0.0): complex(-0.9500673941704944, 0.2809558552134103),
    (6.1e9, 7.0): complex(-0.1660968826224531, 0.9463320473124287),
    (5.8e9, 14.0): complex(-0.6013988474551659, 0.788818192766759),
    (6.4e9, 3.3): complex(-0.8509339710030386, -0.37716255927287934),
}
FROZEN_SPAN_6G1 = 314.9853727188088
FROZEN_MIN_MAGNITUDE = 0.7202806179975488


def lossless(params: UnitCellParams) -> UnitCellParams:
    return dataclasses.replace(
        params,
        substrate_loss_tangent=0.0,
        varactor=dataclasses.replace(params.varactor, series_resistance=0.0),
    )


class TestVaractorCapacitance:
    def test_zero_bias_is_cj0_plus_cp(self):
        m = VaractorModel()
        assert varactor_capacitance(0.0, m) == m.junction_capacitance_zero_bias + m.parasitic_capacitance

    def test_matches_oracle_law(self):
        for v in (0.5, 3.0, 7.0, 14.0):
            assert varactor_capacitance(v, VaractorModel()) == pytest.approx(oracles.diode_c(v), rel=1e-12)

    def test_decreasing_in_bias(self):
        c = [varactor_capacitance(v, VaractorModel()) for v in BIASES]
        assert all(a > b for a, b in zip(c, c[1:]))

    def test_tracks_datasheet_range(self):
        # roughly 2.35 pF at 0 V down to ~0.47 pF near 15 V
        assert varactor_capacitance(0.0, VaractorModel()) == pytest.approx(2.35e-12, rel=0.01)
        assert varactor_capacitance(14.0, VaractorModel()) == pytest.approx(0.48e-12, rel=0.05)

    @pytest.mark.parametrize("bias", [-0.01, 14.01, float("nan")])
    def test_out_of_range_names_value(self, bias):
        with pytest.raises(RangeError, match="bias"):
            varactor_capacitance(bias, VaractorModel())

    def test_invalid_model(self):
        with pytest.raises(DomainError):
            VaractorModel(junction_potential=0.0)
        with pytest.raises(DomainError):
            VaractorModel(bias_range=(5.0, 5.0))


class TestResonantFrequency:
    def test_reference_value(self):
        assert resonant_frequency(1.0e-9, 0.68e-12) == pytest.approx(6.103e9, rel=5e-4)

    def test_quadrupled_capacitance_halves_frequency(self):
        f1 = resonant_frequency(1.0e-9, 0.68e-12)
        f4 = resonant_frequency(1.0e-9, 2.72e-12)
        assert f4 == pytest.approx(3.051e9, rel=5e-4)
        assert f4 == pytest.approx(f1 / 2, rel=1e-12)

    @pytest.mark.parametrize("l,c", [(0.0, 1e-12), (1e-9, 0.0), (-1e-9, 1e-12)])
    def test_non_positive_rejected(self, l, c):
        with pytest.raises(DomainError):
            resonant_frequency(l, c)

    def test_middle_patch_lowers_resonance(self):
        on = UnitCellParams()
        off = dataclasses.replace(on, middle_patch_enabled=False)
        for v in (0.0, 7.0, 14.0):
            assert resonance_slope(on, v)[0] < resonance_slope(off, v)[0]


class TestSurfaceImpedance:
    def test_branch_purely_reactive_free_at_series_resonance(self):
        p = lossless(UnitCellParams())
        c = varactor_capacitance(7.0, p.varactor) + p.fixed_capacitance
        f = resonant_frequency(p.branch_inductance, c)
        zb = complex(branch_impedance(f, 7.0, p))
        assert abs(zb) < 1e-9

    def test_series_resonance_shorts_the_surface(self):
        # with the branch at zero impedance the sheet is a short: gamma = -1
        p = lossless(UnitCellParams())
        c = varactor_capacitance(7.0, p.varactor) + p.fixed_capacitance
        f = resonant_frequency(p.branch_inductance, c)
        assert abs(surface_impedance(f, 7.0, p)) < 1e-9
        assert abs(reflection_coefficient(f, 7.0, p).phase) == pytest.approx(180.0, abs=1e-6)

    def test_phase_crosses_zero_at_antiresonance(self):
        p = lossless(UnitCellParams())
        freqs = np.linspace(3e9, 9e9, 6001)
        ph = [reflection_coefficient(f, 7.0, p).phase for f in freqs]
        crossings = [i for i in range(len(ph) - 1) if ph[i] * ph[i + 1] < 0 and abs(ph[i] - ph[i + 1]) < 90]
        assert crossings
        zs = surface_impedance(freqs[crossings[0]], 7.0, p)
        assert abs(zs) > 10 * oracles.ETA0

    def test_rejects_bad_inputs(self):
        with pytest.raises(DomainError):
            surface_impedance(0.0, 1.0, UnitCellParams())
        with pytest.raises(RangeError):
            surface_impedance(6e9, 20.0, UnitCellParams())


class TestReflectionCoefficient:
    @pytest.mark.parametrize("point", sorted(FROZEN_GAMMA))
    def test_frozen_oracle_values(self, point):
        f, v = point
        s = reflection_coefficient(f, v, UnitCellParams())
        assert abs(s.gamma - FROZEN_GAMMA[point]) < 1e-12

    def test_lossless_is_unit_magnitude(self):
        p = lossless(UnitCellParams())
        for f in (1e9, 5.8e9, 6.1e9, 6.4e9, 12e9):
            for v in (0.0, 3.0, 14.0):
                assert reflection_coefficient(f, v, p).magnitude == pytest.approx(1.0, abs=1e-9)

    def test_sample_fields_agree(self):
        s = reflection_coefficient(6.0e9, 5.0, UnitCellParams())
        assert s.magnitude == pytest.approx(abs(s.gamma), abs=1e-9)
        assert s.phase == pytest.approx(math.degrees(cmath.phase(s.gamma)), abs=1e-9)
        assert -180.0 < s.phase <= 180.0

    def test_wrap_phase_boundaries(self):
        assert wrap_phase(-180.0) == 180.0
        assert wrap_phase(180.0) == 180.0
        assert wrap_phase(540.0) == 180.0
        assert wrap_phase(-190.0) == pytest.approx(170.0)

    def test_from_gamma_negative_real_axis(self):
        assert ReflectionSample.from_gamma(1.0, 0.0, complex(-1.0, -0.0)).phase == 180.0


class TestSweepResponse:
    def test_single_point(self):
        p = UnitCellParams()
        t = sweep_response([6.1e9], [3.0], p)
        assert len(t) == 1
        assert t.sample(0, 0) == reflection_coefficient(6.1e9, 3.0, p)

    def test_full_band_grid(self):
        t = sweep_response(BAND_FREQS, BIASES, UnitCellParams())
        assert len(t) == 8601
        assert t.shape == (61, 141)
        assert t.magnitude.max() <= 1.0
        assert t.magnitude.min() == pytest.approx(FROZEN_MIN_MAGNITUDE, abs=1e-9)

    def test_iteration_is_frequency_major(self):
        t = sweep_response([5.9e9, 6.0e9], [0.0, 1.0, 2.0], UnitCellParams())
        order = [(s.frequency, s.bias) for s in t]
        assert order[:3] == [(5.9e9, 0.0), (5.9e9, 1.0), (5.9e9, 2.0)]
        assert order[3] == (6.0e9, 0.0)

    @pytest.mark.parametrize(
        "freqs,biases",
        [([], [0.0]), ([6e9], []), ([6.1e9, 6.0e9], [0.0]), ([6e9], [1.0, 1.0])],
    )
    def test_empty_or_unsorted_rejected(self, freqs, biases):
        with pytest.raises(ValidationError):
            sweep_response(freqs, biases, UnitCellParams())

    def test_deterministic(self):
        a = sweep_response(BAND_FREQS[:5], BIASES[:7], UnitCellParams())
        b = sweep_response(BAND_FREQS[:5], BIASES[:7], UnitCellParams())
        assert a == b

    def test_csv_export(self, tmp_path):
        t = sweep_response([6.0e9, 6.1e9], [0.0, 14.0], UnitCellParams())
        path = tmp_path / "sweep.csv"
        t.write_csv(path)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["frequency_hz", "bias_v", "gamma_re", "gamma_im", "magnitude", "phase_deg"]
        assert len(rows) == 5
        assert [float(r[0]) for r in rows[1:]] == [6.0e9, 6.0e9, 6.1e9, 6.1e9]
        g = complex(float(rows[4][2]), float(rows[4][3]))
        assert g == t.gamma[1, 1]

    def test_table_rejects_mismatched_grid(self):
        with pytest.raises(ValidationError):
            ReflectionTable([1.0], [0.0, 1.0], np.zeros((2, 2)))


class TestPhaseSpan:
    def test_single_bias_is_zero(self):
        t = sweep_response([6.1e9], [4.0], UnitCellParams())
        assert phase_span(t, 6.1e9) == 0.0

    def test_default_reaches_310_at_centre(self):
        t = sweep_response(BAND_FREQS, BIASES, UnitCellParams())
        span = phase_span(t, 6.1e9)
        assert span >= 310.0
        assert span == pytest.approx(FROZEN_SPAN_6G1, abs=1e-9)

    def test_matches_pointwise_oracle(self):
        t = sweep_response([6.1e9], BIASES, UnitCellParams())
        assert phase_span(t, 6.1e9) == pytest.approx(oracles.span_deg(6.1e9, list(BIASES)), abs=1e-9)

    def test_missing_frequency(self):
        t = sweep_response([6.1e9], BIASES, UnitCellParams())
        with pytest.raises(FrequencyLookupError):
            phase_span(t, 6.0e9)


class TestProperties:
    @settings(max_examples=200, deadline=None)
    @given(
        f=st.floats(0.5e9, 20e9),
        v=st.floats(0.0, 14.0),
        rs=st.floats(0.0, 50.0),
        tand=st.floats(0.0, 0.1),
        n=st.floats(0.5, 40.0),
        lfix=st.floats(1e-12, 3e-9),
    )
    def test_passivity(self, f, v, rs, tand, n, lfix):
        base = UnitCellParams()
        p = dataclasses.replace(
            base,
            substrate_loss_tangent=tand,
            sheet_impedance_ratio=n,
            fixed_inductance=lfix,
            varactor=dataclasses.replace(base.varactor, series_resistance=rs),
        )
        assert reflection_coefficient(f, v, p).magnitude <= 1.0 + 1e-9

    @pytest.mark.parametrize("f", 5.8e9 + 30e6 * np.arange(21))
    def test_phase_monotone_in_bias(self, f):
        t = sweep_response([f], BIASES, UnitCellParams())
        d = np.diff(t.unwrapped_phase_deg()[0])
        assert np.all(d > 0) or np.all(d < 0)

    def test_damping_by_middle_patch(self):
        # frequency-normalised slope at resonance shrinks when C grows
        on = UnitCellParams()
        off = dataclasses.replace(on, middle_patch_enabled=False)
        for v in (0.0, 3.5, 7.0, 10.5, 14.0):
            f_on, s_on = resonance_slope(on, v)
            f_off, s_off = resonance_slope(off, v)
            assert s_on < s_off
            assert s_on * f_on < s_off * f_off

    def test_low_profile(self):
        assert UnitCellParams().is_low_profile()


class TestParamsValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"cell_pitch": 0.0},
            {"substrate_permittivity": 0.5},
            {"substrate_loss_tangent": -0.1},
            {"fixed_inductance": 0.0},
            {"sheet_impedance_ratio": -1.0},
            {"total_thickness": 1e-3},
            {"patch_lengths": (1e-3, 0.0, 1e-3)},
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(DomainError):
            UnitCellParams(**kwargs)
