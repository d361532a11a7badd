import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from magpos import (
    Anchor,
    AnchorSet,
    ConfigError,
    GeometryError,
    saturation_flag,
    synthesize_record,
    tone_amplitude,
    true_distance,
)
from magpos.core import SampleRecord
from magpos.defaults import default_scenario, ideal_scenario
from magpos.simulator import (
    AdcSpec,
    NoiseModel,
    SimScenario,
    load_scenario,
    quantize,
    scenario_from_text,
    scenario_to_text,
)


def make_anchor(aid="A", xy=(0.0, 0.0), freq=34482.7, alpha=1.0, beta=3.0):
    return Anchor(aid, (xy[0], xy[1], 1.25), freq, alpha, beta)


class TestTrueDistance:
    def test_three_four_five(self):
        assert true_distance(make_anchor(), (3.0, 4.0)) == 5.0

    def test_axis_aligned_from_b(self):
        b = make_anchor("B", (2.678, 0.0))
        assert true_distance(b, (2.678, 1.0)) == 1.0

    def test_a_to_c5_matches_hand_computation(self):
        d = true_distance(make_anchor(), (1.367, 2.360))
        assert d == pytest.approx(math.hypot(1.367, 2.360), rel=1e-15)
        assert d == pytest.approx(2.727322679845566, abs=1e-12)

    def test_coincident_position_rejected(self):
        with pytest.raises(GeometryError):
            true_distance(make_anchor(), (0.0, 0.0))


class TestToneAmplitude:
    def test_inverse_cube_at_two_meters(self):
        assert tone_amplitude(make_anchor(), 2.0) == 0.125

    def test_unit_distance_identity(self):
        assert tone_amplitude(make_anchor(), 1.0) == 1.0

    def test_matches_log_domain_form(self):
        a = make_anchor(alpha=2.5, beta=2.8)
        v = tone_amplitude(a, 1.7)
        assert v == pytest.approx(math.exp(math.log(2.5) - 2.8 * math.log(1.7)), rel=1e-14)

    @given(
        alpha=st.floats(0.1, 10.0),
        beta=st.floats(1.0, 4.0),
        d=st.floats(0.1, 10.0),
    )
    def test_log_linear_with_slope_minus_beta(self, alpha, beta, d):
        a = make_anchor(alpha=alpha, beta=beta)
        v1 = tone_amplitude(a, d)
        v2 = tone_amplitude(a, 2.0 * d)
        slope = (math.log(v2) - math.log(v1)) / math.log(2.0)
        assert slope == pytest.approx(-beta, abs=1e-12)

    def test_strictly_decreasing(self):
        a = make_anchor(alpha=2.5, beta=2.8)
        dists = np.linspace(0.2, 5.0, 50)
        amps = [tone_amplitude(a, d) for d in dists]
        assert all(x > y for x, y in zip(amps, amps[1:]))


class TestQuantizer:
    @given(st.floats(-2.4, 2.4))
    def test_error_at_most_half_lsb(self, v):
        adc = AdcSpec(bits=12, full_scale=5.0)
        q = quantize(np.array([v]), adc)[0]
        assert abs(q - v) <= adc.lsb / 2 + 1e-15

    def test_zero_maps_to_zero(self):
        assert quantize(np.array([0.0]), AdcSpec())[0] == 0.0

    def test_saturates_at_rails(self):
        adc = AdcSpec(bits=12, full_scale=5.0)
        lo, hi = adc.rails()
        q = quantize(np.array([-100.0, 100.0]), adc)
        assert q[0] == lo and q[1] == hi


class TestSynthesizeRecord:
    def test_negligible_amplitudes_quantize_to_zero(self):
        anchors = AnchorSet(
            tuple(
                make_anchor(aid, xy, freq, alpha=1e-9)
                for aid, xy, freq in [
                    ("A", (0, 0), 34482.7),
                    ("B", (2.678, 0), 35398.2),
                    ("C", (2.711, 4.694), 36144.5),
                    ("D", (0.009, 4.692), 36922.8),
                ]
            )
        )
        scenario = SimScenario(anchor_set=anchors)
        rec = synthesize_record(scenario, (1.3, 2.3))
        assert np.all(rec.samples == 0.0)

    def test_single_tone_is_pure_sinusoid(self):
        anchors = AnchorSet((make_anchor("A", (0.0, 0.0), 34482.7, alpha=0.5),))
        adc = AdcSpec(bits=None, full_scale=5.0)
        scenario = SimScenario(anchor_set=anchors, adc=adc, phases={"A": 0.7})
        rec = synthesize_record(scenario, (3.0, 4.0), t0=0.0)
        amp = 0.5 / 5.0**3
        t = np.arange(300) / 200e3
        expected = amp * np.sin(2 * np.pi * 34482.7 * t + 0.7)
        assert np.allclose(rec.samples, expected, atol=1e-15)

    def test_record_spans_1_5_ms_at_default_settings(self):
        rec = synthesize_record(default_scenario(), (1.3, 2.3))
        assert rec.duration == pytest.approx(1.5e-3)
        assert len(rec) == 300

    def test_deterministic_for_identical_inputs(self):
        scenario = default_scenario(noise=NoiseModel(0.01, 0.02, seed=42))
        a = synthesize_record(scenario, (1.1, 2.2), t0=3.5)
        b = synthesize_record(scenario, (1.1, 2.2), t0=3.5)
        assert np.array_equal(a.samples, b.samples)

    def test_distinct_acquisitions_differ(self):
        scenario = default_scenario(noise=NoiseModel(0.01, 0.0, seed=42))
        a = synthesize_record(scenario, (1.1, 2.2), t0=0.0)
        b = synthesize_record(scenario, (1.1, 2.2), t0=0.5)
        assert not np.array_equal(a.samples, b.samples)

    def test_height_offset_reduces_amplitude(self):
        flat = ideal_scenario()
        lifted = SimScenario(
            anchor_set=flat.anchor_set,
            adc=flat.adc,
            receiver_height_offset=0.5,
        )
        pos = (1.367, 2.360)
        rec_flat = synthesize_record(flat, pos)
        rec_lifted = synthesize_record(lifted, pos)
        assert np.max(np.abs(rec_lifted.samples)) < np.max(np.abs(rec_flat.samples))

    def test_position_on_anchor_rejected(self):
        with pytest.raises(GeometryError):
            synthesize_record(default_scenario(), (0.0, 0.0))

    def test_record_length_must_cover_tones(self):
        with pytest.raises(ConfigError):
            SimScenario(
                anchor_set=default_scenario().anchor_set,
                adc=AdcSpec(record_length=8),
            )


class TestSaturation:
    def test_all_samples_at_positive_rail(self):
        rec = SampleRecord(np.full(10, 2.5), 200e3, None, 5.0, 0.0)
        assert saturation_flag(rec)

    def test_zero_record_not_saturated(self):
        rec = SampleRecord(np.zeros(10), 200e3, 12, 5.0, 0.0)
        assert not saturation_flag(rec)

    def test_receiver_close_to_anchor_saturates(self):
        scenario = default_scenario()
        rec = synthesize_record(scenario, (0.05, 0.0))
        assert saturation_flag(rec)

    def test_mid_area_record_not_saturated(self):
        rec = synthesize_record(default_scenario(), (1.367, 2.360))
        assert not saturation_flag(rec)


class TestScenarioFiles:
    def test_text_round_trip(self):
        scenario = default_scenario(noise=NoiseModel(0.003, 0.02, seed=9))
        text = scenario_to_text(scenario)
        again = scenario_from_text(text)
        assert again.anchor_set == scenario.anchor_set
        assert again.noise == scenario.noise
        assert again.adc == scenario.adc
        assert again.tone_phases() == scenario.tone_phases()

    def test_loads_from_file(self, tmp_path):
        path = tmp_path / "scenario.txt"
        path.write_text(scenario_to_text(default_scenario()))
        scenario = load_scenario(str(path))
        assert scenario.adc.record_length == 300

    def test_missing_anchor_key_rejected(self):
        with pytest.raises(ConfigError):
            scenario_from_text("anchor.A.frequency = 1000\n")

    def test_no_anchors_rejected(self):
        with pytest.raises(ConfigError):
            scenario_from_text("sample_rate = 200000\n")
