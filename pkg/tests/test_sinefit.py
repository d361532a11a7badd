import math

import numpy as np
import pytest

from magpos import ConfigError, MeasurementError, build_basis, estimate_amplitudes
from magpos.core import SampleRecord
from magpos.defaults import TONE_FREQUENCIES_HZ
from magpos.simulator import AdcSpec, quantize

FREQS = list(TONE_FREQUENCIES_HZ.values())
IDS = list(TONE_FREQUENCIES_HZ.keys())
FS = 200_000.0
M = 300

# Regression bound for quantization-limited amplitude error, measured once
# over 200 random phase draws (worst observed 1.14e-4 V ~= 0.09 LSB) and
# frozen with margin. One LSB is 1.22e-3 V.
QUANTIZED_AMP_ERROR_BOUND = 1.5e-4


def four_tone_record(amps, phases, quantized=False, noise=None, rng=None):
    t = np.arange(M) / FS
    s = np.zeros(M)
    for f, a, p in zip(FREQS, amps, phases):
        s += a * np.sin(2 * np.pi * f * t + p)
    if noise is not None:
        s += noise * rng.standard_normal(M)
    bits = 12 if quantized else None
    if quantized:
        s = quantize(s, AdcSpec(bits=12, full_scale=5.0))
    return SampleRecord(s, FS, bits, 5.0, 0.0)


@pytest.fixture(scope="module")
def basis():
    return build_basis(FREQS, FS, M)


class TestBuildBasis:
    def test_four_tone_shape_and_conditioning(self, basis):
        assert basis.matrix.shape == (300, 9)
        assert math.isfinite(basis.condition_number)
        assert basis.condition_number < 10

    def test_single_tone_classic_three_parameter_shape(self):
        b = build_basis([FREQS[0]], FS, M)
        assert b.matrix.shape == (300, 3)

    def test_duplicate_frequencies_rejected(self):
        with pytest.raises(ConfigError):
            build_basis([FREQS[0], FREQS[0]], FS, M)

    def test_frequency_above_nyquist_rejected(self):
        with pytest.raises(ConfigError):
            build_basis([FS / 2], FS, M)

    def test_record_too_short_rejected(self):
        with pytest.raises(ConfigError):
            build_basis(FREQS, FS, 8)

    def test_near_duplicate_frequencies_rejected(self):
        # 1e-6 Hz apart over 1.5 ms is numerically the same column twice.
        with pytest.raises(ConfigError):
            build_basis([FREQS[0], FREQS[0] + 1e-6], FS, M)


class TestEstimateAmplitudes:
    def test_exact_recovery_in_model_subspace(self, basis):
        amps = (0.4, 0.3, 0.2, 0.1)
        rec = four_tone_record(amps, (0.3, 1.1, 4.0, 2.2))
        est = estimate_amplitudes(rec, basis, IDS)
        for aid, truth in zip(IDS, amps):
            assert est.per_anchor[aid] == pytest.approx(truth, abs=1e-12)
        assert est.residual_rms < 1e-9

    def test_constant_record_is_pure_dc(self, basis):
        rec = SampleRecord(np.ones(M), FS, None, 5.0, 0.0)
        est = estimate_amplitudes(rec, basis, IDS)
        assert est.dc == pytest.approx(1.0, abs=1e-12)
        for aid in IDS:
            assert est.per_anchor[aid] == pytest.approx(0.0, abs=1e-12)

    def test_quantized_record_stays_within_frozen_bound(self, basis):
        rng = np.random.default_rng(11)
        amps = (0.4, 0.3, 0.2, 0.1)
        worst = 0.0
        for _ in range(100):
            phases = rng.uniform(0, 2 * np.pi, 4)
            rec = four_tone_record(amps, phases, quantized=True)
            est = estimate_amplitudes(rec, basis, IDS)
            worst = max(
                worst,
                max(abs(est.per_anchor[a] - t) for a, t in zip(IDS, amps)),
            )
        assert worst < QUANTIZED_AMP_ERROR_BOUND

    def test_phase_invariance(self, basis):
        rng = np.random.default_rng(3)
        amps = (0.25, 0.15, 0.08, 0.05)
        reference = None
        for _ in range(20):
            rec = four_tone_record(amps, rng.uniform(0, 2 * np.pi, 4))
            est = estimate_amplitudes(rec, basis, IDS)
            values = np.array([est.per_anchor[a] for a in IDS])
            if reference is None:
                reference = values
            else:
                assert np.allclose(values, reference, rtol=1e-9)

    def test_residual_orthogonal_to_basis(self, basis):
        rng = np.random.default_rng(5)
        s = rng.standard_normal(M) * 0.1
        rec = SampleRecord(s, FS, None, 5.0, 0.0)
        coeffs, *_ = np.linalg.lstsq(basis.matrix, s, rcond=None)
        resid = s - basis.matrix @ coeffs
        assert np.max(np.abs(basis.matrix.T @ resid)) < 1e-9

    def test_unbiased_under_white_noise_short_run(self, basis):
        # 1000-trial version of the statistical sanity check; the acceptance
        # suite runs the full 10000.
        rng = np.random.default_rng(17)
        amps = np.array([0.4, 0.3, 0.2, 0.1])
        sigma = 0.01 * amps.min()
        n = 1000
        errs = np.empty((n, 4))
        for i in range(n):
            rec = four_tone_record(amps, rng.uniform(0, 2 * np.pi, 4), noise=sigma, rng=rng)
            est = estimate_amplitudes(rec, basis, IDS)
            errs[i] = [est.per_anchor[a] - t for a, t in zip(IDS, amps)]
        mean = errs.mean(axis=0)
        sem = errs.std(axis=0, ddof=1) / math.sqrt(n)
        assert np.all(np.abs(mean) < 3 * sem)

    def test_amplitudes_are_non_negative_even_for_noise_only(self, basis):
        rng = np.random.default_rng(23)
        rec = SampleRecord(rng.standard_normal(M) * 1e-3, FS, None, 5.0, 0.0)
        est = estimate_amplitudes(rec, basis, IDS)
        assert all(v >= 0 for v in est.per_anchor.values())

    def test_record_length_mismatch_rejected(self, basis):
        rec = SampleRecord(np.zeros(299), FS, None, 5.0, 0.0)
        with pytest.raises(MeasurementError):
            estimate_amplitudes(rec, basis, IDS)

    def test_anchor_id_count_mismatch_rejected(self, basis):
        rec = SampleRecord(np.zeros(M), FS, None, 5.0, 0.0)
        with pytest.raises(MeasurementError):
            estimate_amplitudes(rec, basis, IDS[:3])

    def test_sample_rate_mismatch_rejected(self, basis):
        rec = SampleRecord(np.zeros(M), FS / 2, None, 5.0, 0.0)
        with pytest.raises(MeasurementError):
            estimate_amplitudes(rec, basis, IDS)
