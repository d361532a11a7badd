"""Embedded default configuration mirroring the reference deployment.

Every subcommand and module must be runnable with zero configuration; the
values here are that default: the surveyed anchor geometry, the four
quartz-stabilized tone frequencies, the 12-bit 200 kSa/s digitizer, and the
power-law ranging constants chosen for the simulator.
"""

from __future__ import annotations

from .core import Anchor, AnchorSet, SurveyTable, load_survey_table
from .pca.canvas import CanvasCalibration
from .ranging import CalibrationResult
from .simulator import AdcSpec, NoiseModel, SimScenario

# Tone frequencies assigned to the four anchors, hertz.
TONE_FREQUENCIES_HZ: dict[str, float] = {
    "A": 34482.7,
    "B": 35398.2,
    "C": 36144.5,
    "D": 36922.8,
}

# Simulator ranging constants. beta = 3 is the free-space exponent for
# coplanar coils. alpha is a simulator choice, not a measured value: with
# alpha = 0.5 V m^3 the four-tone sum stays well inside the +-2.5 V rails
# everywhere in the surveyed area (worst case ~1.5 V near a corner) while a
# receiver within ~5 cm of a coil drives the ADC into saturation.
DEFAULT_ALPHA = 0.5
DEFAULT_BETA = 3.0

DEFAULT_ADC = AdcSpec(bits=12, full_scale=5.0, sample_rate=200_000.0, record_length=300)

# Fraction of the ADC rail above which a tone amplitude is flagged
# near-field-unreliable by the ranging stage.
SATURATION_THRESHOLD_REL = 0.9

NOISELESS = NoiseModel(white_noise_sigma=0.0, amplitude_jitter_rel=0.0, seed=0)

# Noise preset tuned once against the default accuracy experiment so the
# interior-point mean error lands near 0.12 m (observed 0.10 to 0.13 across
# seeds), then frozen. Do not retune casually: the regression suite pins the
# resulting error structure.
REFERENCE_NOISE = NoiseModel(
    white_noise_sigma=0.010,
    amplitude_jitter_rel=0.10,
    seed=20,
)


def default_anchor_set(
    alpha: float = DEFAULT_ALPHA,
    beta: float = DEFAULT_BETA,
    survey: SurveyTable | None = None,
) -> AnchorSet:
    """The four surveyed transmitter coils with default ranging constants."""
    table = survey if survey is not None else load_survey_table()
    anchors = tuple(
        Anchor(
            id=label,
            position=table.datum_points[label],
            frequency=TONE_FREQUENCIES_HZ[label],
            alpha=alpha,
            beta=beta,
        )
        for label in ("A", "B", "C", "D")
    )
    return AnchorSet(anchors)


def default_scenario(
    noise: NoiseModel = NOISELESS,
    adc: AdcSpec = DEFAULT_ADC,
    receiver_height_offset: float = 0.0,
) -> SimScenario:
    return SimScenario(
        anchor_set=default_anchor_set(),
        noise=noise,
        adc=adc,
        receiver_height_offset=receiver_height_offset,
    )


def ideal_scenario() -> SimScenario:
    """Zero noise and quantization disabled: the exact forward chain."""
    adc = AdcSpec(
        bits=None,
        full_scale=DEFAULT_ADC.full_scale,
        sample_rate=DEFAULT_ADC.sample_rate,
        record_length=DEFAULT_ADC.record_length,
    )
    return default_scenario(noise=NOISELESS, adc=adc)


def reference_scenario(seed: int | None = None) -> SimScenario:
    """The frozen decimeter-accuracy noise preset on the default deployment."""
    noise = REFERENCE_NOISE if seed is None else NoiseModel(
        white_noise_sigma=REFERENCE_NOISE.white_noise_sigma,
        amplitude_jitter_rel=REFERENCE_NOISE.amplitude_jitter_rel,
        seed=seed,
    )
    return default_scenario(noise=noise)


DEFAULT_CANVAS_SIZE = (1280, 720)


def default_canvas_calibration(
    width: int = DEFAULT_CANVAS_SIZE[0], height: int = DEFAULT_CANVAS_SIZE[1]
) -> CanvasCalibration:
    """Canvas bounds covering the surveyed anchor rectangle."""
    x_min, x_max, y_min, y_max = default_anchor_set().bounding_box()
    return CanvasCalibration(
        x_min=x_min, x_max=x_max, y_min=y_min, y_max=y_max, width=width, height=height
    )


def exact_calibration(anchor_set: AnchorSet) -> CalibrationResult:
    """A CalibrationResult carrying the true simulator constants.

    Convenience for zero-configuration runs that skip the calibration
    procedure; real experiments should fit from observations instead.
    """
    constants = {a.id: (a.alpha, a.beta) for a in anchor_set}
    return CalibrationResult(
        constants=constants,
        residual_log_rms={a.id: 0.0 for a in anchor_set},
        observation_counts={a.id: 0 for a in anchor_set},
    )
