"""Software twin of a magnetic-induction indoor positioning exhibition system.

The package splits along the real system's seams: `simulator` replaces the
coils and digitizer, `sinefit` and `ranging` and `trilateration` form the
estimation chain, `pipeline` runs it in real time and streams fixes over a
socket, `pca` is the position-controlled application consuming them, and
`evaluation` reproduces the accuracy analysis on the surveyed control grid.
"""

from .core import (
    AmplitudeEstimate,
    Anchor,
    AnchorSet,
    ConfigError,
    DistanceEstimate,
    GeometryError,
    InsufficientAnchorsError,
    MagposError,
    MeasurementError,
    PositionFix,
    SampleRecord,
    SurveyTable,
    load_survey_table,
    project_to_reference_plane,
)
from .ranging import (
    CalibrationObservation,
    CalibrationResult,
    amplitudes_to_distances,
    calibrate,
    invert_power_law,
    power_law_amplitude,
)
from .simulator import (
    AdcSpec,
    NoiseModel,
    SimScenario,
    saturation_flag,
    synthesize_record,
    tone_amplitude,
    true_distance,
)
from .sinefit import SinefitBasis, build_basis, estimate_amplitudes
from .trilateration import SolverConfig, jacobian, objective, solve

__version__ = "0.1.0"
