"""Power-law ranging: the induced-voltage model V = alpha * d**(-beta).

The forward model, its inverse, and the calibration that fits (alpha, beta)
per anchor from known-distance observations. The fit is ordinary least
squares on the log-linear form ln V = ln alpha - beta ln d, which is exact
for the model; a nonlinear fit in the voltage domain is available as a
cross-check (`method="linear"`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .core import (
    AmplitudeEstimate,
    ConfigError,
    DistanceEstimate,
    MeasurementError,
)


def power_law_amplitude(alpha: float, beta: float, distance: float) -> float:
    """Tone amplitude in volts at planar distance `distance`."""
    if not distance > 0:
        raise MeasurementError("distance must be positive")
    return alpha * distance ** (-beta)


def invert_power_law(amplitude: float, alpha: float, beta: float) -> float:
    """Distance in meters for a received tone amplitude.

    d = (alpha / V) ** (1 / beta); exact inverse of power_law_amplitude.
    """
    if not amplitude > 0:
        raise MeasurementError("amplitude must be positive")
    return (alpha / amplitude) ** (1.0 / beta)


@dataclass(frozen=True)
class CalibrationObservation:
    """One calibration measurement: receiver at a known distance from an anchor."""

    anchor_id: str
    distance: float
    amplitude: float

    def __post_init__(self) -> None:
        if not self.distance > 0:
            raise MeasurementError("calibration distance must be positive")
        if not self.amplitude > 0:
            raise MeasurementError("calibration amplitude must be positive")


@dataclass(frozen=True)
class CalibrationResult:
    """Fitted (alpha, beta) per anchor with fit diagnostics.

    residual_log_rms is the RMS of ln V residuals; observation_counts the
    number of observations used per anchor.
    """

    constants: Mapping[str, tuple[float, float]]
    residual_log_rms: Mapping[str, float]
    observation_counts: Mapping[str, int]

    def __post_init__(self) -> None:
        for aid, (alpha, beta) in self.constants.items():
            if not (alpha > 0 and beta > 0):
                raise ConfigError(f"anchor {aid}: alpha and beta must be positive")

    def alpha(self, anchor_id: str) -> float:
        return self.constants[anchor_id][0]

    def beta(self, anchor_id: str) -> float:
        return self.constants[anchor_id][1]


def calibrate(
    observations: Iterable[CalibrationObservation],
    method: str = "log",
) -> CalibrationResult:
    """Fit per-anchor (alpha, beta) from calibration observations.

    method "log" (default) is OLS on ln V = ln alpha - beta ln d. Method
    "linear" refines that fit by least squares directly on V; it exists as
    an independent cross-check and is not used by the pipeline.
    """
    if method not in ("log", "linear"):
        raise ConfigError(f"unknown calibration method {method!r}")
    grouped: dict[str, list[CalibrationObservation]] = {}
    for obs in observations:
        grouped.setdefault(obs.anchor_id, []).append(obs)
    if not grouped:
        raise MeasurementError("no calibration observations given")

    constants: dict[str, tuple[float, float]] = {}
    residuals: dict[str, float] = {}
    counts: dict[str, int] = {}
    for aid, group in grouped.items():
        dists = np.array([o.distance for o in group])
        amps = np.array([o.amplitude for o in group])
        if len(set(dists.tolist())) < 2:
            raise MeasurementError(
                f"anchor {aid}: need observations at >= 2 distinct distances"
            )
        log_d = np.log(dists)
        log_v = np.log(amps)
        slope, intercept = np.polyfit(log_d, log_v, 1)
        alpha = float(math.exp(intercept))
        beta = float(-slope)
        if method == "linear":
            alpha, beta = _fit_linear_domain(dists, amps, alpha, beta)
        if not (alpha > 0 and beta > 0):
            raise MeasurementError(f"anchor {aid}: fit produced non-physical constants")
        model_log_v = math.log(alpha) - beta * log_d
        residuals[aid] = float(np.sqrt(np.mean((log_v - model_log_v) ** 2)))
        constants[aid] = (alpha, beta)
        counts[aid] = len(group)
    return CalibrationResult(constants, residuals, counts)


def _fit_linear_domain(
    dists: np.ndarray, amps: np.ndarray, alpha0: float, beta0: float
) -> tuple[float, float]:
    from scipy.optimize import curve_fit

    popt, _ = curve_fit(
        lambda d, a, b: a * d ** (-b), dists, amps, p0=(alpha0, beta0), maxfev=10000
    )
    return float(popt[0]), float(popt[1])


def amplitudes_to_distances(
    estimate: AmplitudeEstimate,
    calibration: CalibrationResult,
    saturation_threshold: float | None = None,
) -> DistanceEstimate:
    """Invert the power law per anchor.

    Anchors with non-positive or non-finite results are dropped (the fix
    proceeds on the rest). Amplitudes at or above saturation_threshold are
    kept but flagged near-field-unreliable.
    """
    per: dict[str, float] = {}
    near_field = set()
    for aid, amp in estimate.per_anchor.items():
        if aid not in calibration.constants:
            continue
        if amp <= 0:
            continue
        alpha, beta = calibration.constants[aid]
        d = invert_power_law(amp, alpha, beta)
        if not (math.isfinite(d) and d > 0):
            continue
        if saturation_threshold is not None and amp >= saturation_threshold:
            near_field.add(aid)
        per[aid] = d
    return DistanceEstimate(per, frozenset(near_field))


def parse_observations(text: str) -> list[CalibrationObservation]:
    """Parse calibration rows `anchor_id distance_m amplitude_v`."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ConfigError(
                f"observations line {lineno}: expected 'anchor_id distance_m amplitude_v'"
            )
        try:
            obs = CalibrationObservation(parts[0], float(parts[1]), float(parts[2]))
        except ValueError as exc:
            raise ConfigError(f"observations line {lineno}: bad number") from exc
        out.append(obs)
    return out


def load_observations(path: str) -> list[CalibrationObservation]:
    with open(path, encoding="utf-8") as fh:
        return parse_observations(fh.read())


def dump_observations(observations: Iterable[CalibrationObservation]) -> str:
    lines = [f"{o.anchor_id} {o.distance:.6f} {o.amplitude:.9f}" for o in observations]
    return "\n".join(lines) + "\n"
