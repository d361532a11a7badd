"""Shared domain types and the embedded geodetic survey dataset.

Everything downstream (signal simulation, amplitude estimation, ranging,
trilateration, the exhibition application) works in the local survey frame:
meters, origin at the center of coil A, z pointing up.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping

import numpy as np

Point2 = tuple[float, float]
Point3 = tuple[float, float, float]

# Datum coils were measured twice; the survey is accepted only if the two
# passes agree to this bound on every coordinate.
DATUM_REPEATABILITY_M = 0.002


class MagposError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(MagposError):
    """Malformed configuration or data file, or invalid parameter values."""


class GeometryError(MagposError):
    """Degenerate geometry: coincident points, collinear anchors."""


class MeasurementError(MagposError):
    """Invalid measurement input: bad amplitudes, dimension mismatches."""


class InsufficientAnchorsError(MagposError):
    """Fewer usable anchors than a 2-D fix requires."""


@dataclass(frozen=True)
class Anchor:
    """A fixed transmitter coil at a surveyed position.

    alpha has units of volts * meter**beta so that the received tone
    amplitude at planar distance d is alpha * d**(-beta).
    """

    id: str
    position: Point3
    frequency: float
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))
        if len(self.position) != 3:
            raise ConfigError(f"anchor {self.id}: position must be a 3-vector")
        if not self.frequency > 0:
            raise ConfigError(f"anchor {self.id}: frequency must be positive")
        if not self.alpha > 0:
            raise ConfigError(f"anchor {self.id}: alpha must be positive")
        if not self.beta > 0:
            raise ConfigError(f"anchor {self.id}: beta must be positive")

    @property
    def xy(self) -> Point2:
        return (self.position[0], self.position[1])


@dataclass(frozen=True)
class AnchorSet:
    """Ordered collection of anchors sharing one reference plane.

    The reference plane is horizontal at the z of the first anchor (coil A
    in the default deployment); 2-D positioning happens in that plane.
    Trilateration needs at least three anchors; construction allows fewer so
    that degenerate configurations can be expressed and rejected at use time.
    """

    anchors: tuple[Anchor, ...]
    reference_plane_z: float | None = None

    def __post_init__(self) -> None:
        anchors = tuple(self.anchors)
        object.__setattr__(self, "anchors", anchors)
        if not anchors:
            raise ConfigError("anchor set must contain at least one anchor")
        ids = [a.id for a in anchors]
        if len(set(ids)) != len(ids):
            raise ConfigError("anchor ids must be unique")
        freqs = [a.frequency for a in anchors]
        if len(set(freqs)) != len(freqs):
            raise ConfigError("anchor frequencies must be pairwise distinct")
        xy = [a.xy for a in anchors]
        if len(set(xy)) != len(xy):
            raise ConfigError("no two anchors may share the same (x, y)")
        if self.reference_plane_z is None:
            object.__setattr__(self, "reference_plane_z", anchors[0].position[2])

    def __len__(self) -> int:
        return len(self.anchors)

    def __iter__(self):
        return iter(self.anchors)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(a.id for a in self.anchors)

    def by_id(self, anchor_id: str) -> Anchor:
        for a in self.anchors:
            if a.id == anchor_id:
                return a
        raise KeyError(anchor_id)

    def positions_xy(self) -> np.ndarray:
        """Anchor coordinates in the reference plane, shape (N, 2)."""
        return np.array([a.xy for a in self.anchors], dtype=float)

    def bounding_box(self) -> tuple[float, float, float, float]:
        """(x_min, x_max, y_min, y_max) over the anchor positions."""
        xy = self.positions_xy()
        return (
            float(xy[:, 0].min()),
            float(xy[:, 0].max()),
            float(xy[:, 1].min()),
            float(xy[:, 1].max()),
        )


@dataclass(frozen=True)
class SampleRecord:
    """One digitized acquisition window.

    samples are in volts at the ADC input; adc_bits is None when the record
    was produced with quantization disabled (ideal converter). full_scale is
    the peak-to-peak input range, so every sample lies in +-full_scale/2.
    """

    samples: np.ndarray
    sample_rate: float
    adc_bits: int | None
    full_scale: float
    timestamp: float

    def __post_init__(self) -> None:
        samples = np.array(self.samples, dtype=np.float64)
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        if not self.sample_rate > 0:
            raise ConfigError("sample_rate must be positive")
        if not self.full_scale > 0:
            raise ConfigError("full_scale must be positive")
        if self.adc_bits is not None and self.adc_bits < 1:
            raise ConfigError("adc_bits must be a positive integer or None")
        rail = self.full_scale / 2 + 1e-12
        if samples.size and (samples.min() < -rail or samples.max() > rail):
            raise MeasurementError("sample outside the ADC input range")

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration(self) -> float:
        """Time spanned by the record in seconds."""
        return len(self) / self.sample_rate


@dataclass(frozen=True)
class AmplitudeEstimate:
    """Per-anchor tone amplitudes estimated from one record."""

    per_anchor: Mapping[str, float]
    dc: float
    residual_rms: float
    condition_number: float

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.per_anchor.values()):
            raise MeasurementError("tone amplitudes must be non-negative")
        if self.residual_rms < 0:
            raise MeasurementError("residual_rms must be non-negative")


@dataclass(frozen=True)
class DistanceEstimate:
    """Per-anchor inverted ranges.

    near_field lists anchors whose amplitude exceeded the saturation
    threshold; their distances are kept but flagged unreliable.
    """

    per_anchor: Mapping[str, float]
    near_field: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        for aid, d in self.per_anchor.items():
            if not (math.isfinite(d) and d > 0):
                raise MeasurementError(f"distance for anchor {aid} must be positive and finite")


@dataclass(frozen=True)
class PositionFix:
    """2-D position estimate with solver diagnostics."""

    x: float
    y: float
    timestamp: float
    iterations: int
    final_cost: float
    converged: bool

    def __post_init__(self) -> None:
        if self.converged and not math.isfinite(self.final_cost):
            raise MeasurementError("a converged fix must carry a finite cost")

    @property
    def xy(self) -> Point2:
        return (self.x, self.y)


_DATUM_RE = re.compile(r"^[A-D]\*?$")
_CALIBRATION_RE = re.compile(r"^C\d+$")
_CONTROL_RE = re.compile(r"^P\d+$")


@dataclass(frozen=True)
class SurveyTable:
    """The geodetic survey of the deployment area, embedded verbatim.

    datum_points holds the four transmitter coils A..D plus their starred
    end-of-survey repeats; calibration_points are C1..C5; control_points are
    the printed P-rows (26 of them, P13 was never surveyed and must not be
    invented).
    """

    datum_points: Mapping[str, Point3]
    calibration_points: Mapping[str, Point3]
    control_points: Mapping[str, Point3]

    def point(self, label: str) -> Point3:
        for group in (self.datum_points, self.calibration_points, self.control_points):
            if label in group:
                return group[label]
        raise KeyError(label)

    @property
    def control_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.control_points))

    @property
    def calibration_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.calibration_points))

    def datum_repeatability(self) -> float:
        """Largest coordinate difference between a datum point and its repeat."""
        worst = 0.0
        for label, xyz in self.datum_points.items():
            if label.endswith("*"):
                continue
            repeat = self.datum_points.get(label + "*")
            if repeat is None:
                continue
            worst = max(worst, max(abs(a - b) for a, b in zip(xyz, repeat)))
        return worst


def _parse_survey_rows(text: str) -> list[tuple[str, Point3]]:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ConfigError(f"survey file line {lineno}: expected 'label x y z'")
        label = parts[0]
        try:
            xyz = (float(parts[1]), float(parts[2]), float(parts[3]))
        except ValueError as exc:
            raise ConfigError(f"survey file line {lineno}: bad coordinate") from exc
        rows.append((label, xyz))
    return rows


def parse_survey_table(text: str) -> SurveyTable:
    """Build a SurveyTable from delimited text (label x y z per row)."""
    datum: dict[str, Point3] = {}
    calibration: dict[str, Point3] = {}
    control: dict[str, Point3] = {}
    for label, xyz in _parse_survey_rows(text):
        if _DATUM_RE.match(label):
            group = datum
        elif _CALIBRATION_RE.match(label):
            group = calibration
        elif _CONTROL_RE.match(label):
            group = control
        else:
            raise ConfigError(f"survey file: unrecognized point label {label!r}")
        if label in group:
            raise ConfigError(f"survey file: duplicate point label {label!r}")
        group[label] = xyz
    table = SurveyTable(datum, calibration, control)
    worst = table.datum_repeatability()
    if worst > DATUM_REPEATABILITY_M + 1e-12:
        raise ConfigError(
            f"datum repeatability check failed: {worst:.4f} m exceeds "
            f"{DATUM_REPEATABILITY_M:.3f} m"
        )
    return table


def dump_survey_table(table: SurveyTable) -> str:
    """Serialize a SurveyTable back to the delimited text format."""
    lines = []
    unstarred = [(l, p) for l, p in table.datum_points.items() if not l.endswith("*")]
    starred = [(l, p) for l, p in table.datum_points.items() if l.endswith("*")]
    for label, (x, y, z) in (
        unstarred
        + list(table.calibration_points.items())
        + list(table.control_points.items())
        + starred
    ):
        lines.append(f"{label} {x:.3f} {y:.3f} {z:.3f}")
    return "\n".join(lines) + "\n"


def load_survey_table(path: str | None = None) -> SurveyTable:
    """Load the embedded survey dataset, or a compatible file at `path`."""
    if path is None:
        text = resources.files("magpos").joinpath("data/survey_points.txt").read_text()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return parse_survey_table(text)


def project_to_reference_plane(point: Iterable[float], anchor_set: AnchorSet) -> Point2:
    """Project a surveyed 3-D point onto the anchor reference plane.

    The plane is horizontal at the z of the first anchor, so the projection
    simply drops z. The anchor z values differ by a few centimeters at most;
    no tilt compensation is applied.
    """
    x, y, *_ = point
    del anchor_set  # the plane is horizontal; only its existence matters
    return (float(x), float(y))
