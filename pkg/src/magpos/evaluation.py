"""Accuracy evaluation on the surveyed control grid.

Reruns the deployment's accuracy methodology in simulation: calibrate the
ranging model at the five calibration points, then take repeated fixes at
every printed control point, score them against the surveyed references
projected onto the anchor plane, and aggregate means, the empirical error
CDF, and the border/interior split. A dilution-of-precision map over the
area complements the error statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import (
    AnchorSet,
    InsufficientAnchorsError,
    MagposError,
    Point2,
    Point3,
    SurveyTable,
    load_survey_table,
    project_to_reference_plane,
)
from .ranging import (
    CalibrationObservation,
    CalibrationResult,
    amplitudes_to_distances,
    calibrate,
)
from .simulator import SimScenario, synthesize_record
from .sinefit import build_basis
from .trilateration import SolverConfig, jacobian, solve

DEFAULT_BORDER_THRESHOLD_M = 0.10


def positioning_error(
    estimate: Point2, reference3d: Point3, anchor_set: AnchorSet
) -> float:
    """Euclidean distance between a 2-D estimate and the projected reference."""
    rx, ry = project_to_reference_plane(reference3d, anchor_set)
    return math.hypot(estimate[0] - rx, estimate[1] - ry)


def _segment_distance(p: Point2, a: Point2, b: Point2) -> float:
    vx, vy = b[0] - a[0], b[1] - a[1]
    seg = vx * vx + vy * vy
    if seg == 0.0:
        return math.hypot(p[0] - a[0], p[1] - a[1])
    t = ((p[0] - a[0]) * vx + (p[1] - a[1]) * vy) / seg
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - (a[0] + t * vx), p[1] - (a[1] + t * vy))


def boundary_distance(point: Point2, anchor_set: AnchorSet) -> float:
    """Distance from a point to the boundary of the anchor quadrilateral."""
    corners = [a.xy for a in anchor_set]
    n = len(corners)
    return min(
        _segment_distance(point, corners[i], corners[(i + 1) % n]) for i in range(n)
    )


def classify_border_points(
    survey: SurveyTable,
    anchor_set: AnchorSet,
    threshold: float = DEFAULT_BORDER_THRESHOLD_M,
) -> frozenset[str]:
    """Control points within `threshold` of the anchor-quadrilateral boundary."""
    border = set()
    for pid, xyz in survey.control_points.items():
        p = project_to_reference_plane(xyz, anchor_set)
        if boundary_distance(p, anchor_set) <= threshold:
            border.add(pid)
    return frozenset(border)


def gdop_at(position: Point2, anchor_set: AnchorSet) -> float:
    """Geometric dilution of precision for range fixes at `position`.

    sqrt(trace((J^T J)^-1)) with J the unit-vector range Jacobian; the factor
    by which independent unit-variance range errors inflate position error.
    Returns inf where the geometry is singular.
    """
    if len(anchor_set) < 3:
        raise InsufficientAnchorsError("GDOP needs at least 3 anchors")
    rows = jacobian(position, anchor_set)
    s = rows.T @ rows
    det = s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0]
    if det <= 1e-15:
        return math.inf
    return math.sqrt((s[0, 0] + s[1, 1]) / det)


@dataclass(frozen=True)
class GdopGrid:
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray  # shape (len(ys), len(xs)), inf where singular

    def rows(self) -> Iterable[tuple[float, float, float]]:
        for iy, y in enumerate(self.ys):
            for ix, x in enumerate(self.xs):
                yield float(x), float(y), float(self.values[iy, ix])


def gdop_map(
    anchor_set: AnchorSet,
    grid_resolution: float = 0.1,
    bounds: tuple[float, float, float, float] | None = None,
) -> GdopGrid:
    """GDOP sampled on a regular grid over the area (default: anchor bbox)."""
    if len(anchor_set) < 3:
        raise InsufficientAnchorsError("GDOP needs at least 3 anchors")
    if bounds is None:
        bounds = anchor_set.bounding_box()
    x0, x1, y0, y1 = bounds
    xs = np.arange(x0, x1 + grid_resolution / 2, grid_resolution)
    ys = np.arange(y0, y1 + grid_resolution / 2, grid_resolution)
    values = np.empty((len(ys), len(xs)))
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            try:
                values[iy, ix] = gdop_at((float(x), float(y)), anchor_set)
            except MagposError:
                values[iy, ix] = math.inf
    return GdopGrid(xs, ys, values)


@dataclass(frozen=True)
class TrialRow:
    point_id: str
    trial: int
    x_est: float
    y_est: float
    x_ref: float
    y_ref: float
    error_m: float


@dataclass(frozen=True)
class ErrorReport:
    """Aggregated accuracy results over the control grid."""

    point_means: Mapping[str, float]
    point_counts: Mapping[str, int]
    border_ids: frozenset[str]
    mean_error_all: float
    mean_error_interior: float
    mean_error_border: float
    cdf_samples: tuple[float, ...]  # sorted interior errors
    trials: tuple[TrialRow, ...]
    failed_counts: Mapping[str, int]
    calibration: CalibrationResult

    def cdf(self, threshold: float) -> float:
        """Empirical probability that the interior error is <= threshold."""
        if not self.cdf_samples:
            return 0.0
        return float(np.searchsorted(self.cdf_samples, threshold, side="right")) / len(
            self.cdf_samples
        )


def simulate_calibration_observations(
    scenario: SimScenario,
    survey: SurveyTable | None = None,
    records_per_point: int = 1,
    t0_base: float = 10_000.0,
) -> list[CalibrationObservation]:
    """Measured amplitudes at the surveyed calibration points C1..C5.

    Each observation pairs the known planar distance to an anchor with the
    amplitude estimated from a full simulated acquisition at that point.
    """
    table = survey if survey is not None else load_survey_table()
    anchor_set = scenario.anchor_set
    adc = scenario.adc
    basis = build_basis(
        [a.frequency for a in anchor_set], adc.sample_rate, adc.record_length
    )
    duration = adc.record_length / adc.sample_rate
    observations: list[CalibrationObservation] = []
    for i, cid in enumerate(sorted(table.calibration_points)):
        pos = project_to_reference_plane(table.calibration_points[cid], anchor_set)
        for r in range(records_per_point):
            t0 = t0_base + (i * records_per_point + r) * duration
            record = synthesize_record(scenario, pos, t0)
            from .sinefit import estimate_amplitudes

            est = estimate_amplitudes(record, basis, anchor_set.ids)
            for anchor in anchor_set:
                amp = est.per_anchor[anchor.id]
                if amp <= 0:
                    continue
                d = math.hypot(
                    pos[0] - anchor.position[0], pos[1] - anchor.position[1]
                )
                observations.append(CalibrationObservation(anchor.id, d, amp))
    return observations


def run_accuracy_experiment(
    scenario: SimScenario,
    repeats: int = 10,
    survey: SurveyTable | None = None,
    solver: SolverConfig = SolverConfig(),
    border_threshold: float = DEFAULT_BORDER_THRESHOLD_M,
    saturation_threshold: float | None = None,
    calibration_records: int = 3,
) -> ErrorReport:
    """Full-chain accuracy experiment over every printed control point.

    Deterministic for a fixed scenario: every acquisition's noise stream is
    keyed on (seed, position, t0), so identical runs produce identical
    reports and points may be evaluated in any order.
    """
    table = survey if survey is not None else load_survey_table()
    anchor_set = scenario.anchor_set
    adc = scenario.adc
    if saturation_threshold is None:
        saturation_threshold = 0.9 * adc.full_scale / 2
    basis = build_basis(
        [a.frequency for a in anchor_set], adc.sample_rate, adc.record_length
    )
    calibration = calibrate(
        simulate_calibration_observations(
            scenario, table, records_per_point=calibration_records
        )
    )
    from .sinefit import estimate_amplitudes

    duration = adc.record_length / adc.sample_rate
    border = classify_border_points(table, anchor_set, border_threshold)

    point_means: dict[str, float] = {}
    point_counts: dict[str, int] = {}
    failed: dict[str, int] = {}
    rows: list[TrialRow] = []

    for pid in sorted(table.control_points):
        ref3d = table.control_points[pid]
        ref2d = project_to_reference_plane(ref3d, anchor_set)
        errors = []
        for trial in range(repeats):
            t0 = trial * duration
            try:
                record = synthesize_record(scenario, ref2d, t0)
                est = estimate_amplitudes(record, basis, anchor_set.ids)
                dists = amplitudes_to_distances(est, calibration, saturation_threshold)
                fix = solve(dists, anchor_set, solver, timestamp=t0)
            except MagposError:
                failed[pid] = failed.get(pid, 0) + 1
                continue
            err = positioning_error((fix.x, fix.y), ref3d, anchor_set)
            errors.append(err)
            rows.append(
                TrialRow(pid, trial, fix.x, fix.y, ref2d[0], ref2d[1], err)
            )
        if errors:
            point_means[pid] = float(np.mean(errors))
            point_counts[pid] = len(errors)

    all_errors = [r.error_m for r in rows]
    interior_errors = sorted(r.error_m for r in rows if r.point_id not in border)
    border_errors = [r.error_m for r in rows if r.point_id in border]
    return ErrorReport(
        point_means=point_means,
        point_counts=point_counts,
        border_ids=border,
        mean_error_all=float(np.mean(all_errors)) if all_errors else math.nan,
        mean_error_interior=float(np.mean(interior_errors))
        if interior_errors
        else math.nan,
        mean_error_border=float(np.mean(border_errors)) if border_errors else math.nan,
        cdf_samples=tuple(interior_errors),
        trials=tuple(rows),
        failed_counts=failed,
        calibration=calibration,
    )


def format_errors_csv(report: ErrorReport) -> str:
    lines = ["point_id,trial,x_est,y_est,x_ref,y_ref,error_m"]
    for r in report.trials:
        lines.append(
            f"{r.point_id},{r.trial},{r.x_est:.6f},{r.y_est:.6f},"
            f"{r.x_ref:.6f},{r.y_ref:.6f},{r.error_m:.6f}"
        )
    return "\n".join(lines) + "\n"


def format_cdf_csv(report: ErrorReport) -> str:
    lines = ["error_m,probability"]
    n = len(report.cdf_samples)
    for i, err in enumerate(report.cdf_samples, start=1):
        lines.append(f"{err:.6f},{i / n:.6f}")
    return "\n".join(lines) + "\n"


def format_gdop_csv(grid: GdopGrid) -> str:
    lines = ["x_m,y_m,gdop"]
    for x, y, g in grid.rows():
        lines.append(f"{x:.3f},{y:.3f},{g:.6f}" if math.isfinite(g) else f"{x:.3f},{y:.3f},inf")
    return "\n".join(lines) + "\n"


def summarize(report: ErrorReport) -> str:
    failed_total = sum(report.failed_counts.values())
    lines = [
        f"control points evaluated: {len(report.point_means)}",
        f"border points ({len(report.border_ids)}): {', '.join(sorted(report.border_ids))}",
        f"mean error, all points:      {report.mean_error_all:.4f} m",
        f"mean error, interior points: {report.mean_error_interior:.4f} m",
        f"mean error, border points:   {report.mean_error_border:.4f} m",
        f"interior CDF at 0.25 m:      {report.cdf(0.25):.3f}",
        f"failed fixes: {failed_total}",
    ]
    return "\n".join(lines) + "\n"
