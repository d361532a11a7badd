import math

import numpy as np
import pytest

from helpers import polygon_boundary_distance
from magpos import (
    Anchor,
    AnchorSet,
    DistanceEstimate,
    InsufficientAnchorsError,
    solve,
)
from magpos.defaults import default_scenario, ideal_scenario, reference_scenario
from magpos.evaluation import (
    boundary_distance,
    classify_border_points,
    format_cdf_csv,
    format_errors_csv,
    format_gdop_csv,
    gdop_at,
    gdop_map,
    positioning_error,
    run_accuracy_experiment,
    simulate_calibration_observations,
    summarize,
)


def simple_anchor(aid, x, y, freq):
    return Anchor(aid, (x, y, 1.25), freq, 0.5, 3.0)


class TestPositioningError:
    def test_zero_when_estimate_hits_projection(self, anchors, survey):
        c5 = survey.point("C5")
        assert positioning_error((1.367, 2.360), c5, anchors) == 0.0

    def test_pure_x_offset(self, anchors, survey):
        c5 = survey.point("C5")
        assert positioning_error((1.467, 2.360), c5, anchors) == pytest.approx(0.100, abs=1e-12)

    def test_pure_y_offset(self, anchors, survey):
        c5 = survey.point("C5")
        assert positioning_error((1.367, 2.460), c5, anchors) == pytest.approx(0.100, abs=1e-12)

    def test_invariant_to_reference_z(self, anchors):
        e1 = positioning_error((1.0, 1.0), (1.2, 1.0, 1.25), anchors)
        e2 = positioning_error((1.0, 1.0), (1.2, 1.0, 7.00), anchors)
        assert e1 == e2


class TestBorderClassification:
    def test_default_threshold_yields_exactly_six_points(self, survey, anchors):
        border = classify_border_points(survey, anchors, threshold=0.10)
        assert border == frozenset({"P01", "P02", "P03", "P25", "P26", "P27"})

    def test_zero_threshold_only_points_on_edges(self, survey, anchors):
        assert classify_border_points(survey, anchors, threshold=0.0) == frozenset()

    def test_huge_threshold_captures_all(self, survey, anchors):
        border = classify_border_points(survey, anchors, threshold=10.0)
        assert border == frozenset(survey.control_points)

    def test_boundary_distance_matches_independent_oracle(self, survey, anchors):
        quad = [a.xy for a in anchors]
        for pid, xyz in survey.control_points.items():
            p = xyz[:2]
            assert boundary_distance(p, anchors) == pytest.approx(
                polygon_boundary_distance(p, quad), abs=1e-12
            ), pid


class TestGdop:
    def test_square_layout_center_matches_monte_carlo_amplification(self):
        square = AnchorSet(
            (
                simple_anchor("A", 0.0, 0.0, 1e4),
                simple_anchor("B", 2.0, 0.0, 2e4),
                simple_anchor("C", 2.0, 2.0, 3e4),
                simple_anchor("D", 0.0, 2.0, 4e4),
            )
        )
        center = (1.0, 1.0)
        analytic = gdop_at(center, square)
        assert analytic == pytest.approx(1.0, abs=1e-12)  # exact for a square

        # Monte-Carlo oracle: perturb exact ranges by eps and measure the
        # RMS position error per unit range error.
        rng = np.random.default_rng(99)
        eps = 1e-4
        true_d = np.array(
            [math.hypot(center[0] - a.position[0], center[1] - a.position[1]) for a in square]
        )
        errs = []
        for _ in range(1500):
            noisy = true_d + eps * rng.standard_normal(4)
            fix = solve(
                DistanceEstimate(dict(zip(square.ids, noisy))), square, initial=center
            )
            errs.append((fix.x - center[0]) ** 2 + (fix.y - center[1]) ** 2)
        mc = math.sqrt(np.mean(errs)) / eps
        assert mc == pytest.approx(analytic, rel=0.10)

    def test_deployment_geometry_flat_gdop_verified_by_monte_carlo(self, anchors):
        # On the surveyed rectangle the range GDOP is remarkably flat: the
        # edge midpoints score slightly BELOW the centroid (both ~1.0-1.2).
        # Frozen values confirmed by the Monte-Carlo amplification oracle.
        pts = anchors.positions_xy()
        centroid = tuple(pts.mean(axis=0))
        ab_mid = tuple((pts[0] + pts[1]) / 2)
        g_centroid = gdop_at(centroid, anchors)
        g_edge = gdop_at(ab_mid, anchors)
        assert g_centroid == pytest.approx(1.1589, abs=2e-3)
        assert g_edge == pytest.approx(1.0029, abs=2e-3)
        assert g_edge < g_centroid

        rng = np.random.default_rng(7)
        eps = 1e-4
        for point, analytic in ((centroid, g_centroid), (ab_mid, g_edge)):
            true_d = np.array(
                [math.hypot(point[0] - a.position[0], point[1] - a.position[1]) for a in anchors]
            )
            errs = []
            for _ in range(1500):
                noisy = true_d + eps * rng.standard_normal(4)
                fix = solve(
                    DistanceEstimate(dict(zip(anchors.ids, noisy))), anchors, initial=point
                )
                errs.append((fix.x - point[0]) ** 2 + (fix.y - point[1]) ** 2)
            mc = math.sqrt(np.mean(errs)) / eps
            assert mc == pytest.approx(analytic, rel=0.10)

    def test_two_anchors_rejected(self):
        pair = AnchorSet(
            (simple_anchor("A", 0.0, 0.0, 1e4), simple_anchor("B", 2.0, 0.0, 2e4))
        )
        with pytest.raises(InsufficientAnchorsError):
            gdop_at((1.0, 1.0), pair)
        with pytest.raises(InsufficientAnchorsError):
            gdop_map(pair)

    def test_map_covers_bounding_box(self, anchors):
        grid = gdop_map(anchors, grid_resolution=0.5)
        assert grid.values.shape == (len(grid.ys), len(grid.xs))
        assert np.all(grid.values > 0)
        # Nodes coinciding with an anchor are singular; everything else is finite.
        finite = np.isfinite(grid.values)
        assert finite.sum() >= grid.values.size - len(anchors)
        assert finite[2, 2]

    def test_map_marks_anchor_nodes_infinite(self):
        square = AnchorSet(
            (
                simple_anchor("A", 0.0, 0.0, 1e4),
                simple_anchor("B", 1.0, 0.0, 2e4),
                simple_anchor("C", 1.0, 1.0, 3e4),
            )
        )
        grid = gdop_map(square, grid_resolution=1.0)
        assert math.isinf(grid.values[0, 0])  # node exactly on anchor A


class TestAccuracyExperiment:
    def test_exact_chain_recovers_every_control_point(self):
        report = run_accuracy_experiment(ideal_scenario(), repeats=2)
        assert report.mean_error_all < 1e-3
        assert len(report.point_means) == 26
        assert not report.failed_counts

    def test_reference_preset_reproduces_error_structure(self):
        report = run_accuracy_experiment(reference_scenario(), repeats=10)
        assert 0.08 <= report.mean_error_interior <= 0.16
        assert report.cdf(0.25) >= 0.85
        assert report.mean_error_border > report.mean_error_interior
        assert report.mean_error_interior <= report.mean_error_all

    def test_deterministic_under_fixed_seed(self):
        a = run_accuracy_experiment(reference_scenario(), repeats=3)
        b = run_accuracy_experiment(reference_scenario(), repeats=3)
        assert a == b

    def test_cdf_is_nondecreasing_and_ends_at_one(self):
        report = run_accuracy_experiment(reference_scenario(), repeats=3)
        assert list(report.cdf_samples) == sorted(report.cdf_samples)
        assert report.cdf(report.cdf_samples[-1]) == 1.0
        assert report.cdf(0.0) <= report.cdf(1.0)

    def test_calibration_observations_cover_all_anchors(self):
        obs = simulate_calibration_observations(ideal_scenario())
        assert {o.anchor_id for o in obs} == {"A", "B", "C", "D"}
        assert len(obs) == 20  # 5 points x 4 anchors

    def test_report_row_schema(self):
        report = run_accuracy_experiment(ideal_scenario(), repeats=1)
        text = format_errors_csv(report)
        header, first = text.splitlines()[:2]
        assert header == "point_id,trial,x_est,y_est,x_ref,y_ref,error_m"
        assert first.startswith("P01,0,")

    def test_cdf_csv_schema(self):
        report = run_accuracy_experiment(ideal_scenario(), repeats=1)
        lines = format_cdf_csv(report).splitlines()
        assert lines[0] == "error_m,probability"
        assert lines[-1].endswith("1.000000")

    def test_gdop_csv_schema(self, anchors):
        lines = format_gdop_csv(gdop_map(anchors, grid_resolution=1.0)).splitlines()
        assert lines[0] == "x_m,y_m,gdop"

    def test_summary_mentions_border_points(self):
        report = run_accuracy_experiment(ideal_scenario(), repeats=1)
        assert "P01" in summarize(report)
