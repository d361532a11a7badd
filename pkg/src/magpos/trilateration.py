"""2-D position from per-anchor ranges by nonlinear least squares.

Minimizes sum_i (d_i - ||x - a_i||)^2 over the anchors with usable ranges.
The solver is damped Gauss-Newton with Levenberg-style adaptive damping:
plain Gauss-Newton turns fragile when the receiver sits close to an anchor
or outside the hull, exactly where the exhibition floor gets interesting.
Initialization comes from the linearized multilateration system (differences
of squared range equations), falling back to the anchor centroid when that
system is ill conditioned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    AnchorSet,
    ConfigError,
    DistanceEstimate,
    GeometryError,
    InsufficientAnchorsError,
    Point2,
    PositionFix,
)

# Singular-value ratio below which the anchors used in a fix are treated as
# collinear, and condition bound above which the linear initializer is
# abandoned for the centroid.
_COLLINEARITY_RTOL = 1e-9
_INIT_MAX_CONDITION = 1e8


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 50
    step_tolerance: float = 1e-6
    cost_tolerance: float = 1e-12
    damping_initial: float = 1e-3

    def __post_init__(self) -> None:
        if (
            self.max_iterations <= 0
            or self.step_tolerance <= 0
            or self.cost_tolerance <= 0
            or self.damping_initial <= 0
        ):
            raise ConfigError("all solver parameters must be positive")


def objective(
    position: Point2, distances: DistanceEstimate, anchor_set: AnchorSet
) -> float:
    """Sum of squared range residuals at `position`, in meters squared."""
    px, py = float(position[0]), float(position[1])
    total = 0.0
    used = 0
    for anchor in anchor_set:
        d = distances.per_anchor.get(anchor.id)
        if d is None:
            continue
        geo = math.hypot(px - anchor.position[0], py - anchor.position[1])
        total += (d - geo) ** 2
        used += 1
    if used == 0:
        raise InsufficientAnchorsError("no anchor with a valid distance")
    return total


def jacobian(position: Point2, anchor_set: AnchorSet) -> np.ndarray:
    """Gradient rows of the geometric ranges: row i = (x - a_i) / ||x - a_i||.

    Each row is a unit vector; the same matrix feeds both the solver and the
    dilution-of-precision computation.
    """
    pts = anchor_set.positions_xy()
    diff = np.asarray(position, dtype=float) - pts
    norms = np.linalg.norm(diff, axis=1)
    if np.any(norms < 1e-12):
        bad = anchor_set.anchors[int(np.argmin(norms))].id
        raise GeometryError(f"position coincides with anchor {bad}")
    return diff / norms[:, None]


def _anchors_collinear(pts: np.ndarray) -> bool:
    centered = pts - pts.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    scale = max(s[0], 1.0)
    return s[-1] <= _COLLINEARITY_RTOL * scale


def linear_initial_guess(pts: np.ndarray, dists: np.ndarray) -> np.ndarray | None:
    """Closed-form start point from differenced squared range equations.

    Subtracting the first anchor's equation from the others eliminates the
    quadratic term: 2 (a_i - a_0)^T x = d_0^2 - d_i^2 + ||a_i||^2 - ||a_0||^2.
    Returns None when the linear system is too ill conditioned to trust.
    """
    a0 = pts[0]
    d0 = dists[0]
    lhs = 2.0 * (pts[1:] - a0)
    rhs = (
        d0**2
        - dists[1:] ** 2
        + np.sum(pts[1:] ** 2, axis=1)
        - float(np.sum(a0**2))
    )
    s = np.linalg.svd(lhs, compute_uv=False)
    if s[-1] <= 0 or s[0] / s[-1] > _INIT_MAX_CONDITION:
        return None
    guess, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    return guess


def solve(
    distances: DistanceEstimate,
    anchor_set: AnchorSet,
    config: SolverConfig = SolverConfig(),
    initial: Point2 | None = None,
    timestamp: float = 0.0,
) -> PositionFix:
    """Solve the range least-squares problem for a 2-D fix.

    Accepted iterates never increase the objective, so the returned fix
    always costs at most the start point. converged=False is returned (not
    raised) when the iteration cap runs out first.
    """
    ids = [a.id for a in anchor_set if a.id in distances.per_anchor]
    if len(ids) < 3:
        raise InsufficientAnchorsError(
            f"2-D trilateration needs >= 3 usable anchors, got {len(ids)}"
        )
    pts = np.array([anchor_set.by_id(aid).xy for aid in ids])
    meas = np.array([distances.per_anchor[aid] for aid in ids])
    if _anchors_collinear(pts):
        raise GeometryError("anchors with usable ranges are collinear")

    if initial is not None:
        x = np.asarray(initial, dtype=float)
    else:
        guess = linear_initial_guess(pts, meas)
        x = guess if guess is not None else pts.mean(axis=0)

    def cost_at(p: np.ndarray) -> float:
        return float(np.sum((meas - np.linalg.norm(p - pts, axis=1)) ** 2))

    cost = cost_at(x)
    lam = config.damping_initial
    converged = False
    iterations = 0

    for _ in range(config.max_iterations):
        iterations += 1
        diff = x - pts
        norms = np.linalg.norm(diff, axis=1)
        if np.any(norms < 1e-12):
            # Measure-zero event: an iterate landed exactly on an anchor.
            x = x + 1e-9
            diff = x - pts
            norms = np.linalg.norm(diff, axis=1)
        jac = diff / norms[:, None]
        resid = meas - norms
        grad = jac.T @ resid
        hess = jac.T @ jac

        accepted = False
        while lam <= 1e12:
            try:
                step = np.linalg.solve(hess + lam * np.eye(2), grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            new_cost = cost_at(x + step)
            if new_cost <= cost:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            # No descent direction improves the cost: stationary to noise.
            converged = True
            break

        step_norm = float(np.linalg.norm(step))
        decrease = cost - new_cost
        x = x + step
        cost = new_cost
        lam = max(lam / 4.0, 1e-12)
        if step_norm < config.step_tolerance or decrease < config.cost_tolerance:
            converged = True
            break

    return PositionFix(
        x=float(x[0]),
        y=float(x[1]),
        timestamp=timestamp,
        iterations=iterations,
        final_cost=cost,
        converged=converged,
    )
