"""Physical-to-canvas coordinate mapping.

The application canvas is W x H pixels; the calibrated physical bounds tell
which rectangle of the floor maps onto it. The mapping is affine per axis:
x' = W / (x_max - x_min) * (x - x_min), likewise for y, rounded to the
nearest integer and clamped to [0, W] x [0, H].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..configio import format_kv, get_float, get_int, parse_kv_file
from ..core import ConfigError, Point2


@dataclass(frozen=True)
class CanvasCalibration:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    width: int
    height: int

    def __post_init__(self) -> None:
        if not self.x_max > self.x_min:
            raise ConfigError("canvas calibration requires x_max > x_min")
        if not self.y_max > self.y_min:
            raise ConfigError("canvas calibration requires y_max > y_min")
        if self.width <= 0 or self.height <= 0:
            raise ConfigError("canvas dimensions must be positive")

    def contains(self, position: Point2) -> bool:
        x, y = position
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def physical_bounds(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.x_max, self.y_min, self.y_max)


def map_to_canvas(position: Point2, cal: CanvasCalibration) -> tuple[int, int]:
    """Map physical meters to integral canvas pixels, clamped to the canvas."""
    sx = cal.width / (cal.x_max - cal.x_min)
    sy = cal.height / (cal.y_max - cal.y_min)
    # floor(v + 0.5) rounds halves up deterministically.
    px = math.floor(sx * (position[0] - cal.x_min) + 0.5)
    py = math.floor(sy * (position[1] - cal.y_min) + 0.5)
    return (min(max(px, 0), cal.width), min(max(py, 0), cal.height))


def canvas_to_text(cal: CanvasCalibration) -> str:
    return format_kv(
        {
            "x_min": str(cal.x_min),
            "x_max": str(cal.x_max),
            "y_min": str(cal.y_min),
            "y_max": str(cal.y_max),
            "width": str(cal.width),
            "height": str(cal.height),
        }
    )


def load_canvas_calibration(path: str) -> CanvasCalibration:
    kv = parse_kv_file(path)
    return CanvasCalibration(
        x_min=get_float(kv, "x_min"),
        x_max=get_float(kv, "x_max"),
        y_min=get_float(kv, "y_min"),
        y_max=get_float(kv, "y_max"),
        width=get_int(kv, "width"),
        height=get_int(kv, "height"),
    )
