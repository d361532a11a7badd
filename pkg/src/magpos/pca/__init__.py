"""Position Controlled Application: receiver, mapping, events, apps."""

from .apps import (
    App,
    CalibrationApp,
    HomeApp,
    ManualClock,
    TargetTouchApp,
    default_apps,
    run_calibration_app,
)
from .canvas import CanvasCalibration, load_canvas_calibration, map_to_canvas
from .environment import ExecutionEnvironment, RenderState
from .events import AppEvent, ClickDetector, EventKind, generate_events
from .receiver import PositionReceiver, parse_position_line
