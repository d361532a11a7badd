"""The execution environment: one current app, mapped events, eviction.

Physical positions come in, canvas events go out to exactly one app at a
time. A handler that raises gets its app evicted back to Home; an exhibition
floor must survive a buggy game. All stepping happens on a single logical
thread; render states are immutable snapshots safe to hand to other threads.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence

from ..core import ConfigError, Point2
from .apps import App, Payload
from .canvas import CanvasCalibration, map_to_canvas
from .events import AppEvent, ClickDetector, EventKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RenderState:
    """Immutable snapshot of what the current app wants on screen."""

    app_id: str
    cursor: tuple[int, int]
    dwell: float
    sequence: int
    payload: Mapping[str, Any]


class ExecutionEnvironment:
    def __init__(
        self,
        apps: Sequence[App],
        calibration: CanvasCalibration,
        click_count: int = 5,
        home_id: str = "home",
        clock: Callable[[], float] = time.monotonic,
    ):
        if not apps:
            raise ConfigError("the app registry must not be empty")
        self._registry: dict[str, App] = {}
        for app in apps:
            if app.id in self._registry:
                raise ConfigError(f"duplicate app id {app.id!r}")
            self._registry[app.id] = app
        if home_id not in self._registry:
            raise ConfigError("the registry must contain the Home app")
        self._home_id = home_id
        self._current_id = home_id
        self._pending_switch: str | None = None
        self._detector = ClickDetector(click_count)
        self.calibration = calibration
        self.clock = clock
        self.latest_physical: Point2 | None = None
        self.last_clamped = False
        self.clamp_count = 0
        self.eviction_count = 0
        self.last_payload: Payload = self._registry[home_id].enter(self)

    # -- registry -----------------------------------------------------------

    @property
    def current_app(self) -> App:
        return self._registry[self._current_id]

    def app(self, app_id: str) -> App:
        return self._registry[app_id]

    def app_list(self) -> list[tuple[str, str]]:
        return [(a.id, a.name) for a in self._registry.values()]

    def now(self) -> float:
        return self.clock()

    # -- control ------------------------------------------------------------

    def switch_to(self, app_id: str) -> None:
        """Request an app switch; applied after the current handler returns."""
        if app_id not in self._registry:
            raise KeyError(app_id)
        self._pending_switch = app_id

    def activate(self, app_id: str) -> RenderState:
        """Immediate switch, for operator control (not from inside handlers)."""
        if app_id not in self._registry:
            raise KeyError(app_id)
        self._current_id = app_id
        self._pending_switch = None
        self.last_payload = self.current_app.enter(self)
        return RenderState(
            app_id=self._current_id,
            cursor=(0, 0),
            dwell=0.0,
            sequence=self._detector._seq,
            payload=self.last_payload,
        )

    def set_calibration(self, calibration: CanvasCalibration) -> None:
        self.calibration = calibration

    # -- stepping -----------------------------------------------------------

    def step_physical(self, x: float, y: float) -> list[RenderState]:
        """Feed one received physical position; returns a state per event."""
        self.latest_physical = (x, y)
        self.last_clamped = not self.calibration.contains((x, y))
        if self.last_clamped:
            self.clamp_count += 1
        pixel = map_to_canvas((x, y), self.calibration)
        return [self.step_event(event) for event in self._detector.feed(pixel)]

    def step_event(self, event: AppEvent) -> RenderState:
        """Deliver one event to the current app; apply switches and evictions."""
        app = self.current_app
        try:
            payload = app.handle(event, self)
        except Exception:
            logger.exception("app %r failed; evicting to home", app.id)
            self.eviction_count += 1
            self._pending_switch = None
            self._current_id = self._home_id
            payload = self.current_app.enter(self)
        else:
            if self._pending_switch is not None and self._pending_switch != self._current_id:
                self._current_id = self._pending_switch
                payload = self.current_app.enter(self)
            self._pending_switch = None
        self.last_payload = payload
        dwell = 1.0 if event.kind is EventKind.USER_CLICKED else self._detector.dwell_progress
        return RenderState(
            app_id=self._current_id,
            cursor=event.canvas_position,
            dwell=dwell,
            sequence=event.sequence_number,
            payload=payload,
        )
