"""The app framework and the built-in apps.

An app is a named event handler: it receives AppEvents from the execution
environment and returns a JSON-serializable payload describing what to draw.
Apps request a switch with env.switch_to(); the environment applies it after
the handler returns. Three apps ship by default: the Home screen (tile
selector), the area calibration utility, and a small dwell-to-score game
that exercises the click contract end to end.
"""

from __future__ import annotations

import collections
import math
import threading
import time
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from ..core import ConfigError, Point2
from .canvas import CanvasCalibration
from .events import AppEvent, EventKind

Payload = dict[str, Any]


class App:
    """Base class: concrete apps override enter() and handle()."""

    id: str = ""
    name: str = ""

    def enter(self, env) -> Payload:
        return {}

    def handle(self, event: AppEvent, env) -> Payload:
        return {}


class ManualClock:
    """Settable clock for scripted replays and tests."""

    def __init__(self, t: float = 0.0):
        self.t = t

    def __call__(self) -> float:
        return self.t


def _hit(rect: Sequence[int], pos: tuple[int, int]) -> bool:
    x0, y0, w, h = rect
    return x0 <= pos[0] <= x0 + w and y0 <= pos[1] <= y0 + h


class HomeApp(App):
    """App selection screen: one tile per registered app, dwell to launch."""

    id = "home"
    name = "Home"

    def __init__(self):
        self._hover: str | None = None

    def _tiles(self, env) -> list[dict]:
        apps = [(aid, name) for aid, name in env.app_list() if aid != self.id]
        if not apps:
            return []
        w, h = env.calibration.width, env.calibration.height
        cols = min(len(apps), 3)
        rows = math.ceil(len(apps) / cols)
        margin_x, margin_y = w // 10, h // 10
        cell_w = (w - 2 * margin_x) // cols
        cell_h = (h - 2 * margin_y) // rows
        tiles = []
        for i, (aid, name) in enumerate(apps):
            col, row = i % cols, i // cols
            rect = [
                margin_x + col * cell_w + cell_w // 10,
                margin_y + row * cell_h + cell_h // 10,
                cell_w * 8 // 10,
                cell_h * 8 // 10,
            ]
            tiles.append({"app": aid, "name": name, "rect": rect})
        return tiles

    def _payload(self, env) -> Payload:
        tiles = self._tiles(env)
        for tile in tiles:
            tile["hover"] = tile["app"] == self._hover
        return {"tiles": tiles}

    def enter(self, env) -> Payload:
        self._hover = None
        return self._payload(env)

    def handle(self, event: AppEvent, env) -> Payload:
        hit = next(
            (t["app"] for t in self._tiles(env) if _hit(t["rect"], event.canvas_position)),
            None,
        )
        if event.kind is EventKind.USER_MOVED:
            self._hover = hit
        elif event.kind is EventKind.USER_CLICKED and hit is not None:
            env.switch_to(hit)
        return self._payload(env)


class CalibrationApp(App):
    """Guided bounds recording: visit the four sides of the area in turn.

    For each side the app collects the physical positions received during a
    fixed window and keeps the extremal coordinate (min x on the left side,
    max x on the right, min y at the bottom, max y at the top). A window
    closes on the first update past its end. If an axis comes out degenerate
    (min >= max) its two sides are queued again. On success the resulting
    bounds are installed in the environment and control returns to Home.
    """

    id = "calibrate"
    name = "Calibrate area"

    SIDES = ("left", "right", "bottom", "top")
    PROMPTS = {
        "left": "walk to the LEFT side of the area and stay there",
        "right": "walk to the RIGHT side of the area and stay there",
        "bottom": "walk to the NEAR (bottom) side of the area and stay there",
        "top": "walk to the FAR (top) side of the area and stay there",
    }

    def __init__(self, window_seconds: float = 3.0):
        if window_seconds <= 0:
            raise ConfigError("window_seconds must be positive")
        self.window_seconds = window_seconds
        self.prompt_sink: Callable[[str], None] | None = None
        self.result: CanvasCalibration | None = None
        self.rejections = 0
        self._completed = threading.Event()
        self._reset()

    def _reset(self) -> None:
        self._queue = collections.deque(range(4))
        self._samples: dict[int, list[Point2]] = {i: [] for i in range(4)}
        self._window_start: float | None = None
        self._prompted = False
        self.result = None
        self._completed.clear()

    def _prompt(self, text: str) -> None:
        if self.prompt_sink is not None:
            self.prompt_sink(text)

    def enter(self, env) -> Payload:
        self._reset()
        return self._payload(env)

    def _payload(self, env) -> Payload:
        stage = self.SIDES[self._queue[0]] if self._queue else "done"
        return {
            "stage": stage,
            "sides_remaining": len(self._queue),
            "prompt": self.PROMPTS.get(stage, "calibration complete"),
            "rejections": self.rejections,
        }

    def handle(self, event: AppEvent, env) -> Payload:
        if event.kind is not EventKind.USER_MOVED or not self._queue:
            return self._payload(env)
        position = env.latest_physical
        if position is None:
            return self._payload(env)
        side = self._queue[0]
        if not self._prompted:
            self._prompt(self.PROMPTS[self.SIDES[side]])
            self._prompted = True
        now = env.now()
        if self._window_start is None:
            self._window_start = now
        if now - self._window_start <= self.window_seconds:
            self._samples[side].append(position)
        else:
            self._queue.popleft()
            self._window_start = None
            self._prompted = False
            if self._queue:
                next_side = self._queue[0]
                self._samples[next_side] = []
                self._prompt(self.PROMPTS[self.SIDES[next_side]])
                self._prompted = True
                self._window_start = now
                self._samples[next_side].append(position)
            else:
                self._finalize(env)
        return self._payload(env)

    def _finalize(self, env) -> None:
        x_min = min(p[0] for p in self._samples[0])
        x_max = max(p[0] for p in self._samples[1])
        y_min = min(p[1] for p in self._samples[2])
        y_max = max(p[1] for p in self._samples[3])
        bad: list[int] = []
        if not x_min < x_max:
            bad.extend([0, 1])
        if not y_min < y_max:
            bad.extend([2, 3])
        if bad:
            self.rejections += 1
            for side in bad:
                self._samples[side] = []
            self._queue.extend(bad)
            self._prompt(self.PROMPTS[self.SIDES[self._queue[0]]])
            self._prompted = True
            return
        self.result = CanvasCalibration(
            x_min=x_min,
            x_max=x_max,
            y_min=y_min,
            y_max=y_max,
            width=env.calibration.width,
            height=env.calibration.height,
        )
        env.set_calibration(self.result)
        env.switch_to("home")
        self._completed.set()

    def wait(self, timeout: float | None = None) -> bool:
        return self._completed.wait(timeout)


class TargetTouchApp(App):
    """Demo game: walk onto the highlighted target and dwell to score."""

    id = "target-touch"
    name = "Target touch"

    def __init__(self, seed: int = 1, radius_px: int = 60):
        self._rng = np.random.default_rng(seed)
        self._radius = radius_px
        self._target: tuple[int, int] | None = None
        self.score = 0

    def _next_target(self, env) -> tuple[int, int]:
        w, h = env.calibration.width, env.calibration.height
        margin = self._radius + 10
        return (
            int(self._rng.integers(margin, max(w - margin, margin + 1))),
            int(self._rng.integers(margin, max(h - margin, margin + 1))),
        )

    def _payload(self) -> Payload:
        return {
            "target": list(self._target) if self._target else None,
            "radius": self._radius,
            "score": self.score,
        }

    def enter(self, env) -> Payload:
        if self._target is None:
            self._target = self._next_target(env)
        return self._payload()

    def handle(self, event: AppEvent, env) -> Payload:
        if event.kind is EventKind.USER_CLICKED and self._target is not None:
            dx = event.canvas_position[0] - self._target[0]
            dy = event.canvas_position[1] - self._target[1]
            if math.hypot(dx, dy) <= self._radius:
                self.score += 1
                self._target = self._next_target(env)
        return self._payload()


def default_apps() -> tuple[App, ...]:
    return (HomeApp(), CalibrationApp(), TargetTouchApp())


def run_calibration_app(
    env,
    prompt_sink: Callable[[str], None],
    timed_positions: Iterable[tuple[float, float, float]] | None = None,
    timeout: float | None = None,
) -> CanvasCalibration | None:
    """Run the calibration procedure to completion.

    With `timed_positions` (rows of t, x, y) the feed is replayed through a
    manual clock, which must be the environment's clock; without it the call
    blocks until live positions complete the procedure or `timeout` expires.
    Returns None if the procedure did not complete (e.g. degenerate feed).
    """
    app = env.app("calibrate")
    app.prompt_sink = prompt_sink
    env.activate("calibrate")
    if timed_positions is None:
        app.wait(timeout)
        return app.result
    clock = env.clock
    if not isinstance(clock, ManualClock):
        raise ConfigError("scripted calibration requires the env to use a ManualClock")
    for t, x, y in timed_positions:
        clock.t = t
        env.step_physical(x, y)
        if app.result is not None:
            break
    return app.result
