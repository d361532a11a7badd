"""Wiring: receiver -> event queue -> execution environment -> UI bridge.

The receiver thread enqueues raw positions; a single environment thread
consumes the queue in order, steps the apps, and broadcasts render-state
snapshots. Steering from the bridge is not consumed here (the position
pipeline owns the virtual visitor); app selection is.
"""

from __future__ import annotations

import queue
import threading
from typing import Sequence

from ..core import AnchorSet
from .apps import App, default_apps
from .bridge import UiBridge
from .canvas import CanvasCalibration
from .environment import ExecutionEnvironment, RenderState
from .receiver import PositionReceiver


class PCAService:
    def __init__(
        self,
        calibration: CanvasCalibration,
        listen: tuple[str, int] = ("127.0.0.1", 5005),
        bridge: tuple[str, int] | None = ("127.0.0.1", 5006),
        apps: Sequence[App] | None = None,
        click_count: int = 5,
        anchor_set: AnchorSet | None = None,
        heartbeat_period: float = 1.0,
    ):
        self.env = ExecutionEnvironment(
            apps if apps is not None else default_apps(), calibration, click_count
        )
        self.receiver = PositionReceiver(*listen)
        self.receiver.subscribe(self._on_position)
        self.bridge = UiBridge(*bridge) if bridge is not None else None
        if self.bridge is not None:
            self.bridge.on_select.append(self._on_select)
            self.bridge.hello_provider = lambda: self._last_message
        self._anchor_set = anchor_set
        self._heartbeat = heartbeat_period
        self._queue: queue.Queue = queue.Queue()
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        self._last_message: dict | None = None

    # -- queue producers ------------------------------------------------------

    def _on_position(self, x: float, y: float) -> None:
        self._queue.put(("position", x, y))

    def _on_select(self, app_id: str) -> None:
        self._queue.put(("select", app_id))

    # -- lifecycle --------------------------------------------------------------

    def start(self) -> "PCAService":
        self.receiver.start()
        if self.bridge is not None:
            self.bridge.start()
        self._stop.clear()
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()
        return self

    def _run(self) -> None:
        while not self._stop.is_set():
            try:
                item = self._queue.get(timeout=self._heartbeat)
            except queue.Empty:
                self._publish_heartbeat()
                continue
            if item[0] == "position":
                states = self.env.step_physical(item[1], item[2])
                if states:
                    self._publish(states[-1])
            elif item[0] == "select":
                try:
                    state = self.env.activate(item[1])
                except KeyError:
                    continue
                self._publish(state)

    def _state_message(self, state: RenderState) -> dict:
        cal = self.env.calibration
        message = {
            "type": "state",
            "app": state.app_id,
            "cursor": list(state.cursor),
            "dwell": state.dwell,
            "seq": state.sequence,
            "canvas": {"width": cal.width, "height": cal.height},
            "bounds": {
                "x_min": cal.x_min,
                "x_max": cal.x_max,
                "y_min": cal.y_min,
                "y_max": cal.y_max,
            },
            "physical": list(self.env.latest_physical or (0.0, 0.0)),
            "clamped": self.env.last_clamped,
            "apps": [{"id": aid, "name": name} for aid, name in self.env.app_list()],
            "payload": dict(state.payload),
        }
        if self._anchor_set is not None:
            message["anchors"] = [list(a.xy) for a in self._anchor_set]
        return message

    def _publish(self, state: RenderState) -> None:
        self._last_message = self._state_message(state)
        if self.bridge is not None:
            self.bridge.broadcast(self._last_message)

    def _publish_heartbeat(self) -> None:
        if self.bridge is not None and self._last_message is not None:
            self.bridge.broadcast(self._last_message)

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
        self.receiver.stop()
        if self.bridge is not None:
            self.bridge.stop()
