"""Real-time estimation loop: acquire, estimate, solve, stream.

Every update period the pipeline asks a position source for the true
receiver position, synthesizes one acquisition, runs the full estimation
chain and emits a PositionFix. Fixes are streamed to the position-controlled
application as newline-delimited text over a TCP socket, fire and forget:
`POS <x> <y>\\n` with exactly six fraction digits, meters.

Two activities cooperate: the acquisition loop (producer) and the stream
sender (consumer), joined by a small latest-wins channel. A slow or absent
consumer never stalls the loop; messages are dropped and counted instead.
"""

from __future__ import annotations

import collections
import math
import socket
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import ConfigError, MagposError, Point2, PositionFix
from .ranging import CalibrationResult, amplitudes_to_distances
from .simulator import SimScenario, synthesize_record
from .sinefit import build_basis, estimate_amplitudes
from .trilateration import SolverConfig, solve

PositionSource = Callable[[float], Point2]


def format_fix(fix: PositionFix) -> str:
    """Wire message for one fix: POS SP x SP y LF, six fraction digits."""
    return f"POS {fix.x:.6f} {fix.y:.6f}\n"


@dataclass(frozen=True)
class PipelineConfig:
    scenario: SimScenario
    calibration: CalibrationResult
    solver: SolverConfig = field(default_factory=SolverConfig)
    update_period: float = 0.5
    endpoint: tuple[str, int] | None = None
    send_buffer: int = 8
    saturation_threshold_rel: float = 0.9

    def __post_init__(self) -> None:
        if not 0 < self.update_period <= 1.0:
            raise ConfigError(
                "update_period must be in (0, 1.0] s; the system must update "
                "at 1 Hz or faster"
            )
        if self.send_buffer < 1:
            raise ConfigError("send_buffer must be >= 1")


class LatestWinsChannel:
    """Bounded FIFO that evicts the oldest entry when full."""

    def __init__(self, maxsize: int = 8):
        self._items: collections.deque = collections.deque()
        self._max = maxsize
        self._cond = threading.Condition()
        self.evicted = 0

    def put(self, item) -> None:
        with self._cond:
            if len(self._items) >= self._max:
                self._items.popleft()
                self.evicted += 1
            self._items.append(item)
            self._cond.notify()

    def get(self, timeout: float | None = None):
        with self._cond:
            if not self._items:
                self._cond.wait(timeout)
            if not self._items:
                return None
            return self._items.popleft()

    def __len__(self) -> int:
        with self._cond:
            return len(self._items)


class FixStreamer:
    """Fire-and-forget sender for wire messages.

    Connection management is lazy: at most one connect attempt per queued
    message, so a dead endpoint is retried at the fix cadence and a restart
    of the consumer is picked up within a couple of cycles. Failed sends
    drop the message and count it; nothing propagates to the producer.
    """

    def __init__(
        self,
        endpoint: tuple[str, int],
        buffer_size: int = 8,
        connect_timeout: float = 0.5,
        send_timeout: float = 2.0,
    ):
        self._endpoint = endpoint
        self._channel = LatestWinsChannel(buffer_size)
        self._connect_timeout = connect_timeout
        self._send_timeout = send_timeout
        self._sock: socket.socket | None = None
        self._stop = threading.Event()
        self.sent = 0
        self.send_failures = 0
        self.connect_failures = 0
        self.connections = 0
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def offer(self, message: str) -> None:
        self._channel.put(message.encode("ascii"))

    @property
    def dropped(self) -> int:
        return self._channel.evicted + self.send_failures + self.connect_failures

    def _close_socket(self) -> None:
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass
            self._sock = None

    def _run(self) -> None:
        while not self._stop.is_set():
            message = self._channel.get(timeout=0.1)
            if message is None:
                continue
            if self._sock is None:
                try:
                    self._sock = socket.create_connection(
                        self._endpoint, timeout=self._connect_timeout
                    )
                    self._sock.settimeout(self._send_timeout)
                    self.connections += 1
                except OSError:
                    self.connect_failures += 1
                    continue
            try:
                self._sock.sendall(message)
                self.sent += 1
            except OSError:
                self.send_failures += 1
                self._close_socket()

    def close(self) -> None:
        self._stop.set()
        self._thread.join(timeout=2.0)
        self._close_socket()


@dataclass
class PipelineResult:
    fixes: list[PositionFix]
    latencies: list[float]
    errors: int
    sent: int = 0
    dropped: int = 0
    connections: int = 0

    @property
    def p95_latency(self) -> float:
        if not self.latencies:
            return math.nan
        return float(np.percentile(self.latencies, 95))


def run_pipeline(
    config: PipelineConfig,
    position_source: PositionSource,
    stop: threading.Event | None = None,
    duration: float | None = None,
    on_fix: Callable[[PositionFix], None] | None = None,
) -> PipelineResult:
    """Run the acquisition loop until `stop` is set or `duration` elapses.

    Fix timestamps are seconds since loop start and strictly increase. A
    failed cycle (estimation or solve error) is counted and skipped; the
    loop never dies mid-run.
    """
    stop = stop if stop is not None else threading.Event()
    scenario = config.scenario
    anchor_set = scenario.anchor_set
    adc = scenario.adc
    basis = build_basis([a.frequency for a in anchor_set], adc.sample_rate, adc.record_length)
    saturation = config.saturation_threshold_rel * adc.full_scale / 2

    streamer = (
        FixStreamer(config.endpoint, config.send_buffer)
        if config.endpoint is not None
        else None
    )
    fixes: list[PositionFix] = []
    latencies: list[float] = []
    errors = 0

    started = time.perf_counter()
    next_tick = started
    try:
        while not stop.is_set():
            now = time.perf_counter()
            t_rel = now - started
            if duration is not None and t_rel >= duration:
                break
            position = position_source(t_rel)
            compute_start = time.perf_counter()
            try:
                record = synthesize_record(scenario, position, t0=t_rel)
                estimate = estimate_amplitudes(record, basis, anchor_set.ids)
                distances = amplitudes_to_distances(estimate, config.calibration, saturation)
                fix = solve(distances, anchor_set, config.solver, timestamp=t_rel)
            except MagposError:
                errors += 1
            else:
                latencies.append(time.perf_counter() - compute_start)
                fixes.append(fix)
                if on_fix is not None:
                    on_fix(fix)
                if streamer is not None:
                    streamer.offer(format_fix(fix))
            next_tick += config.update_period
            delay = next_tick - time.perf_counter()
            if delay > 0:
                stop.wait(delay)
            else:
                next_tick = time.perf_counter()
    finally:
        if streamer is not None:
            streamer.close()

    return PipelineResult(
        fixes=fixes,
        latencies=latencies,
        errors=errors,
        sent=streamer.sent if streamer else 0,
        dropped=streamer.dropped if streamer else 0,
        connections=streamer.connections if streamer else 0,
    )


def replay_trajectory(
    config: PipelineConfig,
    trajectory: "Trajectory",
    period: float | None = None,
) -> list[PositionFix]:
    """Offline batch run over a trajectory, no pacing and no socket.

    Timestamps come from the trajectory's own clock, so the output is fully
    deterministic for a fixed scenario seed.
    """
    period = period if period is not None else config.update_period
    scenario = config.scenario
    anchor_set = scenario.anchor_set
    adc = scenario.adc
    basis = build_basis([a.frequency for a in anchor_set], adc.sample_rate, adc.record_length)
    saturation = config.saturation_threshold_rel * adc.full_scale / 2
    fixes = []
    t = 0.0
    while t <= trajectory.duration + 1e-9:
        position = trajectory(t)
        try:
            record = synthesize_record(scenario, position, t0=t)
            estimate = estimate_amplitudes(record, basis, anchor_set.ids)
            distances = amplitudes_to_distances(estimate, config.calibration, saturation)
            fixes.append(solve(distances, anchor_set, config.solver, timestamp=t))
        except MagposError:
            pass
        t += period
    return fixes


@dataclass(frozen=True)
class Trajectory:
    """Piecewise-linear scripted path: rows (t, x, y), interpolated."""

    times: tuple[float, ...]
    xs: tuple[float, ...]
    ys: tuple[float, ...]
    loop: bool = False

    def __post_init__(self) -> None:
        if len(self.times) != len(self.xs) or len(self.times) != len(self.ys):
            raise ConfigError("trajectory rows must have equal lengths")
        if len(self.times) < 1:
            raise ConfigError("trajectory needs at least one row")
        if list(self.times) != sorted(self.times):
            raise ConfigError("trajectory timestamps must be non-decreasing")

    @property
    def duration(self) -> float:
        return self.times[-1]

    def __call__(self, t: float) -> Point2:
        if self.loop and self.duration > 0:
            t = t % self.duration
        x = float(np.interp(t, self.times, self.xs))
        y = float(np.interp(t, self.times, self.ys))
        return (x, y)


def parse_trajectory(text: str, loop: bool = False) -> Trajectory:
    """Parse rows `t_seconds x_m y_m`; '#' comments and blanks ignored."""
    times, xs, ys = [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ConfigError(f"trajectory line {lineno}: expected 't x y'")
        try:
            times.append(float(parts[0]))
            xs.append(float(parts[1]))
            ys.append(float(parts[2]))
        except ValueError as exc:
            raise ConfigError(f"trajectory line {lineno}: bad number") from exc
    return Trajectory(tuple(times), tuple(xs), tuple(ys), loop=loop)


def load_trajectory(path: str, loop: bool = False) -> Trajectory:
    with open(path, encoding="utf-8") as fh:
        return parse_trajectory(fh.read(), loop=loop)


def static_source(position: Point2) -> PositionSource:
    return lambda t: position


class SteerSubscriber:
    """Feeds steering targets from the UI bridge to a callback.

    Connects to the bridge websocket as a plain client and forwards every
    `steer` message; reconnects quietly if the bridge goes away.
    """

    def __init__(self, url: str, on_target: Callable[[float, float], None]):
        self._url = url
        self._on_target = on_target
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def start(self) -> "SteerSubscriber":
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()
        return self

    def _run(self) -> None:
        import json

        from websockets.sync.client import connect

        while not self._stop.is_set():
            try:
                with connect(self._url) as conn:
                    while not self._stop.is_set():
                        try:
                            message = json.loads(conn.recv(timeout=0.5))
                        except TimeoutError:
                            continue
                        if message.get("type") == "steer":
                            try:
                                self._on_target(float(message["x"]), float(message["y"]))
                            except (KeyError, TypeError, ValueError):
                                continue
            except Exception:
                self._stop.wait(1.0)

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)


class VirtualVisitor:
    """Steerable position source: walks toward the latest target.

    Used in live mode, where steering input arrives from the UI bridge. The
    walking speed is capped at badge-wearing-visitor pace so dwell clicking
    stays achievable; targets are clamped to the given physical bounds.
    """

    def __init__(
        self,
        start: Point2,
        bounds: tuple[float, float, float, float],
        speed: float = 1.2,
    ):
        self._lock = threading.Lock()
        self._position = np.array(start, dtype=float)
        self._target = np.array(start, dtype=float)
        self._bounds = bounds
        self._speed = speed
        self._last_t: float | None = None

    def set_target(self, x: float, y: float) -> None:
        x0, x1, y0, y1 = self._bounds
        with self._lock:
            self._target = np.array(
                [min(max(x, x0), x1), min(max(y, y0), y1)], dtype=float
            )

    def __call__(self, t: float) -> Point2:
        with self._lock:
            if self._last_t is not None and t > self._last_t:
                budget = self._speed * (t - self._last_t)
                delta = self._target - self._position
                dist = float(np.linalg.norm(delta))
                if dist <= budget:
                    self._position = self._target.copy()
                else:
                    self._position = self._position + delta * (budget / dist)
            self._last_t = t
            return (float(self._position[0]), float(self._position[1]))
