"""Independent oracles and small utilities shared by the test suite.

Geometry and search code here is deliberately written from scratch (plain
loops, no reuse of package internals) so it can serve as an independent
check of the production implementations.
"""

from __future__ import annotations

import math
import time

import numpy as np


def point_segment_distance(p, a, b) -> float:
    """Distance from point p to the segment a-b, all 2-D tuples."""
    px, py = p
    ax, ay = a
    bx, by = b
    vx, vy = bx - ax, by - ay
    seg_len_sq = vx * vx + vy * vy
    if seg_len_sq == 0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * vx + (py - ay) * vy) / seg_len_sq
    t = max(0.0, min(1.0, t))
    cx, cy = ax + t * vx, ay + t * vy
    return math.hypot(px - cx, py - cy)


def polygon_boundary_distance(p, vertices) -> float:
    """Distance from p to the boundary of the polygon given by `vertices`."""
    n = len(vertices)
    return min(
        point_segment_distance(p, vertices[i], vertices[(i + 1) % n]) for i in range(n)
    )


def point_in_convex_polygon(p, vertices) -> bool:
    """True if p lies inside or on a convex polygon (counterclockwise order)."""
    n = len(vertices)
    for i in range(n):
        ax, ay = vertices[i]
        bx, by = vertices[(i + 1) % n]
        cross = (bx - ax) * (p[1] - ay) - (by - ay) * (p[0] - ax)
        if cross < -1e-12:
            return False
    return True


def grid_search_min(anchor_xy, measured, bounds, resolution=0.001, chunk=128):
    """Brute-force argmin of the range least-squares cost over a grid.

    anchor_xy: (N, 2) array; measured: (N,) ranges; bounds: (x0, x1, y0, y1).
    Returns (x, y, cost) of the best grid node. Row-chunked to bound memory.
    """
    x0, x1, y0, y1 = bounds
    xs = np.arange(x0, x1 + resolution / 2, resolution)
    ys = np.arange(y0, y1 + resolution / 2, resolution)
    best_cost = np.inf
    best_xy = (np.nan, np.nan)
    for start in range(0, len(ys), chunk):
        yblock = ys[start : start + chunk]
        gx, gy = np.meshgrid(xs, yblock)
        cost = np.zeros_like(gx)
        for (ax, ay), d in zip(anchor_xy, measured):
            cost += (d - np.hypot(gx - ax, gy - ay)) ** 2
        idx = np.unravel_index(np.argmin(cost), cost.shape)
        if cost[idx] < best_cost:
            best_cost = float(cost[idx])
            best_xy = (float(gx[idx]), float(gy[idx]))
    return best_xy[0], best_xy[1], best_cost


def wait_until(predicate, timeout=5.0, interval=0.01) -> bool:
    """Poll until predicate() is true or the timeout elapses."""
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        if predicate():
            return True
        time.sleep(interval)
    return predicate()


class LineServer:
    """Minimal TCP server collecting newline-delimited messages.

    Records (arrival_time, line) tuples; supports stop/restart on the same
    port to emulate a consumer crashing mid-run.
    """

    def __init__(self, host="127.0.0.1", port=0):
        import socket
        import threading

        self._socket_mod = socket
        self._threading = threading
        self.host = host
        self.port = port
        self.lines: list[tuple[float, str]] = []
        self._server = None
        self._stop = threading.Event()
        self._threads: list = []

    def start(self):
        sock = self._socket_mod.socket()
        sock.setsockopt(self._socket_mod.SOL_SOCKET, self._socket_mod.SO_REUSEADDR, 1)
        sock.bind((self.host, self.port))
        sock.listen(4)
        sock.settimeout(0.1)
        self.port = sock.getsockname()[1]
        self._server = sock
        self._stop.clear()
        t = self._threading.Thread(target=self._accept_loop, args=(sock,), daemon=True)
        t.start()
        self._threads.append(t)
        return self

    def _accept_loop(self, server):
        conns = []
        while not self._stop.is_set():
            try:
                conn, _ = server.accept()
            except OSError:
                continue
            conn.settimeout(0.1)
            conns.append(conn)
            t = self._threading.Thread(target=self._read_loop, args=(conn,), daemon=True)
            t.start()
            self._threads.append(t)
        for conn in conns:
            try:
                conn.close()
            except OSError:
                pass
        server.close()

    def _read_loop(self, conn):
        buffer = b""
        while not self._stop.is_set():
            try:
                data = conn.recv(4096)
            except TimeoutError:
                continue
            except OSError:
                break
            if not data:
                break
            buffer += data
            while b"\n" in buffer:
                line, buffer = buffer.split(b"\n", 1)
                self.lines.append((time.monotonic(), line.decode("ascii", "replace")))

    def stop(self):
        self._stop.set()
        for t in self._threads:
            t.join(timeout=1.0)
        self._threads.clear()
