"""Position Receiver: the socket server feeding the execution environment.

Listens for the positioning pipeline's newline-delimited `POS x y` messages.
One client at a time; a new connection preempts the old one (the deployment
has a single mobile node). Receipt follows the observer pattern: the latest
position is stored, then every subscriber is notified in order.
"""

from __future__ import annotations

import re
import socket
import threading
from typing import Callable

from ..core import ConfigError, Point2

# Liberal on the wire: any plain decimal is accepted, producers are strict.
_LINE_RE = re.compile(r"^POS\s+(-?\d+(?:\.\d+)?)\s+(-?\d+(?:\.\d+)?)\s*$")


def parse_position_line(line: str) -> Point2 | None:
    """(x, y) for a valid wire line, None for a malformed one."""
    match = _LINE_RE.match(line)
    if match is None:
        return None
    return (float(match.group(1)), float(match.group(2)))


class PositionReceiver:
    def __init__(self, host: str = "127.0.0.1", port: int = 5005):
        self.host = host
        self.port = port
        self.latest: Point2 | None = None
        self.received = 0
        self.malformed = 0
        self.connections = 0
        self._observers: list[Callable[[float, float], None]] = []
        self._stop = threading.Event()
        self._server: socket.socket | None = None
        self._conn: socket.socket | None = None
        self._conn_lock = threading.Lock()
        self._threads: list[threading.Thread] = []

    def subscribe(self, callback: Callable[[float, float], None]) -> None:
        self._observers.append(callback)

    def start(self) -> "PositionReceiver":
        server = socket.socket()
        server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            server.bind((self.host, self.port))
        except OSError as exc:
            raise ConfigError(f"cannot bind {self.host}:{self.port}: {exc}") from exc
        server.listen(2)
        server.settimeout(0.2)
        self.port = server.getsockname()[1]
        self._server = server
        self._stop.clear()
        thread = threading.Thread(target=self._accept_loop, daemon=True)
        thread.start()
        self._threads.append(thread)
        return self

    def _accept_loop(self) -> None:
        assert self._server is not None
        while not self._stop.is_set():
            try:
                conn, _ = self._server.accept()
            except TimeoutError:
                continue
            except OSError:
                break
            conn.settimeout(0.2)
            with self._conn_lock:
                if self._conn is not None:
                    # Single mobile node: the newcomer preempts.
                    try:
                        self._conn.close()
                    except OSError:
                        pass
                self._conn = conn
                self.connections += 1
            reader = threading.Thread(target=self._read_loop, args=(conn,), daemon=True)
            reader.start()
            self._threads.append(reader)
        self._server.close()

    def _read_loop(self, conn: socket.socket) -> None:
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
                raw, buffer = buffer.split(b"\n", 1)
                self._handle_line(raw.decode("ascii", "replace"))
        try:
            conn.close()
        except OSError:
            pass

    def _handle_line(self, line: str) -> None:
        position = parse_position_line(line)
        if position is None:
            self.malformed += 1
            return
        self.received += 1
        self.latest = position  # state change first, then notification
        for observer in self._observers:
            observer(position[0], position[1])

    def stop(self) -> None:
        self._stop.set()
        with self._conn_lock:
            if self._conn is not None:
                try:
                    self._conn.close()
                except OSError:
                    pass
                self._conn = None
        for thread in self._threads:
            thread.join(timeout=1.0)
        self._threads.clear()
