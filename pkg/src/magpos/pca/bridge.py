"""UI bridge: JSON messages over a local websocket.

Publishes render-state snapshots to every connected client and accepts
steering and app-selection input. Message types:

  {"type": "state", ...}            server -> clients, render snapshot
  {"type": "steer", "x": m, "y": m} client -> server, re-broadcast to the
                                     other clients (the live-mode pipeline
                                     subscribes to drive its virtual visitor)
  {"type": "select", "app": id}     client -> server, switch the current app
"""

from __future__ import annotations

import json
import logging
import socket
import threading
from typing import Callable

from ..core import ConfigError

logger = logging.getLogger(__name__)


class UiBridge:
    def __init__(self, host: str = "127.0.0.1", port: int = 5006):
        self.host = host
        self.port = port
        self.on_steer: list[Callable[[float, float], None]] = []
        self.on_select: list[Callable[[str], None]] = []
        self.hello_provider: Callable[[], dict | None] | None = None
        self.malformed = 0
        self._clients: set = set()
        self._clients_lock = threading.Lock()
        self._server = None
        self._thread: threading.Thread | None = None

    def start(self) -> "UiBridge":
        from websockets.sync.server import serve

        sock = socket.socket()
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            sock.bind((self.host, self.port))
        except OSError as exc:
            raise ConfigError(f"cannot bind bridge {self.host}:{self.port}: {exc}") from exc
        sock.listen(8)
        self.port = sock.getsockname()[1]
        self._server = serve(self._handler, sock=sock)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def _handler(self, conn) -> None:
        with self._clients_lock:
            self._clients.add(conn)
        hello = self.hello_provider() if self.hello_provider else None
        if hello is not None:
            try:
                conn.send(json.dumps(hello))
            except Exception:
                pass
        try:
            for raw in conn:
                self._dispatch(raw, sender=conn)
        except Exception:
            pass
        finally:
            with self._clients_lock:
                self._clients.discard(conn)

    def _dispatch(self, raw, sender) -> None:
        try:
            message = json.loads(raw)
            kind = message["type"]
        except (ValueError, TypeError, KeyError):
            self.malformed += 1
            return
        if kind == "steer":
            try:
                x, y = float(message["x"]), float(message["y"])
            except (KeyError, TypeError, ValueError):
                self.malformed += 1
                return
            for callback in self.on_steer:
                callback(x, y)
            self._broadcast_raw(json.dumps({"type": "steer", "x": x, "y": y}), skip=sender)
        elif kind == "select":
            app_id = message.get("app")
            if not isinstance(app_id, str):
                self.malformed += 1
                return
            for callback in self.on_select:
                callback(app_id)
        else:
            self.malformed += 1

    def _broadcast_raw(self, data: str, skip=None) -> None:
        with self._clients_lock:
            clients = list(self._clients)
        for conn in clients:
            if conn is skip:
                continue
            try:
                conn.send(data)
            except Exception:
                with self._clients_lock:
                    self._clients.discard(conn)

    def broadcast(self, message: dict) -> None:
        self._broadcast_raw(json.dumps(message))

    @property
    def client_count(self) -> int:
        with self._clients_lock:
            return len(self._clients)

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
