"""Multi-session environment service over a WebSocket JSON protocol.

One JSON message per text frame. Every request carries an integer ``rid``
and gets exactly one reply echoing it, either::

    {"type": "result", "rid": N, "data": {...}}
    {"type": "error",  "rid": N, "code": "...", "message": "..."}

Request types: hello, list_models, make, reset, step, observe,
record_start, record_stop, close. Sessions are created by make, addressed
by the opaque id it returns, and evicted after an idle timeout. Each
session keeps an in-memory record of the current episode since its last
reset, so record_start mid-episode still captures a fully replayable file.

Non-WebSocket HTTP requests on the same port serve the static
teleoperation UI when a directory is configured, so one port carries both.
"""

from __future__ import annotations

import asyncio
import http
import json
import logging
import mimetypes
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from websockets.asyncio.server import Server, ServerConnection, serve as _ws_serve
from websockets.datastructures import Headers
from websockets.http11 import Request, Response

from ._version import ENGINE
from .env import (
    BadActionError,
    Env,
    EnvError,
    EpisodeConfig,
    InvalidConfigError,
    NotResetError,
    UnknownModelError,
    make,
)
from .model import list_bundled_models, model_to_dict
from .record import TrajectoryWriter, state_digest

log = logging.getLogger("flatpack.server")

PROTOCOL_VERSION = 1
DEFAULT_PORT = 8765
DEFAULT_IDLE_TIMEOUT = 600.0  # seconds
HEARTBEAT_INTERVAL = 20.0  # seconds, WebSocket ping cadence


class ProtocolError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class Session:
    id: str
    env: Env
    created: float
    last_active: float
    episode_steps: List[dict] = field(default_factory=list)
    writer: Optional[TrajectoryWriter] = None
    record_path: Optional[str] = None
    record_include_obs: bool = False

    def touch(self) -> None:
        self.last_active = time.monotonic()

    def stop_recording(self) -> int:
        steps = 0
        if self.writer is not None:
            steps = self.writer.steps
            self.writer.close()
        self.writer = None
        self.record_path = None
        return steps


class FlatpackService:
    """Protocol logic, independent of the socket transport (fully testable in-process)."""

    def __init__(self, idle_timeout: float = DEFAULT_IDLE_TIMEOUT):
        self.sessions: Dict[str, Session] = {}
        self.idle_timeout = idle_timeout

    # -- dispatch ----------------------------------------------------------

    def handle_text(self, raw: str) -> dict:
        """Handle one request frame; always returns exactly one reply dict."""
        rid = None
        try:
            try:
                msg = json.loads(raw)
            except json.JSONDecodeError as e:
                raise ProtocolError("bad_json", f"invalid JSON: {e.msg}") from None
            if not isinstance(msg, dict):
                raise ProtocolError("bad_json", "message must be a JSON object")
            rid = msg.get("rid")
            if not isinstance(rid, int) or isinstance(rid, bool):
                rid = None
                raise ProtocolError("bad_json", "missing or non-integer rid")
            mtype = msg.get("type")
            handler = getattr(self, f"_on_{mtype}", None) if isinstance(mtype, str) else None
            if handler is None or not str(mtype).replace("_", "").isalpha():
                raise ProtocolError("unknown_type", f"unknown message type {mtype!r}")
            data = handler(msg)
            return {"type": "result", "rid": rid, "data": data}
        except ProtocolError as e:
            return {"type": "error", "rid": rid, "code": e.code, "message": str(e)}
        except Exception as e:  # never crash the connection on a bad request
            log.exception("internal error handling message")
            return {"type": "error", "rid": rid, "code": "internal", "message": str(e)}

    def _session(self, msg: dict) -> Session:
        sid = msg.get("session")
        session = self.sessions.get(sid) if isinstance(sid, str) else None
        if session is None:
            raise ProtocolError("unknown_session", f"unknown session {sid!r}")
        session.touch()
        return session

    # -- request handlers --------------------------------------------------

    def _on_hello(self, msg: dict) -> dict:
        return {"engine": ENGINE, "protocol": PROTOCOL_VERSION}

    def _on_list_models(self, msg: dict) -> dict:
        return {
            "models": [
                {"name": name, "parts": parts, "connectors": conns}
                for name, parts, conns in list_bundled_models()
            ]
        }

    def _on_make(self, msg: dict) -> dict:
        try:
            cfg = EpisodeConfig.from_dict(msg.get("config"))
            env = make(cfg)
        except UnknownModelError as e:
            raise ProtocolError("unknown_model", str(e)) from None
        except (InvalidConfigError, EnvError) as e:
            raise ProtocolError("invalid_config", str(e)) from None
        sid = uuid.uuid4().hex
        now = time.monotonic()
        self.sessions[sid] = Session(id=sid, env=env, created=now, last_active=now)
        return {"session_id": sid, "model": model_to_dict(env.model)}

    def _on_reset(self, msg: dict) -> dict:
        session = self._session(msg)
        seed = msg.get("seed")
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ProtocolError("bad_action", "reset needs an integer seed")
        if session.writer is not None:
            # A trajectory holds one episode; a new episode ends the recording.
            session.stop_recording()
        obs = session.env.reset(seed)
        session.episode_steps = []
        return {"obs": obs.to_dict()}

    def _on_step(self, msg: dict) -> dict:
        session = self._session(msg)
        try:
            result = session.env.step(msg.get("action"))
        except NotResetError as e:
            raise ProtocolError("not_reset", str(e)) from None
        except BadActionError as e:
            raise ProtocolError("bad_action", str(e)) from None
        record = {
            "t": len(session.episode_steps),
            "action": msg.get("action"),
            "reward": result.reward,
            "done": result.done,
            "digest": state_digest(session.env.state),
            "obs": result.observation.to_dict() if session.record_include_obs else None,
        }
        session.episode_steps.append(record)
        if session.writer is not None:
            self._write_record(session, record)
        return {
            "obs": result.observation.to_dict(),
            "reward": result.reward,
            "done": result.done,
            "info": result.info,
        }

    def _on_observe(self, msg: dict) -> dict:
        session = self._session(msg)
        try:
            return {"obs": session.env.observe().to_dict()}
        except NotResetError as e:
            raise ProtocolError("not_reset", str(e)) from None

    def _on_record_start(self, msg: dict) -> dict:
        session = self._session(msg)
        if session.env.last_seed is None:
            raise ProtocolError("not_reset", "cannot record before the first reset")
        if session.writer is not None:
            raise ProtocolError("io_error", f"already recording to {session.record_path}")
        path = msg.get("path")
        if not isinstance(path, str) or not path:
            raise ProtocolError("io_error", "record_start needs a file path")
        session.record_include_obs = bool(msg.get("include_obs", False))
        try:
            session.writer = TrajectoryWriter(
                path, session.env.cfg.model, session.env.cfg.to_dict(), session.env.last_seed
            )
        except OSError as e:
            raise ProtocolError("io_error", str(e)) from None
        session.record_path = path
        for record in session.episode_steps:  # capture the episode from its reset
            self._write_record(session, record)
        return {"recording": True, "path": path, "buffered": len(session.episode_steps)}

    @staticmethod
    def _write_record(session: Session, record: dict) -> None:
        assert session.writer is not None
        session.writer.write_step(
            record["t"], record["action"], record["reward"], record["done"],
            record["digest"], record["obs"],
        )

    def _on_record_stop(self, msg: dict) -> dict:
        session = self._session(msg)
        path = session.record_path
        steps = session.stop_recording()
        return {"recording": False, "path": path, "steps": steps}

    def _on_close(self, msg: dict) -> dict:
        session = self._session(msg)
        session.stop_recording()
        del self.sessions[session.id]
        return {}

    # -- housekeeping ------------------------------------------------------

    def evict_idle(self) -> List[str]:
        now = time.monotonic()
        dead = [s.id for s in self.sessions.values() if now - s.last_active > self.idle_timeout]
        for sid in dead:
            self.sessions[sid].stop_recording()
            del self.sessions[sid]
            log.info("evicted idle session %s", sid)
        return dead

    def shutdown(self) -> None:
        for session in list(self.sessions.values()):
            session.stop_recording()
        self.sessions.clear()


class FlatpackServer:
    """Asyncio WebSocket front end around a FlatpackService."""

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = DEFAULT_PORT,
        ui_dir: Optional[str] = None,
        idle_timeout: float = DEFAULT_IDLE_TIMEOUT,
    ):
        self.host = host
        self.port = port
        self.ui_dir = ui_dir
        self.service = FlatpackService(idle_timeout=idle_timeout)
        self._stop: Optional[asyncio.Future] = None
        self._server: Optional[Server] = None

    async def _handler(self, connection: ServerConnection) -> None:
        async for message in connection:
            if isinstance(message, bytes):
                reply = {"type": "error", "rid": None, "code": "bad_json",
                         "message": "binary frames are not part of this protocol"}
            else:
                reply = self.service.handle_text(message)
            await connection.send(json.dumps(reply, separators=(",", ":")))

    def _process_request(self, connection: ServerConnection, request: Request):
        if "websocket" in request.headers.get("Upgrade", "").lower():
            return None
        return self._static_response(request.path)

    def _static_response(self, path: str) -> Response:
        def plain(status: http.HTTPStatus, text: str) -> Response:
            body = text.encode()
            return Response(
                status.value, status.phrase,
                Headers([("Content-Type", "text/plain; charset=utf-8"),
                         ("Content-Length", str(len(body)))]),
                body,
            )

        if self.ui_dir is None:
            return plain(http.HTTPStatus.OK, f"{ENGINE} websocket endpoint\n")
        rel = path.split("?", 1)[0].lstrip("/") or "index.html"
        base = os.path.abspath(self.ui_dir)
        full = os.path.abspath(os.path.normpath(os.path.join(base, rel)))
        if os.path.commonpath([base, full]) != base:
            return plain(http.HTTPStatus.FORBIDDEN, "forbidden\n")
        if not os.path.isfile(full):
            return plain(http.HTTPStatus.NOT_FOUND, f"no such file: {rel}\n")
        ctype = mimetypes.guess_type(full)[0] or "application/octet-stream"
        with open(full, "rb") as f:
            body = f.read()
        return Response(
            http.HTTPStatus.OK.value, "OK",
            Headers([("Content-Type", ctype), ("Content-Length", str(len(body)))]),
            body,
        )

    async def _evictor(self) -> None:
        while True:
            await asyncio.sleep(min(30.0, self.service.idle_timeout / 2.0))
            self.service.evict_idle()

    async def run(self, ready=None) -> None:
        """Serve until stop() is called. Sets self.port to the bound port first.

        `ready` is any object with a set() method (threading.Event or
        asyncio.Event) signalled once the socket is listening.
        """
        self._stop = asyncio.get_running_loop().create_future()
        async with _ws_serve(
            self._handler,
            self.host,
            self.port,
            process_request=self._process_request,
            ping_interval=HEARTBEAT_INTERVAL,
        ) as server:
            self._server = server
            self.port = next(
                sock.getsockname()[1] for sock in server.sockets
            )
            evictor = asyncio.create_task(self._evictor())
            if ready is not None:
                ready.set()
            log.info("listening on %s:%d", self.host, self.port)
            try:
                await self._stop
            finally:
                evictor.cancel()
                self.service.shutdown()

    def stop(self) -> None:
        if self._stop is not None and not self._stop.done():
            self._stop.get_loop().call_soon_threadsafe(self._stop.set_result, None)


class ServerThread:
    """Run a FlatpackServer on a daemon thread; for tests and embedding."""

    def __init__(self, **kwargs):
        self.server = FlatpackServer(**kwargs)
        self._thread: Optional[threading.Thread] = None

    def __enter__(self) -> FlatpackServer:
        ready = threading.Event()
        self._thread = threading.Thread(
            target=lambda: asyncio.run(self.server.run(ready)), daemon=True
        )
        self._thread.start()
        if not ready.wait(timeout=10.0):
            raise RuntimeError("server failed to start within 10 s")
        return self.server

    def __exit__(self, *exc) -> None:
        self.server.stop()
        if self._thread is not None:
            self._thread.join(timeout=10.0)
