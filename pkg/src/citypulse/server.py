"""HTTP/WebSocket API, raw TCP ingest listener, and the periodic tick driver.

Everything runs on one asyncio loop: ingest handlers append to the engine's
queues, the tick driver is the only code that mutates engine state, and API
reads only touch published snapshots. Slow stream subscribers are disconnected
(bounded per-subscriber queues) so they can never hold up a tick.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import logging
import time
from pathlib import Path
from typing import AsyncIterator

from fastapi import FastAPI, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from .config import EngineConfig
from .engine import Engine, NoSnapshotError, UnknownApplicationError, UnknownMetricError
from .structure import AppKey
from .wire import HashCollisionError, WireError

logger = logging.getLogger(__name__)

_CLOSE = object()  # sentinel telling a stream handler to hang up
_READ_CHUNK = 1 << 16
_SEND_TIMEOUT_SECONDS = 10.0


class StreamHub:
    """Fan-out of snapshot JSON to websocket subscribers.

    publish() never blocks: each subscriber has a bounded queue, and one that
    falls behind gets a close sentinel instead of more data.
    """

    def __init__(self, queue_size: int = 256) -> None:
        self._queue_size = queue_size
        self._subscribers: dict[int, asyncio.Queue] = {}
        self._next_id = 0

    def subscribe(self) -> tuple[int, asyncio.Queue]:
        subscriber_id = self._next_id
        self._next_id += 1
        queue: asyncio.Queue = asyncio.Queue(maxsize=self._queue_size)
        self._subscribers[subscriber_id] = queue
        return subscriber_id, queue

    def unsubscribe(self, subscriber_id: int) -> None:
        self._subscribers.pop(subscriber_id, None)

    def publish(self, message: str) -> None:
        for subscriber_id, queue in list(self._subscribers.items()):
            try:
                queue.put_nowait(message)
            except asyncio.QueueFull:
                logger.warning("disconnecting slow stream subscriber %d", subscriber_id)
                self._subscribers.pop(subscriber_id, None)
                with contextlib.suppress(asyncio.QueueEmpty):
                    queue.get_nowait()
                queue.put_nowait(_CLOSE)

    @property
    def subscriber_count(self) -> int:
        return len(self._subscribers)


def _parse_app_param(value: str | None) -> AppKey | None:
    if value is None:
        return None
    hostname, sep, app_name = value.partition("/")
    if not sep or not hostname or not app_name:
        raise ValueError(f"app must look like 'hostname/appName', got {value!r}")
    return (hostname, app_name)


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"detail": message})


def build_app(engine: Engine, hub: StreamHub, frontend_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="citypulse", docs_url=None, redoc_url=None)

    @app.get("/api/v1/snapshot/latest")
    def snapshot_latest(app: str | None = None) -> Response:
        try:
            key = _parse_app_param(app)
            snapshot = engine.latest(key)
        except ValueError as exc:
            return _error(400, str(exc))
        except LookupError as exc:
            return _error(404, str(exc))
        # Serialize ourselves so two reads of one tick are byte-identical.
        return Response(content=snapshot.to_json(), media_type="application/json")

    @app.get("/api/v1/heatmap")
    def heatmap(metric: str | None = None, mode: str | None = None, app: str | None = None) -> Response:
        if not metric or not mode:
            return _error(400, "query parameters 'metric' and 'mode' are required")
        try:
            key = _parse_app_param(app)
            view = engine.heatmap(metric, mode, key)
        except (UnknownMetricError, ValueError) as exc:
            return _error(400, str(exc))
        except LookupError as exc:
            return _error(404, str(exc))
        body = json.dumps(view.to_dict(), sort_keys=True, separators=(",", ":"))
        return Response(content=body, media_type="application/json")

    @app.get("/api/v1/metrics")
    def metrics() -> JSONResponse:
        return JSONResponse(content=[d.to_dict() for d in engine.metrics.descriptors()])

    @app.post("/ingest")
    async def ingest(request: Request) -> JSONResponse:
        body = await request.body()
        accepted = 0
        deduplicated = 0
        malformed = 0
        for line in body.split(b"\n"):
            if not line.strip():
                continue
            try:
                if engine.submit_line(line):
                    accepted += 1
                else:
                    deduplicated += 1
            except (WireError, HashCollisionError) as exc:
                malformed += 1
                logger.debug("rejected ingest line: %s", exc)
        return JSONResponse(
            content={"accepted": accepted, "deduplicated": deduplicated, "malformed": malformed}
        )

    @app.websocket("/api/v1/stream")
    async def stream(websocket: WebSocket) -> None:
        await websocket.accept()
        subscriber_id, queue = hub.subscribe()
        try:
            while True:
                message = await queue.get()
                if message is _CLOSE:
                    await websocket.close(code=1013)  # try again later
                    break
                await asyncio.wait_for(
                    websocket.send_text(message), timeout=_SEND_TIMEOUT_SECONDS
                )
        except (WebSocketDisconnect, asyncio.TimeoutError, RuntimeError):
            pass
        finally:
            hub.unsubscribe(subscriber_id)

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="ui")

    return app


def default_frontend_dir() -> Path | None:
    candidate = Path(__file__).parent / "static"
    return candidate if candidate.is_dir() else None


class CityServer:
    """Owns the engine plus the three moving parts around it: the HTTP app,
    the TCP ingest listener, and the tick loop."""

    def __init__(
        self,
        config: EngineConfig | None = None,
        engine: Engine | None = None,
        frontend_dir: str | Path | None = None,
        bind_host: str = "0.0.0.0",
    ) -> None:
        self.config = config or EngineConfig()
        self.engine = engine or Engine(self.config)
        self.hub = StreamHub()
        self.bind_host = bind_host
        if frontend_dir is None:
            frontend_dir = default_frontend_dir()
        self.app = build_app(self.engine, self.hub, frontend_dir)
        self.malformed_lines = 0
        self._tcp_server: asyncio.base_events.Server | None = None
        self._tick_task: asyncio.Task | None = None

    # ------------------------------------------------------------- lifecycle

    async def start_background(self) -> None:
        """Start the TCP listener and the tick loop on the running loop."""
        self._tcp_server = await asyncio.start_server(
            self._handle_ingest_connection, self.bind_host, self.config.ingest_tcp_port
        )
        self._tick_task = asyncio.get_running_loop().create_task(self._tick_loop())
        logger.info(
            "ingest listening on tcp port %d, tick every %gs",
            self.tcp_port,
            self.config.tick_seconds,
        )

    async def stop_background(self) -> None:
        if self._tick_task is not None:
            self._tick_task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await self._tick_task
            self._tick_task = None
        if self._tcp_server is not None:
            self._tcp_server.close()
            await self._tcp_server.wait_closed()
            self._tcp_server = None

    @property
    def tcp_port(self) -> int:
        if self._tcp_server is None or not self._tcp_server.sockets:
            return self.config.ingest_tcp_port
        return self._tcp_server.sockets[0].getsockname()[1]

    # ---------------------------------------------------------------- ingest

    async def _handle_ingest_connection(
        self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
    ) -> None:
        peer = writer.get_extra_info("peername")
        rejected = 0
        buffer = b""
        try:
            while True:
                chunk = await reader.read(_READ_CHUNK)
                if not chunk:
                    break
                buffer += chunk
                if b"\n" not in chunk:
                    continue
                *lines, buffer = buffer.split(b"\n")
                for line in lines:
                    rejected += self._submit_quietly(line)
            if buffer.strip():
                rejected += self._submit_quietly(buffer)
        except (ConnectionResetError, asyncio.IncompleteReadError):
            pass
        finally:
            if rejected:
                logger.info("connection %s: rejected %d malformed lines", peer, rejected)
            writer.close()
            with contextlib.suppress(Exception):
                await writer.wait_closed()

    def _submit_quietly(self, line: bytes) -> int:
        """Submit one line; malformed input is counted, never fatal."""
        if not line.strip():
            return 0
        try:
            self.engine.submit_line(line)
            return 0
        except (WireError, HashCollisionError) as exc:
            self.malformed_lines += 1
            if self.malformed_lines <= 10:
                logger.warning("rejected ingest line: %s", exc)
            return 1

    # ------------------------------------------------------------------ tick

    async def _tick_loop(self) -> None:
        interval = self.config.tick_seconds
        next_due = time.monotonic() + interval
        while True:
            delay = next_due - time.monotonic()
            if delay > 0:
                await asyncio.sleep(delay)
            next_due += interval
            try:
                snapshots = self.engine.tick()
            except Exception:
                logger.exception("tick failed; state kept, will retry next interval")
                continue
            for snapshot in snapshots:
                self.hub.publish(snapshot.to_json())

    # ------------------------------------------------------------------- run

    def run(self) -> None:
        """Blocking entry point: uvicorn HTTP server plus background parts."""
        import uvicorn

        server = self

        @contextlib.asynccontextmanager
        async def lifespan(_: FastAPI) -> AsyncIterator[None]:
            await server.start_background()
            yield
            await server.stop_background()

        self.app.router.lifespan_context = lifespan
        uvicorn.run(
            self.app,
            host=self.bind_host,
            port=self.config.http_port,
            log_level="warning",
        )
