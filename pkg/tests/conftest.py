"""Shared test helpers: record builders, a brute-force metric recount used as
an oracle, random structure trees, and a live-server harness on ephemeral ports."""

from __future__ import annotations

import contextlib
import random
import threading
import time
from collections import Counter

import pytest

from citypulse.config import EngineConfig
from citypulse.server import CityServer
from citypulse.structure import ApplicationTree
from citypulse.traces import CallEvent
from citypulse.wire import DynamicRecord, OperationIdentity, StructuralRecord


def structural(shash: str, fqn: str, host: str = "h1", app: str = "app") -> StructuralRecord:
    return StructuralRecord(structure_hash=shash, hostname=host, app_name=app, fqn=fqn)


def span(
    trace: str = "t1",
    span_id: str = "s1",
    parent: str | None = None,
    start: int = 0,
    end: int | None = None,
    shash: str = "x",
) -> DynamicRecord:
    return DynamicRecord(
        trace_id=trace,
        span_id=span_id,
        parent_span_id=parent,
        start_nanos=start,
        end_nanos=end if end is not None else start + 10,
        structure_hash=shash,
    )


def event(
    callee: str,
    caller: str | None = None,
    ctor: bool = False,
    ts: int = 0,
) -> CallEvent:
    return CallEvent(
        caller_class_id=caller, callee_class_id=callee, is_constructor_call=ctor, timestamp=ts
    )


def brute_force_metrics(events) -> dict[str, dict[str, float]]:
    """Recount the four built-in metrics straight from their definitions."""
    instance: Counter = Counter()
    imports: Counter = Counter()
    exports: Counter = Counter()
    for e in events:
        if e.is_constructor_call:
            instance[e.callee_class_id] += 1
        if e.caller_class_id is not None:
            imports[e.caller_class_id] += 1
        exports[e.callee_class_id] += 1
    combined = Counter(imports)
    combined.update(exports)
    return {
        "instance_count": dict(instance),
        "ic_cd": dict(imports),
        "ec_cd": dict(exports),
        "iec_cd": dict(combined),
    }


def random_events(rng: random.Random, size: int, class_pool: int = 30) -> list[CallEvent]:
    classes = [f"h/a/p.C{i}" for i in range(class_pool)]
    out = []
    for i in range(size):
        callee = rng.choice(classes)
        caller = None if rng.random() < 0.15 else rng.choice(classes)
        out.append(event(callee, caller, ctor=rng.random() < 0.3, ts=i))
    return out


def random_tree(rng: random.Random, max_classes: int = 500) -> ApplicationTree:
    """A random application structure: packages up to 4 deep, ops per class."""
    tree = ApplicationTree("host", "app")
    n_classes = rng.randint(1, max_classes)
    for i in range(n_classes):
        depth = rng.randint(0, 4)
        path = tuple(f"p{rng.randint(0, 5)}" for _ in range(depth))
        identity = OperationIdentity(
            package_path=path,
            class_name=f"C{i}",
            operation_name=rng.choice(["<init>", "run", "call"]),
            is_constructor=False,
        )
        tree.insert(identity)
    return tree


class LiveServer:
    """Run CityServer under uvicorn in a thread, everything on ephemeral ports."""

    def __init__(self, config: EngineConfig | None = None, **kwargs) -> None:
        self.config = config or EngineConfig(tick_seconds=0.2, http_port=0, ingest_tcp_port=0)
        self.city = CityServer(self.config, bind_host="127.0.0.1", **kwargs)
        self._uv = None
        self._thread: threading.Thread | None = None
        self._ready = threading.Event()

    def __enter__(self) -> "LiveServer":
        import uvicorn

        @contextlib.asynccontextmanager
        async def lifespan(_):
            await self.city.start_background()
            self._ready.set()
            yield
            await self.city.stop_background()

        self.city.app.router.lifespan_context = lifespan
        self._uv = uvicorn.Server(
            uvicorn.Config(self.city.app, host="127.0.0.1", port=0, log_level="error")
        )
        self._thread = threading.Thread(target=self._uv.run, daemon=True)
        self._thread.start()
        deadline = time.monotonic() + 15
        while not (self._ready.is_set() and self._uv.started):
            if time.monotonic() > deadline:
                raise RuntimeError("test server failed to start")
            time.sleep(0.01)
        return self

    def __exit__(self, *exc) -> None:
        self._uv.should_exit = True
        self._thread.join(timeout=10)

    @property
    def engine(self):
        return self.city.engine

    @property
    def http_port(self) -> int:
        return self._uv.servers[0].sockets[0].getsockname()[1]

    @property
    def tcp_port(self) -> int:
        return self.city.tcp_port

    def url(self, path: str) -> str:
        return f"http://127.0.0.1:{self.http_port}{path}"

    def ws_url(self, path: str = "/api/v1/stream") -> str:
        return f"ws://127.0.0.1:{self.http_port}{path}"


@pytest.fixture
def live_server():
    with LiveServer() as server:
        yield server
