"""The tick pipeline: drains ingested records, assembles traces, computes
metrics, advances histories, lays out the city, and publishes snapshots.

One tick driver owns all mutable state. Ingestion appends to queues; readers
only ever see published (immutable) snapshots, never a partially built one.
"""

from __future__ import annotations

import json
import time
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .config import EngineConfig
from .heatmap import HeatmapMode, HeatmapView, ScoreHistory, build_view
from .layout import CityLayout, CommunicationEdge, aggregate_edges, layout
from .metrics import MetricPlugin, MetricRegistry, MetricScores
from .structure import AppKey, ApplicationTree, Landscape
from .traces import CallEvent, Span, assemble, derive_call_events
from .wire import (
    DynamicRecord,
    MonitoringRecord,
    StructuralRecord,
    StructureRegistry,
    parse_fqn,
    parse_record,
)


class UnknownApplicationError(LookupError):
    pass


class NoSnapshotError(LookupError):
    pass


class UnknownMetricError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class SnapshotStats:
    span_count: int
    trace_count: int
    orphan_count: int
    dropped_records: int  # cumulative: spans whose structure never resolved
    invalid_traces: int  # cumulative: traces excluded for cyclic parent links
    class_count: int
    package_count: int
    tick_millis: float  # compute time spent in this tick up to publishing

    def to_dict(self) -> dict:
        return {
            "spanCount": self.span_count,
            "traceCount": self.trace_count,
            "orphanCount": self.orphan_count,
            "droppedRecords": self.dropped_records,
            "invalidTraces": self.invalid_traces,
            "classCount": self.class_count,
            "packageCount": self.package_count,
            "tickMillis": self.tick_millis,
        }


@dataclass(frozen=True)
class Snapshot:
    """One tick's complete, immutable view of a single application."""

    tick_index: int
    window: tuple[int, int]  # [t0, t1) wall-clock nanoseconds, nominal
    app_key: AppKey
    structure: dict
    geometry: CityLayout
    edges: tuple[CommunicationEdge, ...]
    metric_scores: Mapping[str, MetricScores]
    stats: SnapshotStats

    def to_dict(self) -> dict:
        return {
            "tickIndex": self.tick_index,
            "window": {"startNanos": self.window[0], "endNanos": self.window[1]},
            "app": {"hostname": self.app_key[0], "appName": self.app_key[1]},
            "structure": self.structure,
            "geometry": {
                "boxes": [box.to_dict() for box in self.geometry.boxes],
                "anchors": [anchor.to_dict() for anchor in self.geometry.anchors],
            },
            "edges": [edge.to_dict() for edge in self.edges],
            "metricScores": {
                metric_id: dict(sorted(scores.values.items()))
                for metric_id, scores in sorted(self.metric_scores.items())
            },
            "stats": self.stats.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


@dataclass(slots=True)
class _SpanIdentity:
    app_key: AppKey
    class_id: str
    operation_name: str
    is_constructor: bool


class Engine:
    """Single-process engine: ingest queues in, published snapshots out.

    submit()/submit_line() may be called from ingest handlers at any time;
    tick() must be called by exactly one driver. Reads (latest, heatmap) are
    safe at any time because they only touch published snapshots.
    """

    def __init__(self, config: EngineConfig | None = None) -> None:
        self.config = config or EngineConfig()
        self.config.validate()
        self.registry = StructureRegistry()
        self.landscape = Landscape()
        self.metrics = MetricRegistry()

        self._pending_structural: deque[StructuralRecord] = deque()
        self._pending_dynamic: deque[DynamicRecord] = deque()
        self._retry_dynamic: list[DynamicRecord] = []
        self._future_dynamic: list[DynamicRecord] = []
        self._grace: dict[AppKey, list[Span]] = {}
        self._identity_cache: dict[str, _SpanIdentity] = {}

        self._tick_index = 0
        self._window_end: int | None = None
        self._histories: dict[AppKey, dict[str, ScoreHistory]] = {}
        self._latest: dict[AppKey, Snapshot] = {}
        self._rings: dict[AppKey, deque[Snapshot]] = {}

        self.dropped_records = 0
        self.invalid_traces = 0

    # ------------------------------------------------------------------ ingest

    def submit_line(self, line: bytes | str) -> bool:
        return self.submit(parse_record(line))

    def submit(self, record: MonitoringRecord) -> bool:
        """Queue one validated record. Returns False for a deduplicated repeat
        of a known structural record, True otherwise. Raises HashCollisionError
        when a structure hash rebinds to a different identity."""
        if isinstance(record, StructuralRecord):
            if self.registry.add(record):
                self._pending_structural.append(record)
                return True
            return False
        self._pending_dynamic.append(record)
        return True

    def submit_lines(self, lines: Iterable[bytes | str]) -> tuple[int, int]:
        """Submit many lines; returns (accepted, deduplicated)."""
        accepted = 0
        deduplicated = 0
        for line in lines:
            if self.submit_line(line):
                accepted += 1
            else:
                deduplicated += 1
        return accepted, deduplicated

    def register_metric(self, plugin: MetricPlugin) -> None:
        self.metrics.register(plugin)

    # -------------------------------------------------------------------- tick

    def tick(self, now_ns: int | None = None) -> list[Snapshot]:
        """Close the current window and publish one snapshot per application.

        Windows are nominal and contiguous: the first tick ends at `now_ns`
        (wall clock if omitted) and every later window is exactly one tick
        interval long, regardless of scheduler jitter.
        """
        started = time.perf_counter()
        tick_ns = self.config.tick_nanos
        if self._window_end is None:
            t1 = now_ns if now_ns is not None else time.time_ns()
            t0 = t1 - tick_ns
        else:
            t0 = self._window_end
            t1 = t0 + tick_ns
        self._window_end = t1
        window = (t0, t1)

        while self._pending_structural:
            structural = self._pending_structural.popleft()
            identity = parse_fqn(structural.fqn, self.config.constructor_names)
            self.landscape.insert(structural.hostname, structural.app_name, identity)

        batches = self._drain_dynamic(t1)

        snapshots: list[Snapshot] = []
        for app_key in self.landscape.app_keys():
            tree = self.landscape.get(app_key)
            assert tree is not None
            spans = batches.get(app_key, [])
            grace_spans = self._grace.pop(app_key, [])
            grace_keys = {(s.trace_id, s.span_id) for s in grace_spans}
            kept, deferred = _defer_orphans(spans + grace_spans, grace_keys)
            if deferred:
                self._grace[app_key] = deferred

            # Late arrivals keep their original timestamps; widen the assembly
            # window backwards so they still land in this tick's traces.
            effective_t0 = min([t0, *(s.start_nanos for s in kept)])
            result = assemble(kept, (effective_t0, t1))
            self.invalid_traces += result.invalid_traces

            events: list[CallEvent] = []
            for trace in result.traces:
                events.extend(derive_call_events(trace))

            scores = self.metrics.compute_all(events, tree, window)
            histories = self._histories.setdefault(app_key, {})
            for metric_id in self.metrics.metric_ids():
                history = histories.get(metric_id)
                if history is None:
                    history = ScoreHistory(metric_id, self.config.window_size, self.config.decay)
                    histories[metric_id] = history
                # A failed plugin still advances its history (as an empty
                # window) so every history stays exactly one entry per tick.
                history.advance(scores.get(metric_id, MetricScores(metric_id, window, {})))

            counts = scores.get("instance_count")
            geometry = layout(
                tree,
                counts.values if counts is not None else {},
                min_height=self.config.min_class_height,
                max_height=self.config.max_class_height,
                footprint=self.config.class_footprint,
                padding=self.config.padding,
            )
            edges = aggregate_edges(events)
            snapshot = Snapshot(
                tick_index=self._tick_index,
                window=window,
                app_key=app_key,
                structure=tree.to_dict(),
                geometry=geometry,
                edges=tuple(edges),
                metric_scores=scores,
                stats=SnapshotStats(
                    span_count=result.span_count,
                    trace_count=len(result.traces),
                    orphan_count=result.orphan_count,
                    dropped_records=self.dropped_records,
                    invalid_traces=self.invalid_traces,
                    class_count=tree.class_count(),
                    package_count=tree.package_count(),
                    tick_millis=(time.perf_counter() - started) * 1e3,
                ),
            )
            self._latest[app_key] = snapshot
            ring = self._rings.setdefault(app_key, deque(maxlen=self.config.window_size + 1))
            ring.append(snapshot)
            snapshots.append(snapshot)

        self._tick_index += 1
        return snapshots

    def _drain_dynamic(self, t1: int) -> dict[AppKey, list[Span]]:
        batches: dict[AppKey, list[Span]] = defaultdict(list)
        retry_next: list[DynamicRecord] = []
        future_next: list[DynamicRecord] = []

        def consume(record: DynamicRecord, retried: bool) -> None:
            identity = self._resolve_identity(record.structure_hash)
            if identity is None:
                if retried:
                    self.dropped_records += 1
                else:
                    retry_next.append(record)
                return
            if record.start_nanos >= t1:
                future_next.append(record)
                return
            batches[identity.app_key].append(
                Span(
                    span_id=record.span_id,
                    parent_span_id=record.parent_span_id,
                    trace_id=record.trace_id,
                    class_id=identity.class_id,
                    operation_name=identity.operation_name,
                    is_constructor=identity.is_constructor,
                    start_nanos=record.start_nanos,
                    end_nanos=record.end_nanos,
                )
            )

        for record in self._retry_dynamic:
            consume(record, retried=True)
        self._retry_dynamic = retry_next
        for record in self._future_dynamic:
            consume(record, retried=False)
        pending = self._pending_dynamic
        while pending:
            consume(pending.popleft(), retried=False)
        self._future_dynamic = future_next
        return batches

    def _resolve_identity(self, structure_hash: str) -> _SpanIdentity | None:
        identity = self._identity_cache.get(structure_hash)
        if identity is not None:
            return identity
        structural = self.registry.resolve(structure_hash)
        if structural is None:
            return None
        parsed = parse_fqn(structural.fqn, self.config.constructor_names)
        app_key = (structural.hostname, structural.app_name)
        tree = self.landscape.get(app_key)
        class_id = tree.insert(parsed) if tree is not None else None
        if class_id is None:
            # Structure known but not inserted into the landscape yet; resolved
            # on a later tick, after the structural drain ran.
            return None
        identity = _SpanIdentity(
            app_key=app_key,
            class_id=class_id,
            operation_name=parsed.operation_name,
            is_constructor=parsed.is_constructor,
        )
        self._identity_cache[structure_hash] = identity
        return identity

    # -------------------------------------------------------------------- read

    @property
    def tick_count(self) -> int:
        return self._tick_index

    def app_keys(self) -> list[AppKey]:
        return self.landscape.app_keys()

    def default_app(self) -> AppKey:
        keys = self.landscape.app_keys()
        if not keys:
            raise NoSnapshotError("no application observed yet")
        return keys[0]

    def _resolve_app(self, app_key: AppKey | None) -> AppKey:
        if app_key is None:
            return self.default_app()
        if self.landscape.get(app_key) is None:
            raise UnknownApplicationError(f"unknown application {app_key!r}")
        return app_key

    def latest(self, app_key: AppKey | None = None) -> Snapshot:
        key = self._resolve_app(app_key)
        snapshot = self._latest.get(key)
        if snapshot is None:
            raise NoSnapshotError(f"no snapshot published yet for {key!r}")
        return snapshot

    def heatmap(
        self,
        metric_id: str,
        mode: HeatmapMode | str,
        app_key: AppKey | None = None,
    ) -> HeatmapView:
        if metric_id not in self.metrics:
            raise UnknownMetricError(f"unknown metric {metric_id!r}")
        mode = HeatmapMode(mode)  # raises ValueError for unknown modes
        key = self._resolve_app(app_key)
        snapshot = self._latest.get(key)
        history = self._histories.get(key, {}).get(metric_id)
        if snapshot is None or history is None:
            raise NoSnapshotError(f"no snapshot published yet for {key!r}")
        return build_view(history, mode, snapshot.tick_index, self.config.gradient_stops)

    def history(self, metric_id: str, app_key: AppKey | None = None) -> ScoreHistory:
        key = self._resolve_app(app_key)
        history = self._histories.get(key, {}).get(metric_id)
        if history is None:
            raise UnknownMetricError(f"no history for metric {metric_id!r} on {key!r}")
        return history


def _defer_orphans(
    spans: list[Span], already_deferred: set[tuple[str, str]]
) -> tuple[list[Span], list[Span]]:
    """Split a batch into spans to process now and first-time orphans to hold
    for one tick. Descendants of a held span are held with it so subtrees stay
    together; a span already held once proceeds and becomes an extra root."""
    if not spans:
        return [], []
    by_trace: dict[str, list[Span]] = defaultdict(list)
    for span in spans:
        by_trace[span.trace_id].append(span)

    kept: list[Span] = []
    deferred: list[Span] = []
    for trace_id, group in by_trace.items():
        ids = {s.span_id for s in group}
        children: dict[str, list[Span]] = defaultdict(list)
        for span in group:
            if span.parent_span_id is not None and span.parent_span_id in ids:
                children[span.parent_span_id].append(span)
        removed: set[str] = set()
        stack: list[Span] = []
        for span in group:
            if (
                span.parent_span_id is not None
                and span.parent_span_id not in ids
                and (trace_id, span.span_id) not in already_deferred
            ):
                removed.add(span.span_id)
                stack.append(span)
        while stack:
            span = stack.pop()
            for child in children.get(span.span_id, ()):
                if child.span_id not in removed and (trace_id, child.span_id) not in already_deferred:
                    removed.add(child.span_id)
                    stack.append(child)
        for span in group:
            (deferred if span.span_id in removed else kept).append(span)
    return kept, deferred
