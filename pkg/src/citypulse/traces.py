"""Trace assembly: group spans by trace id, build span forests, derive call events."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .config import DEFAULT_CONSTRUCTOR_NAMES
from .structure import make_class_id
from .wire import DynamicRecord, StructureRegistry, parse_fqn


@dataclass(frozen=True, slots=True)
class Span:
    span_id: str
    parent_span_id: str | None
    trace_id: str
    class_id: str
    operation_name: str
    is_constructor: bool
    start_nanos: int
    end_nanos: int


@dataclass(frozen=True, slots=True)
class Trace:
    trace_id: str
    spans: tuple[Span, ...]  # ordered by (start_nanos, span_id)
    roots: tuple[Span, ...]


@dataclass(frozen=True, slots=True)
class CallEvent:
    caller_class_id: str | None  # None for root spans (caller not observed)
    callee_class_id: str
    is_constructor_call: bool
    timestamp: int  # start_nanos of the callee span


@dataclass(slots=True)
class AssemblyResult:
    traces: list[Trace]
    orphan_count: int  # spans rooted because their parent never showed up
    invalid_traces: int  # traces excluded for cyclic parent links
    span_count: int


def resolve_record(
    record: DynamicRecord,
    registry: StructureRegistry,
    constructor_names: frozenset[str] = DEFAULT_CONSTRUCTOR_NAMES,
) -> Span | None:
    """Turn a dynamic record into a Span via its structural record, or None if
    the structure hash is not registered yet."""
    structural = registry.resolve(record.structure_hash)
    if structural is None:
        return None
    identity = parse_fqn(structural.fqn, constructor_names)
    class_id = make_class_id(
        structural.hostname, structural.app_name, identity.package_path, identity.class_name
    )
    return Span(
        span_id=record.span_id,
        parent_span_id=record.parent_span_id,
        trace_id=record.trace_id,
        class_id=class_id,
        operation_name=identity.operation_name,
        is_constructor=identity.is_constructor,
        start_nanos=record.start_nanos,
        end_nanos=record.end_nanos,
    )


def assemble(spans: Iterable[Span], window: tuple[int, int] | None = None) -> AssemblyResult:
    """Group spans into traces for one window.

    When `window` = [t0, t1) is given, only spans starting inside it are used.
    Parent links are resolved within each trace; a span whose parent is absent
    becomes an additional root. Traces whose parent links form a cycle are
    excluded and counted.
    """
    by_trace: dict[str, list[Span]] = defaultdict(list)
    for span in spans:
        if window is not None and not (window[0] <= span.start_nanos < window[1]):
            continue
        by_trace[span.trace_id].append(span)

    traces: list[Trace] = []
    orphan_count = 0
    invalid = 0
    span_count = 0
    for trace_id in sorted(by_trace):
        group = sorted(by_trace[trace_id], key=lambda s: (s.start_nanos, s.span_id))
        ids = {s.span_id for s in group}
        roots = [s for s in group if s.parent_span_id is None or s.parent_span_id not in ids]
        if _has_cycle(group, ids, roots):
            invalid += 1
            continue
        orphan_count += sum(1 for s in roots if s.parent_span_id is not None)
        span_count += len(group)
        traces.append(Trace(trace_id=trace_id, spans=tuple(group), roots=tuple(roots)))
    return AssemblyResult(
        traces=traces, orphan_count=orphan_count, invalid_traces=invalid, span_count=span_count
    )


def _has_cycle(group: Sequence[Span], ids: set[str], roots: Sequence[Span]) -> bool:
    # Every span has at most one parent, so the links form a forest unless some
    # spans are unreachable from any root.
    children: dict[str, list[str]] = defaultdict(list)
    for span in group:
        if span.parent_span_id is not None and span.parent_span_id in ids:
            children[span.parent_span_id].append(span.span_id)
    reached = 0
    stack = [s.span_id for s in roots]
    seen = set(stack)
    while stack:
        node = stack.pop()
        reached += 1
        for child in children.get(node, ()):
            if child not in seen:
                seen.add(child)
                stack.append(child)
    return reached != len(group)


def derive_call_events(trace: Trace) -> list[CallEvent]:
    """One CallEvent per span; the caller is the parent span's class, absent for roots."""
    by_id = {s.span_id: s for s in trace.spans}
    events = []
    for span in trace.spans:
        parent = by_id.get(span.parent_span_id) if span.parent_span_id is not None else None
        events.append(
            CallEvent(
                caller_class_id=parent.class_id if parent is not None else None,
                callee_class_id=span.class_id,
                is_constructor_call=span.is_constructor,
                timestamp=span.start_nanos,
            )
        )
    return events
