"""Monitoring wire format: NDJSON records, fqn parsing, and structural dedup.

Two message kinds arrive on the wire, one JSON object per line:

    {"kind":"structure","structureHash":s,"hostname":s,"appName":s,"fqn":s}
    {"kind":"span","traceId":s,"spanId":s,"parentSpanId":s|null,
     "startNanos":n,"endNanos":n,"structureHash":s}

Unknown extra fields are ignored.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from typing import Iterable, Union

from .config import DEFAULT_CONSTRUCTOR_NAMES


class WireError(ValueError):
    """A wire message that cannot be accepted."""


class HashCollisionError(WireError):
    """Same structure hash carried two different identity triples (producer bug)."""


@dataclass(frozen=True, slots=True)
class StructuralRecord:
    structure_hash: str
    hostname: str
    app_name: str
    fqn: str

    def to_wire(self) -> dict:
        return {
            "kind": "structure",
            "structureHash": self.structure_hash,
            "hostname": self.hostname,
            "appName": self.app_name,
            "fqn": self.fqn,
        }


@dataclass(frozen=True, slots=True)
class DynamicRecord:
    trace_id: str
    span_id: str
    parent_span_id: str | None
    start_nanos: int
    end_nanos: int
    structure_hash: str

    def to_wire(self) -> dict:
        return {
            "kind": "span",
            "traceId": self.trace_id,
            "spanId": self.span_id,
            "parentSpanId": self.parent_span_id,
            "startNanos": self.start_nanos,
            "endNanos": self.end_nanos,
            "structureHash": self.structure_hash,
        }


MonitoringRecord = Union[StructuralRecord, DynamicRecord]


@dataclass(frozen=True, slots=True)
class OperationIdentity:
    package_path: tuple[str, ...]
    class_name: str
    operation_name: str
    is_constructor: bool


def parse_fqn(
    fqn: str,
    constructor_names: frozenset[str] = DEFAULT_CONSTRUCTOR_NAMES,
) -> OperationIdentity:
    """Split a dotted operation name into package path, class, and operation.

    The last segment is the operation, the second-to-last the class, everything
    before that the package path. Needs at least two non-empty segments.
    """
    segments = fqn.split(".")
    if len(segments) < 2 or any(not s for s in segments):
        raise WireError(f"fqn needs at least class and operation segments: {fqn!r}")
    return OperationIdentity(
        package_path=tuple(segments[:-2]),
        class_name=segments[-2],
        operation_name=segments[-1],
        is_constructor=segments[-1] in constructor_names,
    )


def join_fqn(package_path: Iterable[str], class_name: str, operation_name: str) -> str:
    return ".".join((*package_path, class_name, operation_name))


def _require_str(obj: dict, key: str) -> str:
    value = obj.get(key)
    if value is None:
        raise WireError(f"missing required field {key!r}")
    if not isinstance(value, str) or not value:
        raise WireError(f"field {key!r} must be a non-empty string, got {value!r}")
    return value


def _require_nanos(obj: dict, key: str) -> int:
    value = obj.get(key)
    if value is None:
        raise WireError(f"missing required field {key!r}")
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise WireError(f"field {key!r} must be a non-negative integer, got {value!r}")
    return value


def parse_record(line: bytes | str) -> MonitoringRecord:
    """Parse and validate one wire line into a structural or dynamic record."""
    try:
        obj = json.loads(line)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise WireError(f"malformed JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise WireError(f"expected a JSON object, got {type(obj).__name__}")

    kind = obj.get("kind")
    if kind == "structure":
        fqn = _require_str(obj, "fqn")
        parse_fqn(fqn)  # reject fqns that cannot split into class + operation
        return StructuralRecord(
            structure_hash=_require_str(obj, "structureHash"),
            hostname=_require_str(obj, "hostname"),
            app_name=_require_str(obj, "appName"),
            fqn=fqn,
        )
    if kind == "span":
        parent = obj.get("parentSpanId")
        if parent is not None and (not isinstance(parent, str) or not parent):
            raise WireError(f"field 'parentSpanId' must be null or a non-empty string, got {parent!r}")
        start = _require_nanos(obj, "startNanos")
        end = _require_nanos(obj, "endNanos")
        if end < start:
            raise WireError(f"endNanos {end} precedes startNanos {start}")
        return DynamicRecord(
            trace_id=_require_str(obj, "traceId"),
            span_id=_require_str(obj, "spanId"),
            parent_span_id=parent,
            start_nanos=start,
            end_nanos=end,
            structure_hash=_require_str(obj, "structureHash"),
        )
    if kind is None:
        raise WireError("missing required field 'kind'")
    raise WireError(f"unknown record kind {kind!r}")


def record_to_line(record: MonitoringRecord) -> str:
    return json.dumps(record.to_wire(), separators=(",", ":"))


class StructureRegistry:
    """Deduplicating structure-hash registry with atomic check-and-insert.

    Repeated structural records are dropped before downstream processing; a
    hash that reappears with a different identity triple is rejected as a
    producer bug.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._by_hash: dict[str, StructuralRecord] = {}

    def add(self, record: StructuralRecord) -> bool:
        """Register a structural record. True on first sight, False on repeat."""
        with self._lock:
            existing = self._by_hash.get(record.structure_hash)
            if existing is None:
                self._by_hash[record.structure_hash] = record
                return True
        if existing != record:
            raise HashCollisionError(
                f"structure hash {record.structure_hash!r} already bound to "
                f"{(existing.hostname, existing.app_name, existing.fqn)}, got "
                f"{(record.hostname, record.app_name, record.fqn)}"
            )
        return False

    def resolve(self, structure_hash: str) -> StructuralRecord | None:
        return self._by_hash.get(structure_hash)

    def __contains__(self, structure_hash: str) -> bool:
        return structure_hash in self._by_hash

    def __len__(self) -> int:
        return len(self._by_hash)
