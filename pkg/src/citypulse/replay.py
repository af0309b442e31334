"""Replay recorded NDJSON monitoring files and generate synthetic workloads.

Script files use the ordinary wire format, but span timestamps are offsets in
nanoseconds relative to the script start. At send time every span is rebased to
the current wall clock and inter-record gaps are scaled by 1/speed, so windows
line up with the server no matter when a script is replayed.
"""

from __future__ import annotations

import dataclasses
import hashlib
import random
import socket
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator

from .wire import (
    DynamicRecord,
    MonitoringRecord,
    StructuralRecord,
    WireError,
    parse_record,
    record_to_line,
)


class ScriptError(ValueError):
    """A replay script that cannot be loaded (parse failure or broken invariant)."""

    def __init__(self, message: str, line_number: int | None = None) -> None:
        super().__init__(message if line_number is None else f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class ReplayScript:
    records: tuple[MonitoringRecord, ...]
    speed: float = 1.0
    loop: bool = False


@dataclass(frozen=True)
class ReplaySummary:
    records_sent: int
    duration_seconds: float


def load_script(path: str | Path) -> tuple[MonitoringRecord, ...]:
    """Load and validate a script file: every line parses, span offsets are
    non-decreasing, and every referenced structure hash is defined in the file."""
    records: list[MonitoringRecord] = []
    defined_hashes: set[str] = set()
    last_offset = -1
    with open(path, "rb") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = parse_record(line)
            except WireError as exc:
                raise ScriptError(str(exc), line_number) from exc
            if isinstance(record, StructuralRecord):
                defined_hashes.add(record.structure_hash)
            else:
                if record.start_nanos < last_offset:
                    raise ScriptError(
                        f"span offsets must be non-decreasing ({record.start_nanos} after {last_offset})",
                        line_number,
                    )
                last_offset = record.start_nanos
                if record.structure_hash not in defined_hashes:
                    raise ScriptError(
                        f"span references undefined structure hash {record.structure_hash!r}",
                        line_number,
                    )
            records.append(record)
    return tuple(records)


def save_script(records: Iterable[MonitoringRecord], path: str | Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record_to_line(record))
            fh.write("\n")
            count += 1
    return count


def _rebased(record: DynamicRecord, base_ns: int, speed: float) -> DynamicRecord:
    return DynamicRecord(
        trace_id=record.trace_id,
        span_id=record.span_id,
        parent_span_id=record.parent_span_id,
        start_nanos=base_ns + int(record.start_nanos / speed),
        end_nanos=base_ns + int(record.end_nanos / speed),
        structure_hash=record.structure_hash,
    )


def send_records(
    records: Iterable[MonitoringRecord],
    target: tuple[str, int],
    speed: float = 1.0,
    stop: threading.Event | None = None,
) -> ReplaySummary:
    """Send records over one TCP connection, pacing and rebasing span times.

    Structural records go out immediately at their position in the stream;
    before each span the sender sleeps until the span's scaled offset.
    """
    if speed <= 0:
        raise ValueError(f"speed must be > 0, got {speed}")
    started_wall = time.monotonic()
    sent = 0
    with socket.create_connection(target) as sock:
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        out = sock.makefile("wb", buffering=1 << 16)
        base_ns = time.time_ns()
        for record in records:
            if stop is not None and stop.is_set():
                break
            if isinstance(record, DynamicRecord):
                due = started_wall + record.start_nanos / speed / 1e9
                delay = due - time.monotonic()
                if delay > 0:
                    out.flush()
                    time.sleep(delay)
                record = _rebased(record, base_ns, speed)
            out.write(record_to_line(record).encode())
            out.write(b"\n")
            sent += 1
        out.flush()
    return ReplaySummary(records_sent=sent, duration_seconds=time.monotonic() - started_wall)


def replay(
    script: ReplayScript,
    target: tuple[str, int],
    connections: int = 1,
    stop: threading.Event | None = None,
) -> ReplaySummary:
    """Replay a script against an ingest endpoint, optionally over several
    parallel connections (spans partitioned by trace id, structure broadcast
    to every connection so no span arrives before its structure)."""
    started = time.monotonic()
    total = 0
    while True:
        if connections <= 1:
            total += send_records(script.records, target, script.speed, stop).records_sent
        else:
            total += _replay_parallel(script.records, target, script.speed, connections, stop)
        if not script.loop or (stop is not None and stop.is_set()):
            break
    return ReplaySummary(records_sent=total, duration_seconds=time.monotonic() - started)


def _replay_parallel(
    records: tuple[MonitoringRecord, ...],
    target: tuple[str, int],
    speed: float,
    connections: int,
    stop: threading.Event | None,
) -> int:
    structural = [r for r in records if isinstance(r, StructuralRecord)]
    parts: list[list[MonitoringRecord]] = [list(structural) for _ in range(connections)]
    for record in records:
        if isinstance(record, DynamicRecord):
            index = int(hashlib.sha1(record.trace_id.encode()).hexdigest(), 16) % connections
            parts[index].append(record)

    sent = [0] * connections
    errors: list[BaseException] = []

    def run(index: int) -> None:
        try:
            sent[index] = send_records(parts[index], target, speed, stop).records_sent
        except BaseException as exc:  # propagated to the caller below
            errors.append(exc)

    threads = [threading.Thread(target=run, args=(i,), daemon=True) for i in range(connections)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()
    if errors:
        raise errors[0]
    return sum(sent)


# --------------------------------------------------------------------- synth


@dataclass(frozen=True)
class SynthScenario:
    """Deterministic synthetic workload: random call trees over a generated
    class population, paced at a fixed span rate (modulated by phases)."""

    class_count: int = 20
    package_fanout: int = 4
    calls_per_second: float = 50.0
    constructor_fraction: float = 0.2
    duration_seconds: float | None = None  # None: generate until stopped
    phase_schedule: tuple[tuple[float, float], ...] = ()  # (offset seconds, rate multiplier)
    seed: int = 0
    hostname: str = "synth-host"
    app_name: str = "synth-app"

    def validate(self) -> None:
        if self.class_count < 1:
            raise ValueError("class_count must be >= 1")
        if self.package_fanout < 1:
            raise ValueError("package_fanout must be >= 1")
        if self.calls_per_second <= 0:
            raise ValueError("calls_per_second must be > 0")
        if not (0.0 <= self.constructor_fraction <= 1.0):
            raise ValueError("constructor_fraction must be in [0, 1]")
        offsets = [offset for offset, _ in self.phase_schedule]
        if offsets != sorted(offsets):
            raise ValueError("phase_schedule offsets must be ascending")


def _stable_hash(hostname: str, app_name: str, fqn: str) -> str:
    return hashlib.sha1(f"{hostname}|{app_name}|{fqn}".encode()).hexdigest()[:16]


def _synth_population(scenario: SynthScenario) -> tuple[list[StructuralRecord], list[list[str]]]:
    """Structure records for the synthetic classes plus, per class, the list of
    structure hashes of its operations ([constructor, regular...])."""
    structural: list[StructuralRecord] = []
    per_class: list[list[str]] = []
    for index in range(scenario.class_count):
        package = f"gen.p{index % scenario.package_fanout}"
        class_name = f"Cls{index:03d}"
        hashes = []
        for op in ("<init>", "run", "call"):
            fqn = f"{package}.{class_name}.{op}"
            h = _stable_hash(scenario.hostname, scenario.app_name, fqn)
            structural.append(
                StructuralRecord(
                    structure_hash=h,
                    hostname=scenario.hostname,
                    app_name=scenario.app_name,
                    fqn=fqn,
                )
            )
            hashes.append(h)
        per_class.append(hashes)
    return structural, per_class


def _rate_multiplier(schedule: tuple[tuple[float, float], ...], at_seconds: float) -> float:
    multiplier = 1.0
    for offset, value in schedule:
        if at_seconds >= offset:
            multiplier = value
        else:
            break
    return multiplier


def generate_synth(scenario: SynthScenario) -> Iterator[MonitoringRecord]:
    """Yield a deterministic record stream: all structure up front, then call
    trees with span offsets spaced to hit the configured span rate."""
    scenario.validate()
    structural, per_class = _synth_population(scenario)
    yield from structural

    rng = random.Random(scenario.seed)
    limit_ns = (
        None if scenario.duration_seconds is None else int(scenario.duration_seconds * 1e9)
    )
    clock_ns = 0
    sequence = 0
    while True:
        tree_size = rng.randint(1, 4)
        starts: list[int] = []
        for _ in range(tree_size):
            if limit_ns is not None and clock_ns >= limit_ns:
                break  # a tree straddling the limit is emitted truncated
            starts.append(clock_ns)
            multiplier = _rate_multiplier(scenario.phase_schedule, clock_ns / 1e9)
            clock_ns += max(1, int(round(1e9 / (scenario.calls_per_second * multiplier))))
        if not starts:
            return
        trace_id = f"synth-{sequence}"
        ids = [f"s{sequence}-{i}" for i in range(len(starts))]
        last_start = starts[-1]
        for position, start in enumerate(starts):
            class_index = rng.randrange(scenario.class_count)
            is_ctor = rng.random() < scenario.constructor_fraction
            op_hash = per_class[class_index][0 if is_ctor else 1 + rng.randrange(2)]
            parent_id = ids[rng.randrange(position)] if position > 0 else None
            # ancestors come earlier in the tree, so give them later ends
            end = last_start + (len(starts) - position) * 10_000
            yield DynamicRecord(
                trace_id=trace_id,
                span_id=ids[position],
                parent_span_id=parent_id,
                start_nanos=start,
                end_nanos=end,
                structure_hash=op_hash,
            )
        sequence += 1
        if limit_ns is not None and clock_ns >= limit_ns:
            return


def run_synth(
    scenario: SynthScenario,
    target: tuple[str, int],
    connections: int = 1,
    stop: threading.Event | None = None,
) -> ReplaySummary:
    """Stream a synthetic workload at an ingest endpoint until the scenario's
    duration elapses or `stop` is set. With N connections the rate is split
    evenly and each connection runs an independently seeded stream."""
    if connections <= 1:
        return send_records(generate_synth(scenario), target, speed=1.0, stop=stop)

    summaries: list[ReplaySummary | None] = [None] * connections
    errors: list[BaseException] = []

    def run(index: int) -> None:
        shifted = dataclasses.replace(
            scenario,
            calls_per_second=scenario.calls_per_second / connections,
            seed=scenario.seed + index,
        )
        try:
            summaries[index] = send_records(generate_synth(shifted), target, 1.0, stop)
        except BaseException as exc:
            errors.append(exc)

    started = time.monotonic()
    threads = [threading.Thread(target=run, args=(i,), daemon=True) for i in range(connections)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()
    if errors:
        raise errors[0]
    total = sum(s.records_sent for s in summaries if s is not None)
    return ReplaySummary(records_sent=total, duration_seconds=time.monotonic() - started)


# ------------------------------------------------------------------- fixture

PETCLINIC_HOST = "demo-host"
PETCLINIC_APP = "spring-petclinic"

_MODEL = "org.springframework.samples.petclinic.model"
_OWNER_PKG = "org.springframework.samples.petclinic.owner"
_VET_PKG = "org.springframework.samples.petclinic.vet"
_FILTER_PKG = "org.springframework.web.filter"

_MS = 1_000_000  # nanoseconds per millisecond


def petclinic_fixture() -> tuple[MonitoringRecord, ...]:
    """The PetClinic-like acceptance workload, fitting one update window.

    In a single covering window it produces 46 constructor calls received by
    BaseEntity, of which exactly 24 come from Person (and 22 from NamedEntity),
    so BaseEntity has exactly two communication partners.
    """
    fqns = {
        "filter": f"{_FILTER_PKG}.OncePerRequestFilter.doFilter",
        "owner_ctrl": f"{_OWNER_PKG}.OwnerController.processCreationForm",
        "pet_ctrl": f"{_OWNER_PKG}.PetController.processCreationForm",
        "vet_ctrl": f"{_VET_PKG}.VetController.showVetList",
        "owner": f"{_MODEL}.Owner.<init>",
        "person": f"{_MODEL}.Person.<init>",
        "base": f"{_MODEL}.BaseEntity.<init>",
        "pet": f"{_MODEL}.Pet.<init>",
        "named": f"{_MODEL}.NamedEntity.<init>",
        "vet": f"{_MODEL}.Vet.<init>",
        "specialty": f"{_MODEL}.Specialty.<init>",
    }
    hashes = {
        key: _stable_hash(PETCLINIC_HOST, PETCLINIC_APP, fqn) for key, fqn in fqns.items()
    }
    records: list[MonitoringRecord] = [
        StructuralRecord(hashes[key], PETCLINIC_HOST, PETCLINIC_APP, fqn)
        for key, fqn in sorted(fqns.items())
    ]

    sequence = 0

    def span(
        trace: str,
        key: str,
        start_ns: int,
        end_ns: int,
        parent: str | None,
    ) -> str:
        nonlocal sequence
        span_id = f"sp{sequence:04d}"
        sequence += 1
        records.append(
            DynamicRecord(
                trace_id=trace,
                span_id=span_id,
                parent_span_id=parent,
                start_nanos=start_ns,
                end_nanos=end_ns,
                structure_hash=hashes[key],
            )
        )
        return span_id

    def chain(trace: str, keys: list[str], base_ns: int) -> None:
        # Nested chain: each call starts 1 ms after its parent and ends before it.
        parent: str | None = None
        depth = len(keys)
        for position, key in enumerate(keys):
            start = base_ns + position * _MS
            end = base_ns + (2 * depth - position) * _MS
            parent = span(trace, key, start, end, parent)

    for j in range(24):
        chain(f"owner-flow-{j:02d}", ["filter", "owner_ctrl", "owner", "person", "base"], (10 + 20 * j) * _MS)
    for j in range(22):
        chain(f"pet-flow-{j:02d}", ["filter", "pet_ctrl", "pet", "named", "base"], (510 + 19 * j) * _MS)

    vet_base = 940 * _MS
    root = span("vet-flow", "vet_ctrl", vet_base, vet_base + 40 * _MS, None)
    for k in range(30):
        start = vet_base + (k + 1) * 100_000
        span("vet-flow", "vet", start, start + 50_000, root)
    for k in range(28):
        start = vet_base + 4 * _MS + (k + 1) * 100_000
        span("vet-flow", "specialty", start, start + 50_000, root)

    return tuple(records)


def fixture_path() -> Path:
    """Path of the bundled, pre-rendered fixture script."""
    return Path(__file__).parent / "fixtures" / "petclinic.ndjson"
