"""Replay scripts, pacing/rebasing, synthetic workloads, and the bundled fixture."""

import socket
import threading
import time

import pytest

from citypulse.replay import (
    ReplayScript,
    ScriptError,
    SynthScenario,
    generate_synth,
    load_script,
    petclinic_fixture,
    replay,
    save_script,
    send_records,
)
from citypulse.wire import DynamicRecord, StructuralRecord, parse_record, record_to_line

from tests.conftest import span, structural


class TcpSink:
    """Accepts connections and captures complete lines, per connection."""

    def __init__(self) -> None:
        self.connections: list[list[bytes]] = []
        self._lock = threading.Lock()

    def __enter__(self) -> "TcpSink":
        self._server = socket.create_server(("127.0.0.1", 0))
        self.port = self._server.getsockname()[1]
        self._readers: list[threading.Thread] = []
        self._acceptor = threading.Thread(target=self._accept_loop, daemon=True)
        self._acceptor.start()
        return self

    def __exit__(self, *exc) -> None:
        self._server.close()
        for reader in self._readers:
            reader.join(timeout=5)

    def _accept_loop(self) -> None:
        while True:
            try:
                conn, _ = self._server.accept()
            except OSError:
                return
            lines: list[bytes] = []
            with self._lock:
                self.connections.append(lines)
            reader = threading.Thread(target=self._read, args=(conn, lines), daemon=True)
            reader.start()
            self._readers.append(reader)

    def _read(self, conn: socket.socket, lines: list[bytes]) -> None:
        buffer = b""
        with conn:
            while True:
                chunk = conn.recv(1 << 16)
                if not chunk:
                    break
                buffer += chunk
        lines.extend(line for line in buffer.split(b"\n") if line.strip())

    @property
    def all_lines(self) -> list[bytes]:
        with self._lock:
            return [line for lines in self.connections for line in lines]


# ------------------------------------------------------------------- scripts


def test_script_roundtrip(tmp_path):
    records = [structural("s1", "a.B.run"), span(span_id="x", start=10, shash="s1")]
    path = tmp_path / "script.ndjson"
    assert save_script(records, path) == 2
    assert load_script(path) == tuple(records)


def test_load_reports_parse_error_line(tmp_path):
    path = tmp_path / "bad.ndjson"
    path.write_text(record_to_line(structural("s1", "a.B.run")) + "\nnot json\n")
    with pytest.raises(ScriptError) as excinfo:
        load_script(path)
    assert excinfo.value.line_number == 2
    assert "line 2" in str(excinfo.value)


def test_load_rejects_decreasing_offsets(tmp_path):
    records = [
        structural("s1", "a.B.run"),
        span(span_id="x", start=100, shash="s1"),
        span(span_id="y", trace="t2", start=50, shash="s1"),
    ]
    path = tmp_path / "bad.ndjson"
    save_script(records, path)
    with pytest.raises(ScriptError, match="non-decreasing"):
        load_script(path)


def test_load_rejects_undefined_hash(tmp_path):
    path = tmp_path / "bad.ndjson"
    save_script([span(span_id="x", start=1, shash="ghost")], path)
    with pytest.raises(ScriptError, match="undefined structure hash"):
        load_script(path)


def test_load_skips_blank_lines(tmp_path):
    path = tmp_path / "script.ndjson"
    path.write_text("\n" + record_to_line(structural("s1", "a.B.run")) + "\n\n")
    assert len(load_script(path)) == 1


# ------------------------------------------------------------------- sending


def test_empty_send():
    with TcpSink() as sink:
        summary = send_records([], ("127.0.0.1", sink.port))
    assert summary.records_sent == 0
    assert summary.duration_seconds < 1.0


def test_replay_lossless_and_ordered():
    records = petclinic_fixture()
    with TcpSink() as sink:
        summary = replay(ReplayScript(records=records, speed=50.0), ("127.0.0.1", sink.port))
        time.sleep(0.2)
        lines = sink.all_lines
    assert summary.records_sent == len(records)
    assert len(lines) == len(records)
    # structure lines pass through verbatim, in order
    sent_structs = [record_to_line(r).encode() for r in records if isinstance(r, StructuralRecord)]
    got_structs = [l for l in lines if b'"structure"' in l]
    assert got_structs == sent_structs
    # span ids preserved in order too
    sent_ids = [r.span_id for r in records if isinstance(r, DynamicRecord)]
    got_ids = [parse_record(l).span_id for l in lines if b'"span"' in l]
    assert got_ids == sent_ids


def test_replay_rebases_and_scales_gaps():
    second = 1_000_000_000
    records = (
        structural("s1", "a.B.run"),
        span(span_id="x", start=0, shash="s1"),
        span(span_id="y", trace="t2", start=2 * second, shash="s1"),
    )
    before = time.time_ns()
    with TcpSink() as sink:
        summary = send_records(records, ("127.0.0.1", sink.port), speed=10.0)
        time.sleep(0.2)
        spans = [parse_record(l) for l in sink.all_lines if b'"span"' in l]
    # 2 s of script at speed 10 -> ~0.2 s of wall time
    assert 0.15 <= summary.duration_seconds < 1.5
    by_id = {s.span_id: s for s in spans}
    assert by_id["x"].start_nanos >= before
    assert by_id["y"].start_nanos - by_id["x"].start_nanos == 2 * second // 10


def test_replay_loop_stops_on_event():
    records = (structural("s1", "a.B.run"), span(span_id="x", start=100_000_000, shash="s1"))
    stop = threading.Event()
    done: list[int] = []
    with TcpSink() as sink:
        script = ReplayScript(records=records, loop=True)
        worker = threading.Thread(
            target=lambda: done.append(replay(script, ("127.0.0.1", sink.port), stop=stop).records_sent),
            daemon=True,
        )
        worker.start()
        time.sleep(0.35)
        stop.set()
        worker.join(timeout=5)
        assert not worker.is_alive()
    assert done and done[0] >= len(records)  # at least one full pass before the stop


def test_replay_two_connections_partition_by_trace():
    records = petclinic_fixture()
    with TcpSink() as sink:
        summary = replay(
            ReplayScript(records=records, speed=100.0), ("127.0.0.1", sink.port), connections=2
        )
        time.sleep(0.3)
        connections = [c for c in sink.connections if c]
    struct_count = sum(1 for r in records if isinstance(r, StructuralRecord))
    span_count = sum(1 for r in records if isinstance(r, DynamicRecord))
    assert len(connections) == 2
    # structure is broadcast to every connection; spans are partitioned
    assert summary.records_sent == 2 * struct_count + span_count
    for lines in connections:
        assert sum(1 for l in lines if b'"structure"' in l) == struct_count
    total_spans = sum(sum(1 for l in lines if b'"span"' in l) for lines in connections)
    assert total_spans == span_count
    # a trace never splits across connections
    seen: dict[str, int] = {}
    for index, lines in enumerate(connections):
        for line in lines:
            if b'"span"' in line:
                trace_id = parse_record(line).trace_id
                assert seen.setdefault(trace_id, index) == index


def test_connection_refused_raises_oserror():
    with socket.create_server(("127.0.0.1", 0)) as probe:
        port = probe.getsockname()[1]
    with pytest.raises(OSError):
        send_records([structural("s1", "a.B.run")], ("127.0.0.1", port))


# --------------------------------------------------------------------- synth


def test_synth_deterministic():
    scenario = SynthScenario(seed=42, duration_seconds=2.0)
    first = list(generate_synth(scenario))
    second = list(generate_synth(scenario))
    assert first == second
    assert first != list(generate_synth(SynthScenario(seed=43, duration_seconds=2.0)))


def test_synth_satisfies_wire_invariants(tmp_path):
    # save + load round-trip runs the script validator: hashes defined before
    # use, offsets non-decreasing
    path = tmp_path / "synth.ndjson"
    save_script(generate_synth(SynthScenario(seed=7, duration_seconds=1.0)), path)
    load_script(path)


def test_synth_rate_close_to_requested():
    scenario = SynthScenario(calls_per_second=200.0, duration_seconds=5.0, seed=1)
    spans = [r for r in generate_synth(scenario) if isinstance(r, DynamicRecord)]
    assert len(spans) == pytest.approx(1000, rel=0.05)
    assert max(s.start_nanos for s in spans) < 5_000_000_000


def test_synth_ctor_fraction_zero():
    scenario = SynthScenario(constructor_fraction=0.0, duration_seconds=1.0, seed=5)
    records = list(generate_synth(scenario))
    init_hashes = {
        r.structure_hash for r in records if isinstance(r, StructuralRecord) and r.fqn.endswith("<init>")
    }
    spans = [r for r in records if isinstance(r, DynamicRecord)]
    assert spans
    assert not any(s.structure_hash in init_hashes for s in spans)


def test_synth_phase_schedule_scales_rate():
    base = SynthScenario(calls_per_second=100.0, duration_seconds=4.0, seed=2)
    boosted = SynthScenario(
        calls_per_second=100.0,
        duration_seconds=4.0,
        seed=2,
        phase_schedule=((2.0, 4.0),),
    )
    def spans_in(records, lo_s, hi_s):
        return sum(
            1
            for r in records
            if isinstance(r, DynamicRecord) and lo_s * 1e9 <= r.start_nanos < hi_s * 1e9
        )

    plain = list(generate_synth(base))
    shaped = list(generate_synth(boosted))
    assert spans_in(shaped, 0, 2) == pytest.approx(spans_in(plain, 0, 2), rel=0.1)
    assert spans_in(shaped, 2, 4) == pytest.approx(4 * spans_in(plain, 2, 4), rel=0.1)


def test_synth_validation():
    with pytest.raises(ValueError):
        SynthScenario(class_count=0).validate()
    with pytest.raises(ValueError):
        SynthScenario(constructor_fraction=1.5).validate()
    with pytest.raises(ValueError):
        SynthScenario(phase_schedule=((5.0, 1.0), (1.0, 2.0))).validate()


# ------------------------------------------------------------------- fixture


def test_fixture_deterministic():
    assert petclinic_fixture() == petclinic_fixture()


def test_fixture_is_a_valid_script(tmp_path):
    path = tmp_path / "petclinic.ndjson"
    save_script(petclinic_fixture(), path)
    assert load_script(path) == petclinic_fixture()


def test_fixture_fits_one_default_window():
    spans = [r for r in petclinic_fixture() if isinstance(r, DynamicRecord)]
    assert max(s.end_nanos for s in spans) < 10_000_000_000  # one default tick


def test_fixture_matches_bundled_file():
    from citypulse.replay import fixture_path

    bundled = load_script(fixture_path())
    assert bundled == petclinic_fixture()
