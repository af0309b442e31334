"""Tick pipeline semantics: windowing, buffering rules, history advancement,
per-application snapshots, and the read API."""

import json

import pytest

from citypulse.config import EngineConfig
from citypulse.engine import Engine, NoSnapshotError, UnknownApplicationError, UnknownMetricError
from citypulse.metrics import MetricDescriptor, MetricPlugin
from citypulse.replay import petclinic_fixture
from citypulse.wire import record_to_line

from tests.conftest import span, structural

T0 = 10**18  # an arbitrary wall-clock origin, nanoseconds
TICK = 1.0
TICK_NS = 10**9


def make_engine(**overrides) -> Engine:
    defaults = dict(tick_seconds=TICK, window_size=3)
    defaults.update(overrides)
    return Engine(EngineConfig(**defaults))


def feed(engine: Engine, *records) -> None:
    for record in records:
        engine.submit(record)


def test_tick_windows_are_nominal_and_contiguous():
    engine = make_engine()
    engine.submit(structural("s1", "a.B.run"))
    first = engine.tick(now_ns=T0)
    # jittered scheduler: late call does not move the nominal boundary
    second = engine.tick(now_ns=T0 + int(1.37 * TICK_NS))
    third = engine.tick(now_ns=T0 + int(2.9 * TICK_NS))
    windows = [snap.window for snap in (*first, *second, *third)]
    assert windows[0] == (T0 - TICK_NS, T0)
    assert windows[1] == (T0, T0 + TICK_NS)
    assert windows[2] == (T0 + TICK_NS, T0 + 2 * TICK_NS)
    for (_, end), (start, _) in zip(windows, windows[1:]):
        assert start == end


def test_tick_index_increments():
    engine = make_engine()
    engine.submit(structural("s1", "a.B.run"))
    for expected in range(4):
        snaps = engine.tick(now_ns=T0 + expected * TICK_NS)
        assert [s.tick_index for s in snaps] == [expected]
    assert engine.tick_count == 4


def test_structural_dedup_counts():
    engine = make_engine()
    line = record_to_line(structural("s1", "a.B.run"))
    accepted, deduplicated = engine.submit_lines([line] * 5)
    assert (accepted, deduplicated) == (1, 4)
    assert len(engine.registry) == 1


def test_fixture_numbers_on_covering_tick():
    engine = make_engine(tick_seconds=2.0)
    for record in petclinic_fixture():
        if hasattr(record, "start_nanos"):
            record = type(record)(
                trace_id=record.trace_id,
                span_id=record.span_id,
                parent_span_id=record.parent_span_id,
                start_nanos=T0 + record.start_nanos,
                end_nanos=T0 + record.end_nanos,
                structure_hash=record.structure_hash,
            )
        engine.submit(record)
    (snap,) = engine.tick(now_ns=T0 + 2 * TICK_NS)
    counts = snap.metric_scores["instance_count"].values
    base = "demo-host/spring-petclinic/org.springframework.samples.petclinic.model.BaseEntity"
    person = "demo-host/spring-petclinic/org.springframework.samples.petclinic.model.Person"
    assert counts[base] == 46
    edge = next(
        e for e in snap.edges if e.caller_class_id == person and e.callee_class_id == base
    )
    assert edge.call_count == 24
    partners = {e.caller_class_id for e in snap.edges if e.callee_class_id == base}
    partners |= {e.callee_class_id for e in snap.edges if e.caller_class_id == base}
    assert len(partners) == 2


def test_determinism_across_engines():
    def run() -> dict:
        engine = make_engine()
        feed(
            engine,
            structural("s1", "a.B.<init>"),
            structural("s2", "a.C.run"),
            span(trace="t", span_id="root", start=T0 + 10, shash="s2"),
            span(trace="t", span_id="kid", parent="root", start=T0 + 20, shash="s1"),
        )
        (snap,) = engine.tick(now_ns=T0 + TICK_NS)
        payload = snap.to_dict()
        payload["stats"].pop("tickMillis")  # wall-clock timing, legitimately varies
        return payload

    assert run() == run()


def test_snapshot_json_stable_for_same_tick():
    engine = make_engine()
    engine.submit(structural("s1", "a.B.run"))
    (snap,) = engine.tick(now_ns=T0)
    assert snap.to_json() == snap.to_json()
    assert engine.latest() is snap


def test_identical_input_two_ticks_same_scores():
    engine = make_engine()
    engine.submit(structural("s1", "a.B.<init>"))
    results = []
    for i in range(2):
        engine.submit(span(trace=f"t{i}", span_id="s", start=T0 + i * TICK_NS + 5, shash="s1"))
        (snap,) = engine.tick(now_ns=T0 + (i + 1) * TICK_NS)
        results.append(snap)
    first, second = results
    assert {m: s.values for m, s in first.metric_scores.items()} == {
        m: s.values for m, s in second.metric_scores.items()
    }
    assert second.tick_index == first.tick_index + 1


def test_histories_advance_exactly_once_per_tick():
    engine = make_engine(window_size=3)
    engine.submit(structural("s1", "a.B.run"))
    for n in range(1, 7):
        engine.tick(now_ns=T0 + n * TICK_NS)
        for metric_id in engine.metrics.metric_ids():
            history = engine.history(metric_id)
            assert len(history) == min(n, 3 + 1)


def test_no_input_tick_decays_aggregate():
    engine = make_engine()
    engine.submit(structural("s1", "a.B.<init>"))
    engine.submit(span(span_id="x", start=T0 + 5, shash="s1"))
    engine.tick(now_ns=T0 + TICK_NS)
    class_id = "h1/app/a.B"
    assert engine.heatmap("instance_count", "aggregated").values[class_id] == 1.0
    (empty_snap,) = engine.tick(now_ns=T0 + 2 * TICK_NS)
    assert empty_snap.metric_scores["instance_count"].values == {}
    assert empty_snap.edges == ()
    assert engine.heatmap("instance_count", "aggregated").values[class_id] == 0.5
    # structure persists even though the window was silent
    assert empty_snap.structure["packages"][0]["classes"][0]["classId"] == class_id


def test_span_before_structure_is_buffered_one_tick():
    engine = make_engine()
    engine.submit(span(span_id="x", start=T0 + 5, shash="late"))
    assert engine.tick(now_ns=T0 + TICK_NS) == []  # nothing resolvable yet
    engine.submit(structural("late", "a.B.run", host="hh", app="aa"))
    (snap,) = engine.tick(now_ns=T0 + 2 * TICK_NS)
    assert snap.stats.span_count == 1
    assert snap.stats.dropped_records == 0


def test_unresolvable_span_dropped_after_one_retry():
    engine = make_engine()
    engine.submit(structural("s1", "a.B.run"))  # make the app exist
    engine.submit(span(span_id="x", start=T0 + 5, shash="ghost"))
    engine.tick(now_ns=T0 + TICK_NS)
    assert engine.dropped_records == 0  # still waiting one tick
    (snap,) = engine.tick(now_ns=T0 + 2 * TICK_NS)
    assert engine.dropped_records == 1
    assert snap.stats.dropped_records == 1


def test_future_span_lands_in_its_window():
    engine = make_engine()
    engine.submit(structural("s1", "a.B.run"))
    # starts two windows ahead of the first tick boundary
    engine.submit(span(span_id="x", start=T0 + TICK_NS + 10, shash="s1"))
    (snap1,) = engine.tick(now_ns=T0)
    assert snap1.stats.span_count == 0
    (snap2,) = engine.tick(now_ns=T0 + TICK_NS)
    assert snap2.stats.span_count == 0  # still future at [T0, T0+1s)
    (snap3,) = engine.tick(now_ns=T0 + 2 * TICK_NS)
    assert snap3.stats.span_count == 1


def test_late_arrival_included_via_widened_window():
    engine = make_engine()
    engine.submit(structural("s1", "a.B.run"))
    engine.tick(now_ns=T0 + TICK_NS)
    # arrives now, but stamped inside the PREVIOUS window
    engine.submit(span(span_id="x", start=T0 + 5, shash="s1"))
    (snap,) = engine.tick(now_ns=T0 + 2 * TICK_NS)
    assert snap.stats.span_count == 1


def test_orphan_grace_joins_parent_next_tick():
    engine = make_engine()
    feed(engine, structural("s1", "a.B.run"), structural("s2", "a.C.run"))
    engine.tick(now_ns=T0)
    engine.submit(span(trace="t", span_id="kid", parent="root", start=T0 + 10, shash="s1"))
    (snap1,) = engine.tick(now_ns=T0 + TICK_NS)
    assert snap1.stats.span_count == 0  # orphan held back one tick
    engine.submit(span(trace="t", span_id="root", start=T0 + 5, shash="s2"))
    (snap2,) = engine.tick(now_ns=T0 + 2 * TICK_NS)
    assert snap2.stats.span_count == 2
    assert snap2.stats.orphan_count == 0
    assert snap2.stats.trace_count == 1
    # the reunited trace produced a caller edge
    assert [(e.caller_class_id, e.callee_class_id) for e in snap2.edges] == [
        ("h1/app/a.C", "h1/app/a.B")
    ]


def test_orphan_becomes_root_after_grace_expires():
    engine = make_engine()
    engine.submit(structural("s1", "a.B.run"))
    engine.tick(now_ns=T0)
    engine.submit(span(trace="t", span_id="kid", parent="ghost", start=T0 + 10, shash="s1"))
    (snap1,) = engine.tick(now_ns=T0 + TICK_NS)
    assert snap1.stats.span_count == 0
    (snap2,) = engine.tick(now_ns=T0 + 2 * TICK_NS)
    assert snap2.stats.span_count == 1
    assert snap2.stats.orphan_count == 1


def test_orphan_descendants_deferred_together():
    engine = make_engine()
    engine.submit(structural("s1", "a.B.run"))
    engine.tick(now_ns=T0)
    feed(
        engine,
        span(trace="t", span_id="kid", parent="ghost", start=T0 + 10, shash="s1"),
        span(trace="t", span_id="grandkid", parent="kid", start=T0 + 11, shash="s1"),
    )
    (snap1,) = engine.tick(now_ns=T0 + TICK_NS)
    assert snap1.stats.span_count == 0  # whole subtree held
    (snap2,) = engine.tick(now_ns=T0 + 2 * TICK_NS)
    assert snap2.stats.span_count == 2
    assert snap2.stats.orphan_count == 1  # only the subtree root is an orphan


def test_cyclic_trace_excluded_and_counted():
    engine = make_engine()
    engine.submit(structural("s1", "a.B.run"))
    feed(
        engine,
        span(trace="t", span_id="a", parent="b", start=T0 + 1, shash="s1"),
        span(trace="t", span_id="b", parent="a", start=T0 + 2, shash="s1"),
    )
    (snap,) = engine.tick(now_ns=T0 + TICK_NS)
    assert snap.stats.invalid_traces == 1
    assert snap.stats.span_count == 0


def test_failing_plugin_isolated_and_history_kept():
    engine = make_engine()

    def explode(events, tree):
        raise RuntimeError("boom")

    engine.register_metric(MetricPlugin(MetricDescriptor("bad", "Bad", "", "score"), explode))
    engine.submit(structural("s1", "a.B.run"))
    for n in range(1, 4):
        (snap,) = engine.tick(now_ns=T0 + n * TICK_NS)
        assert "bad" not in snap.metric_scores
        assert set(snap.metric_scores) == set(engine.metrics.metric_ids()) - {"bad"}
        assert len(engine.history("bad")) == min(n, 4)
    # a broken plugin renders as all-zero, not as an error
    assert engine.heatmap("bad", "snapshot").values == {}


def test_custom_plugin_computed_every_tick():
    engine = make_engine()
    calls = []

    def compute(events, tree):
        calls.append(len(events))
        return {"a.B": 1.0}

    engine.register_metric(MetricPlugin(MetricDescriptor("mine", "Mine", "", "score"), compute))
    engine.submit(structural("s1", "a.B.run"))
    engine.tick(now_ns=T0)
    engine.tick(now_ns=T0 + TICK_NS)
    assert calls == [0, 0]
    assert engine.heatmap("mine", "aggregated").values == {"a.B": 1.5}


def test_two_apps_one_snapshot_each():
    engine = make_engine()
    feed(
        engine,
        structural("s1", "a.B.run", host="alpha", app="x"),
        structural("s2", "a.B.run", host="beta", app="y"),
    )
    snaps = engine.tick(now_ns=T0)
    assert [s.app_key for s in snaps] == [("alpha", "x"), ("beta", "y")]
    assert len({s.tick_index for s in snaps}) == 1
    assert engine.default_app() == ("alpha", "x")
    assert engine.latest(("beta", "y")).app_key == ("beta", "y")
    with pytest.raises(UnknownApplicationError):
        engine.latest(("nope", "nope"))


def test_read_errors():
    engine = make_engine()
    with pytest.raises(NoSnapshotError):
        engine.latest()
    engine.submit(structural("s1", "a.B.run"))
    with pytest.raises(NoSnapshotError):
        engine.latest()  # app known, but no tick yet
    engine.tick(now_ns=T0)
    with pytest.raises(UnknownMetricError):
        engine.heatmap("nope", "snapshot")
    with pytest.raises(ValueError):
        engine.heatmap("ic_cd", "sideways")
    engine.heatmap("ic_cd", "windowed")  # warm-up: computed against the only window


def test_snapshot_ring_retention():
    engine = make_engine(window_size=3)
    engine.submit(structural("s1", "a.B.run"))
    for n in range(10):
        engine.tick(now_ns=T0 + n * TICK_NS)
    ring = engine._rings[("h1", "app")]
    assert len(ring) == 4  # W + 1
    assert [s.tick_index for s in ring] == [6, 7, 8, 9]


def test_snapshot_serialization_shape():
    engine = make_engine()
    engine.submit(structural("s1", "a.B.<init>"))
    engine.submit(span(span_id="x", start=T0 + 1, shash="s1"))
    (snap,) = engine.tick(now_ns=T0 + TICK_NS)
    payload = json.loads(snap.to_json())
    assert payload["app"] == {"hostname": "h1", "appName": "app"}
    assert payload["window"]["endNanos"] - payload["window"]["startNanos"] == TICK_NS
    assert {b["kind"] for b in payload["geometry"]["boxes"]} == {
        "foundation",
        "package",
        "class",
    }
    assert payload["metricScores"]["instance_count"] == {"h1/app/a.B": 1}
    assert payload["stats"]["spanCount"] == 1
