"""Per-class dynamic coupling metrics over one window's call events.

Four built-in metrics ship with the registry:

  instance_count  constructor calls received by a class
  ic_cd           calls initiated by a class (import coupling)
  ec_cd           calls received by a class (export coupling)
  iec_cd          ic_cd + ec_cd

Root events (no observed caller) count toward the callee's ec_cd but toward
nobody's ic_cd. Self-calls count toward both sides of the same class.
Additional metrics can be registered as plugins; a plugin failure is isolated
to the tick it happened in.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Literal, Mapping, Sequence

from .traces import CallEvent

if TYPE_CHECKING:
    from .structure import ApplicationTree

logger = logging.getLogger(__name__)

Window = tuple[int, int]
EMPTY_WINDOW: Window = (0, 0)


class DuplicateMetricError(ValueError):
    pass


@dataclass(frozen=True)
class MetricDescriptor:
    metric_id: str
    display_name: str
    description: str
    value_kind: Literal["count", "score"] = "count"

    def to_dict(self) -> dict:
        return {
            "metricId": self.metric_id,
            "displayName": self.display_name,
            "description": self.description,
            "valueKind": self.value_kind,
        }


@dataclass(frozen=True)
class MetricScores:
    metric_id: str
    window: Window
    values: Mapping[str, float]  # class_id -> value; zero-activity classes may be absent


ComputeFn = Callable[[Sequence[CallEvent], "ApplicationTree | None"], Mapping[str, float]]


@dataclass(frozen=True)
class MetricPlugin:
    descriptor: MetricDescriptor
    compute: ComputeFn


def instance_count(events: Sequence[CallEvent], window: Window = EMPTY_WINDOW) -> MetricScores:
    values: dict[str, float] = {}
    for event in events:
        if event.is_constructor_call:
            values[event.callee_class_id] = values.get(event.callee_class_id, 0) + 1
    return MetricScores("instance_count", window, values)


def ic_cd(events: Sequence[CallEvent], window: Window = EMPTY_WINDOW) -> MetricScores:
    values: dict[str, float] = {}
    for event in events:
        if event.caller_class_id is not None:
            values[event.caller_class_id] = values.get(event.caller_class_id, 0) + 1
    return MetricScores("ic_cd", window, values)


def ec_cd(events: Sequence[CallEvent], window: Window = EMPTY_WINDOW) -> MetricScores:
    values: dict[str, float] = {}
    for event in events:
        values[event.callee_class_id] = values.get(event.callee_class_id, 0) + 1
    return MetricScores("ec_cd", window, values)


def iec_cd(events: Sequence[CallEvent], window: Window = EMPTY_WINDOW) -> MetricScores:
    values = dict(ic_cd(events).values)
    for class_id, received in ec_cd(events).values.items():
        values[class_id] = values.get(class_id, 0) + received
    return MetricScores("iec_cd", window, values)


_BUILTIN_FNS = {
    "instance_count": instance_count,
    "ic_cd": ic_cd,
    "ec_cd": ec_cd,
    "iec_cd": iec_cd,
}

BUILTIN_DESCRIPTORS = (
    MetricDescriptor(
        "instance_count",
        "Instance count",
        "Number of objects created for a class in the window",
    ),
    MetricDescriptor(
        "ic_cd",
        "Import coupling (IC_CD)",
        "Operation calls initiated by objects of a class in the window",
    ),
    MetricDescriptor(
        "ec_cd",
        "Export coupling (EC_CD)",
        "Operation calls received by objects of a class in the window",
    ),
    MetricDescriptor(
        "iec_cd",
        "Import & export coupling",
        "Operation calls sent plus received by objects of a class in the window",
    ),
)

BUILTIN_METRIC_IDS = tuple(d.metric_id for d in BUILTIN_DESCRIPTORS)


def _builtin_plugin(descriptor: MetricDescriptor) -> MetricPlugin:
    fn = _BUILTIN_FNS[descriptor.metric_id]

    def compute(events: Sequence[CallEvent], tree: "ApplicationTree | None") -> Mapping[str, float]:
        return fn(events).values

    return MetricPlugin(descriptor=descriptor, compute=compute)


@dataclass
class MetricRegistry:
    """Holds metric plugins, built-ins included. Registration is exclusive per id."""

    _plugins: dict[str, MetricPlugin] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for descriptor in BUILTIN_DESCRIPTORS:
            self._plugins[descriptor.metric_id] = _builtin_plugin(descriptor)

    def register(self, plugin: MetricPlugin) -> None:
        metric_id = plugin.descriptor.metric_id
        if not metric_id:
            raise ValueError("metric_id must be non-empty")
        if metric_id in self._plugins:
            raise DuplicateMetricError(f"metric {metric_id!r} is already registered")
        self._plugins[metric_id] = plugin

    def descriptors(self) -> list[MetricDescriptor]:
        return [self._plugins[mid].descriptor for mid in sorted(self._plugins)]

    def metric_ids(self) -> list[str]:
        return sorted(self._plugins)

    def __contains__(self, metric_id: str) -> bool:
        return metric_id in self._plugins

    def compute_all(
        self,
        events: Sequence[CallEvent],
        tree: "ApplicationTree | None",
        window: Window,
    ) -> dict[str, MetricScores]:
        """Run every plugin over the window's events. A plugin that raises is
        skipped for this tick and logged; the tick itself survives."""
        scores: dict[str, MetricScores] = {}
        for metric_id in sorted(self._plugins):
            plugin = self._plugins[metric_id]
            try:
                values = plugin.compute(events, tree)
            except Exception:
                logger.exception("metric %s failed; omitted for window %s", metric_id, window)
                continue
            scores[metric_id] = MetricScores(metric_id, window, dict(values))
        return scores
