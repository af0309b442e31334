"""Live software-city engine: trace ingestion, coupling metrics, heat maps."""

from .config import ConfigError, EngineConfig, load_config
from .engine import Engine, NoSnapshotError, Snapshot, UnknownMetricError
from .heatmap import HeatmapMode, HeatmapView, ScoreHistory, value_to_color
from .metrics import MetricDescriptor, MetricPlugin, MetricRegistry, MetricScores
from .replay import (
    ReplayScript,
    SynthScenario,
    fixture_path,
    load_script,
    petclinic_fixture,
    replay,
)
from .server import CityServer
from .structure import ApplicationTree, Landscape
from .traces import CallEvent, Span, Trace, assemble, derive_call_events
from .wire import (
    DynamicRecord,
    HashCollisionError,
    StructuralRecord,
    StructureRegistry,
    WireError,
    parse_fqn,
    parse_record,
)

__version__ = "0.1.0"

__all__ = [
    "ApplicationTree",
    "CallEvent",
    "CityServer",
    "ConfigError",
    "DynamicRecord",
    "Engine",
    "EngineConfig",
    "HashCollisionError",
    "HeatmapMode",
    "HeatmapView",
    "Landscape",
    "MetricDescriptor",
    "MetricPlugin",
    "MetricRegistry",
    "MetricScores",
    "NoSnapshotError",
    "ReplayScript",
    "ScoreHistory",
    "Snapshot",
    "Span",
    "StructuralRecord",
    "StructureRegistry",
    "SynthScenario",
    "Trace",
    "UnknownMetricError",
    "WireError",
    "assemble",
    "derive_call_events",
    "load_script",
    "parse_fqn",
    "parse_record",
    "fixture_path",
    "petclinic_fixture",
    "replay",
    "load_config",
    "value_to_color",
]
