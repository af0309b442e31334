"""Temporal heat-map modes, per-metric score history, and value-to-color mapping.

Three modes transform raw per-window scores into displayed values:

  snapshot    the current window's scores, unchanged
  aggregated  recurrence s_t = m_t + decay * s_{t-1} (default decay 0.5), so a
              class scoring a constant m converges toward m / (1 - decay)
  windowed    latest window minus the window W ticks earlier (oldest available
              during warm-up); values range from negative to positive

The legend range is the min/max over displayed values and is recomputed every
tick. Colors interpolate linearly along a blue -> cyan -> green -> yellow -> red
gradient; a degenerate range (min = max) renders mid-gradient.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from .config import DEFAULT_GRADIENT
from .metrics import MetricScores

Gradient = tuple[tuple[int, int, int], ...]


class HeatmapMode(str, Enum):
    SNAPSHOT = "snapshot"
    AGGREGATED = "aggregated"
    WINDOWED = "windowed"

    @property
    def next(self) -> "HeatmapMode":
        order = MODE_CYCLE
        return order[(order.index(self) + 1) % len(order)]

    @property
    def previous(self) -> "HeatmapMode":
        order = MODE_CYCLE
        return order[(order.index(self) - 1) % len(order)]


MODE_CYCLE: tuple[HeatmapMode, ...] = (
    HeatmapMode.SNAPSHOT,
    HeatmapMode.AGGREGATED,
    HeatmapMode.WINDOWED,
)


def snapshot_mode(current: MetricScores) -> dict[str, float]:
    return dict(current.values)


def aggregate_step(
    previous_aggregate: Mapping[str, float],
    current: Mapping[str, float],
    decay: float = 0.5,
) -> dict[str, float]:
    """One step of the continuous aggregation recurrence.

    s_t(c) = m_t(c) + decay * s_{t-1}(c), with m_t(c) = 0 for classes absent
    this window and s_{t-1}(c) = 0 for classes never seen before; a first score
    is therefore taken on its own.
    """
    aggregate: dict[str, float] = {}
    for class_id in previous_aggregate.keys() | current.keys():
        aggregate[class_id] = current.get(class_id, 0.0) + decay * previous_aggregate.get(class_id, 0.0)
    return aggregate


class ScoreHistory:
    """Rolling per-metric state: the last W+1 raw windows plus the running aggregate.

    With capacity W+1 the oldest retained window is exactly W ticks behind the
    latest once the ring is full, which is what windowed mode compares against.
    """

    def __init__(self, metric_id: str, window_size: int, decay: float = 0.5) -> None:
        if window_size < 1:
            raise ValueError(f"window_size must be >= 1, got {window_size}")
        self.metric_id = metric_id
        self.window_size = window_size
        self.decay = decay
        self._ring: deque[MetricScores] = deque(maxlen=window_size + 1)
        self._aggregate: dict[str, float] = {}

    def __len__(self) -> int:
        return len(self._ring)

    def advance(self, current: MetricScores) -> None:
        """Fold one window's raw scores in. Must be called exactly once per tick."""
        if current.metric_id != self.metric_id:
            raise ValueError(f"expected scores for {self.metric_id!r}, got {current.metric_id!r}")
        self._aggregate = aggregate_step(self._aggregate, current.values, self.decay)
        self._ring.append(current)

    def latest(self) -> MetricScores | None:
        return self._ring[-1] if self._ring else None

    def snapshot_values(self) -> dict[str, float]:
        return dict(self._ring[-1].values) if self._ring else {}

    def aggregated_values(self) -> dict[str, float]:
        return dict(self._aggregate)

    def windowed_values(self) -> dict[str, float]:
        """Latest minus the window W ticks back (oldest available during warm-up)."""
        if not self._ring:
            return {}
        latest = self._ring[-1].values
        past = self._ring[0].values
        return {
            class_id: latest.get(class_id, 0.0) - past.get(class_id, 0.0)
            for class_id in latest.keys() | past.keys()
        }

    def values_for(self, mode: HeatmapMode) -> dict[str, float]:
        if mode is HeatmapMode.SNAPSHOT:
            return self.snapshot_values()
        if mode is HeatmapMode.AGGREGATED:
            return self.aggregated_values()
        return self.windowed_values()


def legend_range(values: Mapping[str, float]) -> tuple[float, float]:
    if not values:
        return (0.0, 0.0)
    return (min(values.values()), max(values.values()))


def value_to_color(
    value: float,
    legend_min: float,
    legend_max: float,
    gradient: Gradient = DEFAULT_GRADIENT,
) -> tuple[int, int, int]:
    """Map a score to an RGB color by linear normalization over the legend range
    and piecewise-linear interpolation along the gradient stops."""
    if not math.isfinite(value):
        raise ValueError(f"cannot color non-finite value {value!r}")
    if legend_min > legend_max:
        raise ValueError(f"legend_min {legend_min} exceeds legend_max {legend_max}")
    if legend_min == legend_max:
        u = 0.5
    else:
        u = (value - legend_min) / (legend_max - legend_min)
        u = 0.0 if u < 0.0 else 1.0 if u > 1.0 else u

    position = u * (len(gradient) - 1)
    index = min(int(position), len(gradient) - 2)
    fraction = position - index
    low, high = gradient[index], gradient[index + 1]
    return (
        round(low[0] + (high[0] - low[0]) * fraction),
        round(low[1] + (high[1] - low[1]) * fraction),
        round(low[2] + (high[2] - low[2]) * fraction),
    )


@dataclass(frozen=True)
class HeatmapView:
    """One (metric, mode) scalar field plus its legend, ready to render."""

    metric_id: str
    mode: HeatmapMode
    tick_index: int
    values: Mapping[str, float]
    legend_min: float
    legend_max: float
    gradient_stops: Gradient = DEFAULT_GRADIENT

    def color_of(self, class_id: str) -> tuple[int, int, int]:
        return value_to_color(
            self.values.get(class_id, 0.0), self.legend_min, self.legend_max, self.gradient_stops
        )

    def to_dict(self) -> dict:
        return {
            "metricId": self.metric_id,
            "mode": self.mode.value,
            "tickIndex": self.tick_index,
            "values": dict(sorted(self.values.items())),
            "legendMin": self.legend_min,
            "legendMax": self.legend_max,
            "gradientStops": [list(stop) for stop in self.gradient_stops],
        }


def build_view(
    history: ScoreHistory,
    mode: HeatmapMode,
    tick_index: int,
    gradient: Gradient = DEFAULT_GRADIENT,
) -> HeatmapView:
    values = history.values_for(mode)
    low, high = legend_range(values)
    return HeatmapView(
        metric_id=history.metric_id,
        mode=mode,
        tick_index=tick_index,
        values=values,
        legend_min=low,
        legend_max=high,
        gradient_stops=gradient,
    )
