"""Engine configuration loaded from flags, environment, and an optional config file."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

ENV_PREFIX = "CITYPULSE_"
CONFIG_FILE_NAME = "citypulse.conf"

# Blue (cold) -> cyan -> green -> yellow -> red (hot).
DEFAULT_GRADIENT: tuple[tuple[int, int, int], ...] = (
    (0, 0, 255),
    (0, 255, 255),
    (0, 255, 0),
    (255, 255, 0),
    (255, 0, 0),
)

DEFAULT_CONSTRUCTOR_NAMES = frozenset({"<init>", "new"})


class ConfigError(ValueError):
    """Raised when configuration values are missing, malformed, or out of range."""


@dataclass(frozen=True)
class EngineConfig:
    tick_seconds: float = 10.0
    window_size: int = 10
    decay: float = 0.5
    http_port: int = 8080
    ingest_tcp_port: int = 9000
    constructor_names: frozenset[str] = DEFAULT_CONSTRUCTOR_NAMES
    min_class_height: float = 1.0
    max_class_height: float = 6.0
    class_footprint: float = 1.0
    padding: float = 0.3
    gradient_stops: tuple[tuple[int, int, int], ...] = DEFAULT_GRADIENT

    def validate(self) -> None:
        errors = []
        if not self.tick_seconds > 0:
            errors.append(f"tick_seconds must be > 0, got {self.tick_seconds}")
        if self.window_size < 1:
            errors.append(f"window_size must be >= 1, got {self.window_size}")
        if not (0.0 <= self.decay < 1.0):
            errors.append(f"decay must be in [0, 1), got {self.decay}")
        for name in ("http_port", "ingest_tcp_port"):
            port = getattr(self, name)
            # 0 asks the OS for an ephemeral port (handy under test).
            if not (0 <= port < 65536):
                errors.append(f"{name} must be in 0..65535, got {port}")
        if not self.min_class_height > 0:
            errors.append(f"min_class_height must be > 0, got {self.min_class_height}")
        if not self.max_class_height > self.min_class_height:
            errors.append(
                "max_class_height must exceed min_class_height, got "
                f"{self.max_class_height} <= {self.min_class_height}"
            )
        if not self.class_footprint > 0:
            errors.append(f"class_footprint must be > 0, got {self.class_footprint}")
        if self.padding < 0:
            errors.append(f"padding must be >= 0, got {self.padding}")
        if len(self.gradient_stops) < 2:
            errors.append(f"gradient_stops needs at least 2 stops, got {len(self.gradient_stops)}")
        for stop in self.gradient_stops:
            if len(stop) != 3 or not all(isinstance(c, int) and 0 <= c <= 255 for c in stop):
                errors.append(f"gradient stop {stop!r} is not an (r, g, b) triple of 0..255 ints")
                break
        if not self.constructor_names:
            errors.append("constructor_names must not be empty")
        if errors:
            raise ConfigError("; ".join(errors))

    @property
    def tick_nanos(self) -> int:
        return int(round(self.tick_seconds * 1e9))


def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_gradient(raw: str) -> tuple[tuple[int, int, int], ...]:
    stops = []
    for part in raw.split(";"):
        part = part.strip()
        if not part:
            continue
        channels = [int(c.strip()) for c in part.split(",")]
        if len(channels) != 3:
            raise ValueError(f"gradient stop {part!r} is not r,g,b")
        stops.append(tuple(channels))
    return tuple(stops)


def _parse_names(raw: str) -> frozenset[str]:
    return frozenset(name.strip() for name in raw.split(",") if name.strip())


_PARSERS: dict[str, Any] = {
    "tick_seconds": float,
    "window_size": int,
    "decay": float,
    "http_port": int,
    "ingest_tcp_port": int,
    "constructor_names": _parse_names,
    "min_class_height": float,
    "max_class_height": float,
    "class_footprint": float,
    "padding": float,
    "gradient_stops": _parse_gradient,
}

_FIELD_NAMES = {f.name for f in fields(EngineConfig)}


def _canonical_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse a key=value config file. Lines starting with # are comments."""
    values: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
        key, _, value = stripped.partition("=")
        values[_canonical_key(key)] = value.strip().strip('"')
    return values


def _env_overrides(env: Mapping[str, str]) -> dict[str, str]:
    overrides = {}
    for key, value in env.items():
        if key.startswith(ENV_PREFIX):
            overrides[_canonical_key(key[len(ENV_PREFIX):])] = value
    return overrides


def load_config(
    flags: Mapping[str, Any] | None = None,
    env: Mapping[str, str] | None = None,
    config_file: str | Path | None = None,
    strict: bool = False,
) -> EngineConfig:
    """Build a validated EngineConfig. Precedence: flags > env > file > defaults.

    `flags` maps canonical field names to already-typed values (None entries are
    skipped). `env` defaults to os.environ and is filtered by the CITYPULSE_
    prefix. `config_file` defaults to ./citypulse.conf when that file exists.
    """
    merged: dict[str, Any] = {}

    if config_file is None:
        default_file = Path(CONFIG_FILE_NAME)
        if default_file.is_file():
            config_file = default_file
    if config_file is not None:
        _apply_raw(merged, read_config_file(config_file), strict, source=str(config_file))

    env_map = os.environ if env is None else env
    _apply_raw(merged, _env_overrides(env_map), strict, source="environment")

    for key, value in (flags or {}).items():
        if value is None:
            continue
        key = _canonical_key(key)
        if key not in _FIELD_NAMES:
            if strict:
                raise ConfigError(f"unknown flag {key!r}")
            continue
        merged[key] = value

    config = EngineConfig(**merged)
    config.validate()
    return config


def _apply_raw(merged: dict[str, Any], raw: Mapping[str, str], strict: bool, source: str) -> None:
    for key, value in raw.items():
        if key not in _FIELD_NAMES:
            if strict:
                raise ConfigError(f"{source}: unknown key {key!r}")
            continue
        try:
            merged[key] = _PARSERS[key](value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{source}: invalid value for {key}: {value!r} ({exc})") from exc
