"""Experiment configuration: key = value files, environment overrides, schema."""
from __future__ import annotations

import itertools
import logging
import math
import os
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import voluptuous as vol

from .const import (
    CONF_AUX_PML_LAYERS,
    CONF_DENSE_THRESHOLD,
    CONF_FRONTS,
    CONF_GROUP_SIZE,
    CONF_MAX_ITER,
    CONF_N,
    CONF_OMEGA_OVER_2PI,
    CONF_OUTPUT_DIR,
    CONF_PML_CONSTANT,
    CONF_PML_FACES,
    CONF_PML_LAYERS,
    CONF_PRECONDITIONER,
    CONF_Q,
    CONF_REPORT_NAME,
    CONF_RESTART,
    CONF_SAVE_SOLUTION,
    CONF_SLICES,
    CONF_SOURCE,
    CONF_SOURCE_CENTER,
    CONF_SOURCE_DIRECTION,
    CONF_SOURCE_NODE,
    CONF_STUDY_WORKERS,
    CONF_TOL,
    CONF_VELOCITY,
    CONF_VELOCITY_AMPLITUDE,
    CONF_VELOCITY_C0,
    CONF_VELOCITY_CENTER,
    CONF_VELOCITY_SEED,
    CONF_VELOCITY_SHARPNESS,
    CONF_VELOCITY_SMOOTHING,
    DEFAULT_AUX_PML_LAYERS,
    DEFAULT_DENSE_THRESHOLD,
    DEFAULT_FRONTS,
    DEFAULT_GROUP_SIZE,
    DEFAULT_MAX_ITER,
    DEFAULT_OMEGA_OVER_2PI,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_PML_CONSTANT,
    DEFAULT_PML_FACES,
    DEFAULT_PML_LAYERS,
    DEFAULT_PRECONDITIONER,
    DEFAULT_Q,
    DEFAULT_REPORT_NAME,
    DEFAULT_RESTART,
    DEFAULT_SAVE_SOLUTION,
    DEFAULT_SLICES,
    DEFAULT_SOURCE,
    DEFAULT_STUDY_WORKERS,
    DEFAULT_TOL,
    DEFAULT_VELOCITY,
    ENV_PREFIX,
    FACE_NAMES,
    FRONTS,
    PLANES,
    PRECONDITIONERS,
    ROW_KEY_FIELDS,
    SLICE_MIDPOINT,
    SOURCE_KINDS,
    VELOCITY_KINDS,
)
from .exceptions import ConfigurationError

_LOGGER = logging.getLogger(__name__)


def _items(value: Any) -> list[Any]:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return list(value)


def _triple(cast: type) -> Any:
    def validate(value: Any) -> tuple[Any, Any, Any]:
        items = _items(value)
        if len(items) != 3:
            raise vol.Invalid("expected three comma-separated values")
        return tuple(cast(item) for item in items)

    return validate


def _faces(value: Any) -> list[str]:
    faces = _items(value)
    unknown = [face for face in faces if face not in FACE_NAMES]
    if unknown:
        raise vol.Invalid(f"unknown faces {unknown}, expected some of {FACE_NAMES}")
    return faces


def _slices(value: Any) -> list[str]:
    slices = []
    for item in _items(value):
        plane, _, index = str(item).partition(":")
        if plane not in PLANES:
            raise vol.Invalid(f"slice plane must be one of {PLANES}, got {plane!r}")
        if index != SLICE_MIDPOINT:
            int(index)
        slices.append(f"{plane}:{index}")
    return slices


_POSITIVE_FLOAT = vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))

CONFIG_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_OMEGA_OVER_2PI, default=DEFAULT_OMEGA_OVER_2PI): _POSITIVE_FLOAT,
        vol.Required(CONF_Q, default=DEFAULT_Q): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_N): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Required(CONF_VELOCITY, default=DEFAULT_VELOCITY): vol.In(VELOCITY_KINDS),
        vol.Required(CONF_VELOCITY_SEED): vol.Coerce(int),
        vol.Optional(CONF_VELOCITY_C0): _POSITIVE_FLOAT,
        vol.Optional(CONF_VELOCITY_CENTER): _triple(float),
        vol.Optional(CONF_VELOCITY_AMPLITUDE): vol.All(
            vol.Coerce(float), vol.Range(min=0)
        ),
        vol.Optional(CONF_VELOCITY_SHARPNESS): _POSITIVE_FLOAT,
        vol.Optional(CONF_VELOCITY_SMOOTHING): vol.All(
            vol.Coerce(float), vol.Range(min=0)
        ),
        vol.Required(CONF_SOURCE, default=DEFAULT_SOURCE): vol.In(SOURCE_KINDS),
        vol.Optional(CONF_SOURCE_CENTER): _triple(float),
        vol.Optional(CONF_SOURCE_DIRECTION): _triple(float),
        vol.Optional(CONF_SOURCE_NODE): _triple(int),
        vol.Required(CONF_PML_LAYERS, default=DEFAULT_PML_LAYERS): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Required(CONF_AUX_PML_LAYERS, default=DEFAULT_AUX_PML_LAYERS): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Required(CONF_PML_CONSTANT, default=DEFAULT_PML_CONSTANT): _POSITIVE_FLOAT,
        vol.Required(CONF_PML_FACES, default=DEFAULT_PML_FACES): _faces,
        vol.Required(CONF_GROUP_SIZE, default=DEFAULT_GROUP_SIZE): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Required(CONF_PRECONDITIONER, default=DEFAULT_PRECONDITIONER): vol.In(
            PRECONDITIONERS
        ),
        vol.Required(CONF_FRONTS, default=DEFAULT_FRONTS): vol.In(FRONTS),
        vol.Required(CONF_TOL, default=DEFAULT_TOL): vol.All(
            vol.Coerce(float),
            vol.Range(min=0, max=1, min_included=False, max_included=False),
        ),
        vol.Required(CONF_RESTART, default=DEFAULT_RESTART): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Required(CONF_MAX_ITER, default=DEFAULT_MAX_ITER): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Required(CONF_DENSE_THRESHOLD, default=DEFAULT_DENSE_THRESHOLD): vol.All(
            vol.Coerce(int), vol.Range(min=0)
        ),
        vol.Required(CONF_OUTPUT_DIR, default=DEFAULT_OUTPUT_DIR): str,
        vol.Required(CONF_REPORT_NAME, default=DEFAULT_REPORT_NAME): str,
        vol.Required(CONF_SLICES, default=DEFAULT_SLICES): _slices,
        vol.Required(CONF_SAVE_SOLUTION, default=DEFAULT_SAVE_SOLUTION): vol.Boolean(),
        vol.Required(CONF_STUDY_WORKERS, default=DEFAULT_STUDY_WORKERS): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
    }
)

CONFIG_KEYS = [str(key) for key in CONFIG_SCHEMA.schema]


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment configuration."""

    data: Mapping[str, Any]

    def __getitem__(self, key: str) -> Any:
        return self.data[key]

    def get(self, key: str, default: Any = None) -> Any:
        """Return a value or a default for unset optional keys."""
        return self.data.get(key, default)

    @property
    def grid_size(self) -> int:
        """Interior points per dimension."""
        if self.data.get(CONF_N) is not None:
            return self.data[CONF_N]
        return round(self.data[CONF_Q] * self.data[CONF_OMEGA_OVER_2PI]) - 1

    @property
    def omega(self) -> float:
        """Angular frequency."""
        return 2 * math.pi * self.data[CONF_OMEGA_OVER_2PI]

    def with_overrides(self, overrides: Mapping[str, Any]) -> ExperimentConfig:
        """Return a revalidated copy with some keys replaced."""
        return validate_config({**self.data, **overrides})

    def row_key(self, fields: list[str] | None = None) -> str:
        """Stable identifier of the report row this configuration produces."""
        fields = ROW_KEY_FIELDS if fields is None else fields
        parts = []
        for key in fields:
            value = self.data.get(key)
            if key == CONF_N and value is None:
                value = self.grid_size
            if isinstance(value, (list, tuple)):
                value = ",".join(str(item) for item in value)
            parts.append(f"{key}={value}")
        return ";".join(parts)


def validate_config(raw: Mapping[str, Any]) -> ExperimentConfig:
    """Validate and coerce raw values into an ExperimentConfig."""
    try:
        data = CONFIG_SCHEMA(dict(raw))
    except vol.Invalid as err:
        raise ConfigurationError(f"invalid configuration: {err}") from err
    config = ExperimentConfig(data)
    if config.grid_size < 1:
        raise ConfigurationError(
            f"q={data[CONF_Q]} and omega/2pi={data[CONF_OMEGA_OVER_2PI]} give no grid points"
        )
    return config


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {line!r}")
        values[key] = value.strip()
    return values


def env_overrides(environ: Mapping[str, str] | None = None) -> dict[str, str]:
    """Collect ``HSWEEP_<KEY>`` overrides from the environment."""
    environ = os.environ if environ is None else environ
    overrides = {}
    for key in CONFIG_KEYS:
        name = f"{ENV_PREFIX}{key.upper()}"
        if name in environ:
            overrides[key] = environ[name]
            _LOGGER.debug("Config key %s overridden by %s", key, name)
    return overrides


def load_config(
    path: str | Path,
    environ: Mapping[str, str] | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> ExperimentConfig:
    """Read a configuration file, apply overrides and validate."""
    raw: dict[str, Any] = parse_config_text(Path(path).read_text(encoding="utf-8"))
    raw.update(env_overrides(environ))
    raw.update(overrides or {})
    return validate_config(raw)


def parse_vary(spec: str) -> list[tuple[str, list[str]]]:
    """Parse ``key=v1,v2;key2=w1,w2`` into (key, values) pairs."""
    grid = []
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        key, sep, values = part.partition("=")
        key = key.strip()
        if not sep or key not in CONFIG_KEYS:
            raise ConfigurationError(f"invalid vary entry {part!r}")
        grid.append((key, _items(values)))
    return grid


def expand_vary(grid: list[tuple[str, list[str]]]) -> list[dict[str, str]]:
    """Cartesian product of a vary grid; an empty grid has no rows."""
    if not grid:
        return []
    keys = [key for key, _ in grid]
    return [dict(zip(keys, combo)) for combo in itertools.product(*(v for _, v in grid))]
