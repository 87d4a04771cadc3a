"""Shared domain types: sensor metadata, series containers, and the building registry.

Timestamps are integer Unix seconds, UTC only. Local-time handling belongs to
whoever produces the input files; nothing downstream ever sees a timezone.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

GRID_STEP_S = 600  # the single supported granularity: 10-minute buckets
STEPS_PER_DAY = 86_400 // GRID_STEP_S  # 144


class BricklineError(Exception):
    """Base class for every error raised by this package."""


class DuplicateSensor(BricklineError):
    pass


class EmptyBuilding(BricklineError):
    pass


class MissingBrickClass(BricklineError):
    pass


class UnknownBrickClass(BricklineError):
    pass


class UnknownBuilding(BricklineError):
    pass


class UnknownSensor(BricklineError):
    pass


class ShapeMismatch(BricklineError):
    pass


class EmptyInput(BricklineError):
    pass


# --------------------------------------------------------------------------
# time helpers


def parse_iso8601(text: str) -> int:
    """Parse an ISO-8601 instant ('2021-01-01T00:00:00Z') to Unix seconds."""
    t = text.strip()
    if t.endswith(("Z", "z")):
        t = t[:-1] + "+00:00"
    dt = datetime.fromisoformat(t)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def format_iso8601(ts: int) -> str:
    return datetime.fromtimestamp(int(ts), tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _date_of(ts: int) -> datetime:
    return datetime.fromtimestamp(int(ts), tz=timezone.utc)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


# --------------------------------------------------------------------------
# core types


@dataclass(frozen=True)
class SensorMeta:
    """Identity of one sensor stream: opaque id, Brick class tag, unit, building."""

    sensor_id: str
    brick_class: str
    unit: str
    building_id: str

    def __post_init__(self):
        if not self.brick_class:
            raise MissingBrickClass(f"sensor {self.sensor_id!r} has no Brick class")


@dataclass(frozen=True)
class SensorSeries:
    """One raw stream: strictly increasing Unix-second timestamps and finite values."""

    meta: SensorMeta
    timestamps: np.ndarray  # int64, strictly increasing
    values: np.ndarray  # float64, all finite

    def __post_init__(self):
        ts = np.ascontiguousarray(self.timestamps, dtype=np.int64)
        vs = np.ascontiguousarray(self.values, dtype=np.float64)
        if ts.shape != vs.shape or ts.ndim != 1:
            raise ShapeMismatch("timestamps and values must be equal-length 1-D arrays")
        if ts.size and np.any(np.diff(ts) <= 0):
            raise ValueError(f"sensor {self.meta.sensor_id!r}: timestamps not strictly increasing")
        if vs.size and not np.all(np.isfinite(vs)):
            raise ValueError(f"sensor {self.meta.sensor_id!r}: non-finite value rejected")
        object.__setattr__(self, "timestamps", _freeze(ts))
        object.__setattr__(self, "values", _freeze(vs))

    def __len__(self) -> int:
        return int(self.timestamps.size)


@dataclass(frozen=True)
class RegularSeries:
    """A 10-minute-grid series with an explicit observed mask.

    ``values[i]`` sits at ``start + 600*i``; entries with ``mask[i] == False``
    are missing and may hold NaN.
    """

    meta: SensorMeta
    start: int  # Unix seconds, aligned to a 600 s boundary
    values: np.ndarray  # float64
    mask: np.ndarray  # bool, True = observed
    step_seconds: int = GRID_STEP_S

    def __post_init__(self):
        if self.step_seconds != GRID_STEP_S:
            raise ValueError(f"step must be exactly {GRID_STEP_S} s")
        if self.start % GRID_STEP_S != 0:
            raise ValueError("start must align to a 600 s boundary")
        vs = np.ascontiguousarray(self.values, dtype=np.float64)
        mk = np.ascontiguousarray(self.mask, dtype=np.bool_)
        if vs.shape != mk.shape or vs.ndim != 1:
            raise ShapeMismatch("values and mask must be equal-length 1-D arrays")
        if not np.all(np.isfinite(vs[mk])):
            raise ValueError("observed (mask=True) values must be finite")
        object.__setattr__(self, "values", _freeze(vs))
        object.__setattr__(self, "mask", _freeze(mk))

    def __len__(self) -> int:
        return int(self.values.size)

    def timestamps(self) -> np.ndarray:
        return self.start + GRID_STEP_S * np.arange(len(self), dtype=np.int64)

    @property
    def end(self) -> int:
        """Timestamp of the last grid slot."""
        return self.start + GRID_STEP_S * (len(self) - 1)


@dataclass
class DatasetSummary:
    timeseries: int
    unique_classes: int
    start_date: str | None  # ISO date of first observation
    end_date: str | None
    duration_days: int


@dataclass
class _BuildingEntry:
    name: str
    sensors: dict[str, SensorMeta] = field(default_factory=dict)
    first_ts: int | None = None
    last_ts: int | None = None


def load_class_list(path) -> frozenset[str]:
    """Read the allowed-Brick-class file: one class name per line, UTF-8."""
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip() for line in fh if line.strip())


class BuildingRegistry:
    """Registry of buildings and their sensors.

    Reads are lock-cheap and may run concurrently; registration is serialized.
    All returned domain objects are immutable.
    """

    def __init__(self, allowed_classes: frozenset[str] | None = None):
        self._lock = threading.RLock()
        self._buildings: dict[str, _BuildingEntry] = {}
        self._allowed = allowed_classes

    def register_building(self, meta_records: list[SensorMeta], name: str) -> str:
        if not meta_records:
            raise EmptyBuilding("a building needs at least one sensor")
        building_id = meta_records[0].building_id
        with self._lock:
            entry = _BuildingEntry(name=name)
            for meta in meta_records:
                if meta.building_id != building_id:
                    raise ValueError(
                        f"mixed building ids: {meta.building_id!r} vs {building_id!r}"
                    )
                if not meta.brick_class:
                    raise MissingBrickClass(f"sensor {meta.sensor_id!r} has no Brick class")
                if self._allowed is not None and meta.brick_class not in self._allowed:
                    raise UnknownBrickClass(
                        f"sensor {meta.sensor_id!r}: class {meta.brick_class!r} "
                        "not in the configured class list"
                    )
                if meta.sensor_id in entry.sensors:
                    raise DuplicateSensor(f"duplicate sensor_id {meta.sensor_id!r}")
                entry.sensors[meta.sensor_id] = meta
            self._buildings[building_id] = entry
        return building_id

    def record_observation_range(self, building_id: str, first_ts: int, last_ts: int) -> None:
        """Widen the building's known observation range (called after ingestion)."""
        with self._lock:
            entry = self._entry(building_id)
            if entry.first_ts is None or first_ts < entry.first_ts:
                entry.first_ts = first_ts
            if entry.last_ts is None or last_ts > entry.last_ts:
                entry.last_ts = last_ts

    def summarize_registry(self, building_id: str) -> DatasetSummary:
        with self._lock:
            entry = self._entry(building_id)
            classes = {m.brick_class for m in entry.sensors.values()}
            if entry.first_ts is None or entry.last_ts is None:
                return DatasetSummary(len(entry.sensors), len(classes), None, None, 0)
            first, last = _date_of(entry.first_ts), _date_of(entry.last_ts)
            # Matches the summary-table convention: whole-day difference, floored
            # at one day for any building that has data at all.
            duration = max(1, (last.date() - first.date()).days)
            return DatasetSummary(
                timeseries=len(entry.sensors),
                unique_classes=len(classes),
                start_date=first.strftime("%Y-%m-%d"),
                end_date=last.strftime("%Y-%m-%d"),
                duration_days=duration,
            )

    def sensors(self, building_id: str) -> list[SensorMeta]:
        with self._lock:
            return list(self._entry(building_id).sensors.values())

    def building_name(self, building_id: str) -> str:
        with self._lock:
            return self._entry(building_id).name

    def building_ids(self) -> list[str]:
        with self._lock:
            return list(self._buildings)

    def has_building(self, building_id: str) -> bool:
        with self._lock:
            return building_id in self._buildings

    def _entry(self, building_id: str) -> _BuildingEntry:
        try:
            return self._buildings[building_id]
        except KeyError:
            raise UnknownBuilding(building_id) from None
