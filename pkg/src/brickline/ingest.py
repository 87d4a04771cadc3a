"""Ingestion: long-CSV and mock-BMS loading, validation, and grid alignment.

Data CSV contract: header ``timestamp,sensor_id,value``, ISO-8601 UTC
timestamps, decimal values, UTF-8, LF. Meta CSV: header
``sensor_id,brick_class,unit,building_id``.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
import urllib.error
import urllib.parse
import urllib.request
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .domain import (
    GRID_STEP_S,
    BricklineError,
    EmptyInput,
    RegularSeries,
    SensorMeta,
    SensorSeries,
    parse_iso8601,
)

log = logging.getLogger(__name__)

DATA_HEADER = ["timestamp", "sensor_id", "value"]
META_HEADER = ["sensor_id", "brick_class", "unit", "building_id"]


class MissingMetaFile(BricklineError):
    pass


class EmptySeries(BricklineError):
    pass


class AuthFailed(BricklineError):
    pass


class Unreachable(BricklineError):
    pass


class SchemaMismatch(BricklineError):
    pass


@dataclass
class RawReadingRecord:
    sensor_id: str
    timestamp: int
    value: float


@dataclass
class IngestReport:
    records_read: int = 0
    records_rejected: int = 0
    reject_reasons: Counter = field(default_factory=Counter)
    sensors_touched: int = 0

    @property
    def records_accepted(self) -> int:
        return self.records_read - self.records_rejected

    def reject(self, reason: str) -> None:
        self.records_rejected += 1
        self.reject_reasons[reason] += 1


def load_meta_csv(meta_path) -> list[SensorMeta]:
    try:
        fh = open(meta_path, newline="", encoding="utf-8")
    except OSError as exc:
        raise MissingMetaFile(str(meta_path)) from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != META_HEADER:
            raise MissingMetaFile(
                f"{meta_path}: expected header {','.join(META_HEADER)!r}, got {header!r}"
            )
        metas = []
        for row in reader:
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 4:
                raise MissingMetaFile(f"{meta_path}: malformed meta row {row!r}")
            metas.append(SensorMeta(*[cell.strip() for cell in row]))
    return metas


def _collapse_duplicates(ts: np.ndarray, vs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sort by timestamp and replace exact-duplicate timestamps with their mean."""
    order = np.argsort(ts, kind="stable")
    ts, vs = ts[order], vs[order]
    uniq, inverse, counts = np.unique(ts, return_inverse=True, return_counts=True)
    if uniq.size == ts.size:
        return ts, vs
    sums = np.bincount(inverse, weights=vs)
    return uniq, sums / counts


def load_long_csv(data_path, meta_path) -> tuple[list[SensorSeries], IngestReport]:
    """Load a long-format data CSV against its meta CSV.

    Returns one SensorSeries per meta sensor (possibly empty), with
    out-of-order rows sorted and exact-duplicate timestamps collapsed to
    their mean. Rows that fail to parse or reference an unknown sensor are
    counted in the report, never fatal.
    """
    metas = load_meta_csv(meta_path)
    by_sensor: dict[str, SensorMeta] = {m.sensor_id: m for m in metas}
    report = IngestReport()
    raw: dict[str, tuple[list, list]] = defaultdict(lambda: ([], []))

    with open(data_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != DATA_HEADER:
            raise EmptyInput(
                f"{data_path}: expected header {','.join(DATA_HEADER)!r}, got {header!r}"
            )
        for row in reader:
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            report.records_read += 1
            if len(row) != 3:
                report.reject("malformed_row")
                continue
            ts_text, sensor_id, value_text = row
            sensor_id = sensor_id.strip()
            if sensor_id not in by_sensor:
                report.reject("unknown_sensor")
                continue
            try:
                ts = parse_iso8601(ts_text)
                value = float(value_text)
            except (ValueError, OverflowError):
                report.reject("malformed_row")
                continue
            if not math.isfinite(value):
                report.reject("malformed_row")
                continue
            ts_list, v_list = raw[sensor_id]
            ts_list.append(ts)
            v_list.append(value)

    if report.records_read == 0:
        raise EmptyInput(f"{data_path}: no data rows")

    series = []
    for meta in metas:
        ts_list, v_list = raw.get(meta.sensor_id, ([], []))
        ts = np.asarray(ts_list, dtype=np.int64)
        vs = np.asarray(v_list, dtype=np.float64)
        if ts.size:
            ts, vs = _collapse_duplicates(ts, vs)
        series.append(SensorSeries(meta=meta, timestamps=ts, values=vs))
    report.sensors_touched = sum(1 for s in series if len(s))
    return series, report


def resample_to_grid(series: SensorSeries) -> RegularSeries:
    """Align a raw series to the 10-minute grid by left-closed bucket means.

    The grid runs from floor(first timestamp) to floor(last timestamp) in
    600 s steps; buckets with no readings are masked missing.
    """
    if len(series) == 0:
        raise EmptySeries(series.meta.sensor_id)
    ts = series.timestamps
    start = int(ts[0]) // GRID_STEP_S * GRID_STEP_S
    end = int(ts[-1]) // GRID_STEP_S * GRID_STEP_S
    nbins = (end - start) // GRID_STEP_S + 1
    sums, counts = kernels.bucket_sums(ts, series.values, start, GRID_STEP_S, nbins)
    mask = counts > 0
    values = np.full(nbins, np.nan)
    values[mask] = sums[mask] / counts[mask]
    return RegularSeries(meta=series.meta, start=start, values=values, mask=mask)


# --------------------------------------------------------------------------
# mock-BMS HTTP client


@dataclass
class BmsClientConfig:
    """Connection settings for the building-management-system API.

    The wire format is a fixed JSON fixture schema:
    ``GET {base_url}/series?sensor_id=&from=&to=`` returning
    ``{"sensor_id": ..., "points": [[ts, value], ...]}``.
    """

    base_url: str
    token: str = ""
    max_attempts: int = 3
    backoff_s: float = 0.5
    timeout_s: float = 10.0


def _get_json(config: BmsClientConfig, url: str, sleep) -> dict:
    delay = config.backoff_s
    last_error = None
    for attempt in range(1, config.max_attempts + 1):
        try:
            req = urllib.request.Request(url)
            if config.token:
                req.add_header("Authorization", f"Bearer {config.token}")
            with urllib.request.urlopen(req, timeout=config.timeout_s) as resp:
                return json.loads(resp.read().decode("utf-8"))
        except urllib.error.HTTPError as exc:
            if exc.code in (401, 403):
                raise AuthFailed(f"{url}: HTTP {exc.code}") from exc
            last_error = exc
        except (urllib.error.URLError, TimeoutError, ConnectionError) as exc:
            last_error = exc
        if attempt < config.max_attempts:
            log.warning("BMS request failed (attempt %d/%d), retrying in %.1fs: %s",
                        attempt, config.max_attempts, delay, last_error)
            sleep(delay)
            delay *= 2
    raise Unreachable(f"{url}: gave up after {config.max_attempts} attempts: {last_error}")


def fetch_from_bms(
    config: BmsClientConfig,
    sensor_ids: list[str],
    window: tuple[int, int],
    metas: dict[str, SensorMeta],
    *,
    sleep=time.sleep,
) -> list[SensorSeries]:
    """Fetch raw series for the given sensors over [from, to) Unix seconds.

    Transient failures are retried with exponential backoff; HTTP 401/403 is
    surfaced immediately as AuthFailed. Duplicate timestamps collapse to
    their mean, exactly as in the CSV path.
    """
    lo, hi = window
    out = []
    for sensor_id in sensor_ids:
        query = urllib.parse.urlencode({"sensor_id": sensor_id, "from": lo, "to": hi})
        url = f"{config.base_url.rstrip('/')}/series?{query}"
        payload = _get_json(config, url, sleep)
        if not isinstance(payload, dict) or "points" not in payload:
            raise SchemaMismatch(f"{url}: payload missing 'points'")
        points = payload["points"]
        if not isinstance(points, list) or any(
            not isinstance(p, (list, tuple)) or len(p) != 2 for p in points
        ):
            raise SchemaMismatch(f"{url}: 'points' must be a list of [ts, value] pairs")
        try:
            ts = np.array(
                [parse_iso8601(p[0]) if isinstance(p[0], str) else int(p[0]) for p in points],
                dtype=np.int64,
            )
            vs = np.array([float(p[1]) for p in points], dtype=np.float64)
        except (ValueError, TypeError, OverflowError) as exc:
            raise SchemaMismatch(f"{url}: unparseable point: {exc}") from exc
        if ts.size:
            ts, vs = _collapse_duplicates(ts, vs)
        out.append(SensorSeries(meta=metas[sensor_id], timestamps=ts, values=vs))
    return out
