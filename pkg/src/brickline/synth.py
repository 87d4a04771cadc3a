"""Synthetic building fixtures: daily-periodic channels for demos and tests."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .domain import GRID_STEP_S, STEPS_PER_DAY, SensorMeta, SensorSeries, format_iso8601

FIXTURE_START = 1_704_067_200  # 2024-01-01T00:00:00Z, grid-aligned

_CHANNEL_KINDS = (
    ("temp", "Zone_Air_Temperature_Sensor", "degC", 21.0, 3.0),
    ("hum", "Outside_Air_Humidity_Sensor", "percent", 55.0, 12.0),
    ("flow", "Supply_Air_Flow_Sensor", "cfm", 900.0, 250.0),
    ("co2", "CO2_Sensor", "ppm", 600.0, 150.0),
    ("power", "Electrical_Power_Sensor", "kW", 40.0, 15.0),
)


def make_building(
    building_id: str = "bldg-demo",
    n_days: int = 60,
    n_channels: int = 3,
    seed: int = 0,
    noise: float = 0.05,
    trend: float = 1.0,
    start: int = FIXTURE_START,
) -> list[SensorSeries]:
    """Channels = offset + daily sine + linear trend + `noise`·amplitude Gaussian.

    The daily period is 144 grid steps; `trend` is the total drift over the
    whole window in amplitude units.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    n = n_days * STEPS_PER_DAY
    t = np.arange(n, dtype=np.float64)
    timestamps = start + GRID_STEP_S * np.arange(n, dtype=np.int64)
    out = []
    for c in range(n_channels):
        short, brick_class, unit, offset, amp = _CHANNEL_KINDS[c % len(_CHANNEL_KINDS)]
        suffix = "" if c < len(_CHANNEL_KINDS) else f"-{c // len(_CHANNEL_KINDS)}"
        meta = SensorMeta(
            sensor_id=f"{building_id}-{short}{suffix}",
            brick_class=brick_class,
            unit=unit,
            building_id=building_id,
        )
        phase = rng.uniform(0.0, 2.0 * np.pi)
        values = (
            offset
            + amp * np.sin(2.0 * np.pi * t / STEPS_PER_DAY + phase)
            + trend * amp * t / n
            + noise * amp * rng.standard_normal(n)
        )
        out.append(SensorSeries(meta=meta, timestamps=timestamps, values=values))
    return out


def write_fixture_csvs(series_list, out_dir) -> tuple[Path, Path]:
    """Write meta.csv and data.csv in the ingestion wire format."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta_path = out / "meta.csv"
    data_path = out / "data.csv"
    with open(meta_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sensor_id", "brick_class", "unit", "building_id"])
        for s in series_list:
            m = s.meta
            w.writerow([m.sensor_id, m.brick_class, m.unit, m.building_id])
    with open(data_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", "sensor_id", "value"])
        for s in series_list:
            sid = s.meta.sensor_id
            for ts, v in zip(s.timestamps.tolist(), s.values.tolist()):
                w.writerow([format_iso8601(ts), sid, f"{v:.6f}"])
    return meta_path, data_path
