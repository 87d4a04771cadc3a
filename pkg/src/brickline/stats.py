"""Per-sensor summary statistics and trends for the statistics views.

Statistics run over observed (pre-imputation) points of the physical-unit
series; operators reason in physical units, so nothing here touches the
normalized matrices.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .domain import GRID_STEP_S, RegularSeries, SensorMeta, format_iso8601
from .ingest import EmptySeries


@dataclass(frozen=True)
class SummaryStats:
    sensor_id: str
    count: int
    missing_rate: float  # fraction of grid steps without an observation
    min: float
    max: float
    mean: float
    std: float           # population std
    trend_slope: float   # OLS slope per grid step; 0 when < 2 observed
    last_value: float
    last_updated: int    # grid timestamp of the last observed step

    def to_dict(self) -> dict:
        out = asdict(self)
        out["last_updated_iso"] = format_iso8601(self.last_updated)
        return out


def ols_slope(idx: np.ndarray, values: np.ndarray) -> float:
    """Least-squares slope of values against integer grid index."""
    if idx.size < 2:
        return 0.0
    t = idx.astype(np.float64)
    t_centered = t - t.mean()
    v_centered = values - values.mean()
    denom = float(np.dot(t_centered, t_centered))
    if denom == 0.0:
        return 0.0
    return float(np.dot(t_centered, v_centered) / denom)


def summarize(series: RegularSeries) -> SummaryStats:
    """Moments over observed points only; missing_rate over the whole grid."""
    observed_idx = np.flatnonzero(series.mask)
    if observed_idx.size == 0:
        raise EmptySeries(series.meta.sensor_id)
    observed = series.values[observed_idx]
    last_idx = int(observed_idx[-1])
    return SummaryStats(
        sensor_id=series.meta.sensor_id,
        count=int(observed_idx.size),
        missing_rate=1.0 - observed_idx.size / len(series.mask),
        min=float(observed.min()),
        max=float(observed.max()),
        mean=float(observed.mean()),
        std=float(observed.std()),
        trend_slope=ols_slope(observed_idx, observed),
        last_value=float(series.values[last_idx]),
        last_updated=series.start + last_idx * GRID_STEP_S,
    )


def rollup_by_class(stats: list[SummaryStats], metas: dict[str, SensorMeta]) -> dict[str, dict]:
    """Per-Brick-class aggregates: channel count and mean of channel means."""
    grouped: dict[str, list[float]] = {}
    for s in stats:
        brick_class = metas[s.sensor_id].brick_class
        grouped.setdefault(brick_class, []).append(s.mean)
    return {
        cls: {"count": len(means), "mean_of_means": float(np.mean(means))}
        for cls, means in sorted(grouped.items())
    }
