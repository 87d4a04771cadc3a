"""Preprocessing chain: turn grid-aligned raw channels into analytics-ready data.

Stage order is fixed: outlier removal -> quadratic gap imputation -> feature
selection -> z-score normalization. Outliers are masked before imputation so
they never contaminate the fitted quadratics; missing rates used by feature
selection are recorded immediately before imputation (outlier-masked points
count as missing). Normalization statistics come from the chronological
training split only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .domain import (
    GRID_STEP_S,
    BricklineError,
    EmptyInput,
    RegularSeries,
    SensorMeta,
    _freeze,
)
from .ingest import resample_to_grid

MAD_SCALE = 1.4826  # makes MAD a consistent sigma estimate under normality


class TooFewPoints(BricklineError):
    pass


class ZeroVariance(BricklineError):
    pass


class AllChannelsDropped(BricklineError):
    pass


@dataclass(frozen=True)
class PreprocessConfig:
    outlier_z_threshold: float = 6.0
    max_missing_rate: float = 0.5
    normalization: str = "zscore"
    interpolation_order: int = 2

    def __post_init__(self):
        if not self.outlier_z_threshold > 0:
            raise ValueError("outlier_z_threshold must be > 0")
        if not 0.0 <= self.max_missing_rate <= 1.0:
            raise ValueError("max_missing_rate must be in [0, 1]")
        if self.normalization != "zscore":
            raise ValueError(f"unsupported normalization {self.normalization!r}")
        if self.interpolation_order != 2:
            raise ValueError("interpolation_order is fixed at 2")

    @classmethod
    def from_mapping(cls, section: dict) -> "PreprocessConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in section.items() if k in known})


@dataclass(frozen=True)
class PreprocessedDataset:
    """Aligned, imputed, normalized building matrix plus inversion stats.

    ``matrix`` is T x C on the shared 10-minute grid, fully observed, in
    normalized units. ``means``/``stds`` invert the normalization per
    channel. ``train_end``/``val_end`` are the chronological split row
    bounds used for the stats (and reused downstream for training).
    """

    building_id: str
    metas: tuple[SensorMeta, ...]
    matrix: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    grid_start: int
    train_end: int
    val_end: int
    dropped: tuple[tuple[str, str], ...] = ()
    step_seconds: int = GRID_STEP_S

    def __post_init__(self):
        for name in ("matrix", "means", "stds"):
            object.__setattr__(self, name, _freeze(np.asarray(getattr(self, name), dtype=np.float64)))
        if self.matrix.ndim != 2 or self.matrix.shape[1] != len(self.metas):
            raise ValueError("matrix must be T x C with one column per channel")
        if not np.isfinite(self.matrix).all():
            raise ValueError("matrix must be fully imputed and finite")
        if self.means.shape != (self.matrix.shape[1],) or self.stds.shape != self.means.shape:
            raise ValueError("norm stats must have one entry per channel")
        if not (self.stds > 0).all():
            raise ValueError("kept channels must have positive std")
        if not 0 < self.train_end <= self.val_end <= self.matrix.shape[0]:
            raise ValueError("split bounds out of order")

    @property
    def channels(self) -> tuple[str, ...]:
        return tuple(m.sensor_id for m in self.metas)

    @property
    def n_steps(self) -> int:
        return self.matrix.shape[0]


def split_bounds(n_steps: int, train_fraction: float = 0.7, val_fraction: float = 0.1) -> tuple[int, int]:
    """Chronological train/val/test row bounds: [0, a), [a, b), [b, T)."""
    if not 0 < train_fraction < 1 or val_fraction < 0 or train_fraction + val_fraction >= 1:
        raise ValueError("fractions must satisfy 0 < train, 0 <= val, train + val < 1")
    # Fractions arrive as binary floats of decimal values (0.7 is slightly
    # under seven tenths); nudge before flooring so 8640*0.7 lands on 6048.
    eps = 1e-9
    train_end = int(n_steps * train_fraction + eps)
    val_end = int(n_steps * (train_fraction + val_fraction) + eps)
    return train_end, val_end


def remove_outliers(series: RegularSeries, config: PreprocessConfig = PreprocessConfig()) -> RegularSeries:
    """Mask observed points whose robust z-score exceeds the threshold.

    Robust scale is 1.4826 * MAD about the median; MAD = 0 (at least half
    the points identical) disables removal entirely rather than flagging
    everything off-median.
    """
    observed = series.values[series.mask]
    if observed.size < 2:
        raise TooFewPoints(f"{series.meta.sensor_id}: need >= 2 observed points")
    median = np.median(observed)
    mad = np.median(np.abs(observed - median))
    if mad == 0.0:
        return series
    cutoff = config.outlier_z_threshold * MAD_SCALE * mad
    bad = series.mask & (np.abs(series.values - median) > cutoff)
    if not bad.any():
        return series
    values = series.values.copy()
    values[bad] = np.nan
    return RegularSeries(meta=series.meta, start=series.start,
                         values=values, mask=series.mask & ~bad)


def interpolate_quadratic(series: RegularSeries) -> RegularSeries:
    """Fill every gap with the quadratic through its nearest support points.

    Interior gaps use the 2 nearest observed points before and 1 after
    (1-before/2-after near the series head); leading/trailing runs take the
    nearest observed value. Exact on globally quadratic signals.
    """
    if series.mask.all():
        return series
    if int(series.mask.sum()) < 3:
        raise TooFewPoints(f"{series.meta.sensor_id}: need >= 3 observed points")
    filled = kernels.fill_gaps_quadratic(series.values, series.mask)
    return RegularSeries(meta=series.meta, start=series.start,
                         values=filled, mask=np.ones(len(series.mask), dtype=bool))


def normalize(matrix: np.ndarray, train_end: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Z-score each column using mean/population-std of rows [0, train_end).

    Raises ZeroVariance when any column is constant over the training rows;
    the pipeline screens such channels out beforehand via select_features.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if train_end < 1:
        raise ValueError("train range must be non-empty")
    train = matrix[:train_end]
    means = train.mean(axis=0)
    stds = train.std(axis=0)  # population std
    flat = np.flatnonzero(stds == 0.0)
    if flat.size:
        raise ZeroVariance(f"constant training rows in channels {flat.tolist()}")
    return (matrix - means) / stds, means, stds


def denormalize(matrix: np.ndarray, means: np.ndarray, stds: np.ndarray) -> np.ndarray:
    return np.asarray(matrix) * stds + means


def select_features(
    matrix: np.ndarray,
    pre_missing_rates: np.ndarray,
    train_end: int,
    config: PreprocessConfig = PreprocessConfig(),
) -> tuple[list[int], list[tuple[int, str]]]:
    """Pick surviving channel indices, in input order.

    Drops channels whose pre-imputation missing rate exceeds the configured
    cap, and channels constant over the training rows. Returns (kept
    indices, [(index, reason), ...]).
    """
    kept, dropped = [], []
    train_stds = np.asarray(matrix, dtype=np.float64)[:train_end].std(axis=0)
    for c in range(np.asarray(matrix).shape[1]):
        if pre_missing_rates[c] > config.max_missing_rate:
            dropped.append((c, "missing_rate"))
        elif train_stds[c] == 0.0:
            dropped.append((c, "zero_variance"))
        else:
            kept.append(c)
    if not kept:
        raise AllChannelsDropped("no channels survived feature selection")
    return kept, dropped


def _embed_on_grid(resampled: RegularSeries, grid_start: int, n_steps: int) -> RegularSeries:
    """Place a channel onto the building's shared grid, missing outside coverage."""
    offset = (resampled.start - grid_start) // GRID_STEP_S
    values = np.full(n_steps, np.nan)
    mask = np.zeros(n_steps, dtype=bool)
    values[offset:offset + len(resampled.values)] = resampled.values
    mask[offset:offset + len(resampled.mask)] = resampled.mask
    return RegularSeries(meta=resampled.meta, start=grid_start, values=values, mask=mask)


def run_pipeline(
    series_list,
    config: PreprocessConfig = PreprocessConfig(),
    train_fraction: float = 0.7,
    val_fraction: float = 0.1,
) -> PreprocessedDataset:
    """Run the full chain over one building's raw series.

    Channels are aligned to the union grid (earliest start to latest end
    across channels); steps outside a channel's own coverage count as
    missing. Deterministic for fixed inputs and config.
    """
    series_list = list(series_list)
    if not series_list:
        raise EmptyInput("no series to preprocess")
    building_id = series_list[0].meta.building_id
    for s in series_list:
        if s.meta.building_id != building_id:
            raise ValueError(f"mixed buildings: {building_id!r} vs {s.meta.building_id!r}")

    dropped: list[tuple[str, str]] = []
    resampled: list[RegularSeries] = []
    for s in series_list:
        if len(s) == 0:
            dropped.append((s.meta.sensor_id, "empty"))
            continue
        resampled.append(resample_to_grid(s))
    if not resampled:
        raise AllChannelsDropped(f"{building_id}: every channel is empty")

    grid_start = min(r.start for r in resampled)
    grid_end = max(r.end for r in resampled)
    n_steps = (grid_end - grid_start) // GRID_STEP_S + 1
    train_end, val_end = split_bounds(n_steps, train_fraction, val_fraction)

    cleaned: list[RegularSeries] = []
    for r in resampled:
        chan = _embed_on_grid(r, grid_start, n_steps)
        if int(chan.mask.sum()) < 3:
            dropped.append((chan.meta.sensor_id, "too_few_points"))
            continue
        cleaned.append(remove_outliers(chan, config))

    columns, metas, missing_rates = [], [], []
    for chan in cleaned:
        rate = 1.0 - chan.mask.mean()
        if int(chan.mask.sum()) < 3:  # outlier removal can thin a sparse channel
            dropped.append((chan.meta.sensor_id, "too_few_points"))
            continue
        full = interpolate_quadratic(chan)
        columns.append(full.values)
        metas.append(chan.meta)
        missing_rates.append(rate)
    if not columns:
        raise AllChannelsDropped(f"{building_id}: no channels with enough observations")

    matrix = np.column_stack(columns)
    kept, drop_idx = select_features(matrix, np.asarray(missing_rates), train_end, config)
    dropped.extend((metas[c].sensor_id, reason) for c, reason in drop_idx)

    matrix = matrix[:, kept]
    metas = [metas[c] for c in kept]
    normalized, means, stds = normalize(matrix, train_end)
    return PreprocessedDataset(
        building_id=building_id,
        metas=tuple(metas),
        matrix=normalized,
        means=means,
        stds=stds,
        grid_start=grid_start,
        train_end=train_end,
        val_end=val_end,
        dropped=tuple(dropped),
    )
