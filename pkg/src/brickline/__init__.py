"""Building IoT time-series analytics: ingestion, preprocessing, forecasting,
statistics, durable results, and an authenticated HTTP API."""

from .domain import (
    GRID_STEP_S,
    STEPS_PER_DAY,
    BricklineError,
    BuildingRegistry,
    RegularSeries,
    SensorMeta,
    SensorSeries,
)
from .dlinear import (
    HORIZONS,
    LOOKBACK_STEPS,
    DLinearModel,
    TrainConfig,
    TrainingLog,
    forward,
    load_model,
    save_model,
    seasonal_naive,
    train,
)
from .engine import Engine, EngineConfig
from .evaluation import MetricReport, emit_table, evaluate_sweep, mae, mse, smape
from .preprocess import PreprocessConfig, PreprocessedDataset, run_pipeline
from .stats import SummaryStats, summarize
from .store import ForecastRecord, ResultsStore, RunRecord, schedule_refresh

__version__ = "0.1.0"

__all__ = [
    "GRID_STEP_S",
    "STEPS_PER_DAY",
    "HORIZONS",
    "LOOKBACK_STEPS",
    "BricklineError",
    "BuildingRegistry",
    "DLinearModel",
    "Engine",
    "EngineConfig",
    "ForecastRecord",
    "MetricReport",
    "PreprocessConfig",
    "PreprocessedDataset",
    "RegularSeries",
    "ResultsStore",
    "RunRecord",
    "SensorMeta",
    "SensorSeries",
    "SummaryStats",
    "TrainConfig",
    "TrainingLog",
    "emit_table",
    "evaluate_sweep",
    "forward",
    "load_model",
    "mae",
    "mse",
    "run_pipeline",
    "save_model",
    "schedule_refresh",
    "seasonal_naive",
    "smape",
    "summarize",
    "train",
    "__version__",
]
