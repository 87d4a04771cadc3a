"""Engine: configuration, ingestion wiring, training/forecast runs, jobs.

This is the composition layer the CLI and the HTTP service sit on. It owns
the registry, the per-building raw channels and preprocessed datasets, the
results store, and the background training jobs.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import stats as stats_mod
from .dlinear import (
    HORIZONS,
    TrainConfig,
    forward,
    load_model,
    model_to_bytes,
    seasonal_naive,
    train,
)
from .domain import (
    BricklineError,
    BuildingRegistry,
    RegularSeries,
    UnknownBuilding,
    UnknownSensor,
    load_class_list,
)
from .evaluation import (
    MetricReport,
    aggregate_scores,
    dlinear_factory,
    evaluate_sweep,
    score_windows,
    snaive_factory,
)
from .ingest import EmptySeries, load_long_csv, resample_to_grid
from .preprocess import PreprocessConfig, PreprocessedDataset, denormalize, run_pipeline
from .store import (
    ForecastRecord,
    NotFound,
    ResultsStore,
    RunRecord,
    compute_run_id,
    fingerprint_matrix,
)

log = logging.getLogger(__name__)

MODEL_IDS = ("dlinear", "snaive")


class UnknownModel(BricklineError):
    pass


class JobAlreadyRunning(BricklineError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    """The key-value config document (JSON file) driving CLI and service."""

    store_path: str = "store"
    listen_addr: str = "127.0.0.1:8760"
    credentials_path: str | None = None
    token_ttl_hours: float = 12.0
    refresh_period_s: float = 600.0
    ui_dir: str | None = None
    class_list_path: str | None = None
    buildings: tuple = ()  # entries: {"meta_csv": ..., "data_csv": ..., "name": ...}
    preprocess: PreprocessConfig = PreprocessConfig()
    train: TrainConfig = TrainConfig()

    @classmethod
    def from_file(cls, path) -> "EngineConfig":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls.from_mapping(doc)

    @classmethod
    def from_mapping(cls, doc: dict) -> "EngineConfig":
        kwargs = {k: doc[k] for k in
                  ("store_path", "listen_addr", "credentials_path", "token_ttl_hours",
                   "refresh_period_s", "ui_dir", "class_list_path") if k in doc}
        kwargs["buildings"] = tuple(doc.get("buildings", ()))
        kwargs["preprocess"] = PreprocessConfig.from_mapping(doc.get("preprocess", {}))
        kwargs["train"] = TrainConfig.from_mapping(doc.get("train", {}))
        return cls(**kwargs)

    def host_port(self) -> tuple[str, int]:
        host, _, port = self.listen_addr.rpartition(":")
        return host or "127.0.0.1", int(port)


@dataclass
class _BuildingData:
    raw: dict[str, RegularSeries]       # physical units, observed mask
    dataset: PreprocessedDataset        # normalized, imputed


class Engine:
    def __init__(self, config: EngineConfig = EngineConfig(), *, store: ResultsStore | None = None):
        self.config = config
        allowed = load_class_list(config.class_list_path) if config.class_list_path else None
        self.registry = BuildingRegistry(allowed)
        self.store = store if store is not None else ResultsStore(config.store_path)
        self._data: dict[str, _BuildingData] = {}
        self._lock = threading.RLock()

    @classmethod
    def from_config(cls, config: EngineConfig) -> "Engine":
        engine = cls(config)
        for entry in config.buildings:
            engine.ingest_csv(entry["meta_csv"], entry["data_csv"], name=entry.get("name", ""))
        return engine

    # -- ingestion -----------------------------------------------------------

    def ingest_csv(self, meta_path, data_path, name: str = ""):
        """Load one building from CSVs, register it, and preprocess it."""
        series, report = load_long_csv(data_path, meta_path)
        return self.ingest_series(series, name=name), report

    def ingest_series(self, series, name: str = "") -> str:
        series = list(series)
        building_id = self.registry.register_building([s.meta for s in series], name=name)
        raw = {}
        first = last = None
        for s in series:
            if len(s) == 0:
                continue
            raw[s.meta.sensor_id] = resample_to_grid(s)
            first = int(s.timestamps[0]) if first is None else min(first, int(s.timestamps[0]))
            last = int(s.timestamps[-1]) if last is None else max(last, int(s.timestamps[-1]))
        if first is not None:
            self.registry.record_observation_range(building_id, first, last)
        dataset = run_pipeline(series, self.config.preprocess)
        with self._lock:
            self._data[building_id] = _BuildingData(raw=raw, dataset=dataset)
        return building_id

    # -- lookups -------------------------------------------------------------

    def dataset(self, building_id: str) -> PreprocessedDataset:
        with self._lock:
            if building_id not in self._data:
                raise UnknownBuilding(building_id)
            return self._data[building_id].dataset

    def find_sensor(self, sensor_id: str) -> tuple[str, RegularSeries]:
        """Resolve a sensor id across buildings (sorted id order, first match)."""
        with self._lock:
            for building_id in sorted(self._data):
                raw = self._data[building_id].raw
                if sensor_id in raw:
                    return building_id, raw[sensor_id]
        raise UnknownSensor(sensor_id)

    def processed_column(self, building_id: str, sensor_id: str) -> np.ndarray:
        """The imputed physical-unit column for a kept channel."""
        dataset = self.dataset(building_id)
        try:
            c = dataset.channels.index(sensor_id)
        except ValueError:
            raise UnknownSensor(f"{sensor_id} (not among kept channels)") from None
        return denormalize(dataset.matrix[:, c], dataset.means[c], dataset.stds[c])

    # -- statistics ----------------------------------------------------------

    def sensor_stats(self, sensor_id: str) -> stats_mod.SummaryStats:
        _, series = self.find_sensor(sensor_id)
        return stats_mod.summarize(series)

    def building_stats(self, building_id: str) -> dict:
        """Per-sensor summaries plus per-class rollup; empty channels reported,
        not fatal."""
        if not self.registry.has_building(building_id):
            raise UnknownBuilding(building_id)
        metas = {m.sensor_id: m for m in self.registry.sensors(building_id)}
        with self._lock:
            raw = dict(self._data[building_id].raw) if building_id in self._data else {}
        summaries, empty = [], []
        for sensor_id in metas:
            series = raw.get(sensor_id)
            if series is None:
                empty.append(sensor_id)
                continue
            try:
                summaries.append(stats_mod.summarize(series))
            except EmptySeries:
                empty.append(sensor_id)
        return {
            "building_id": building_id,
            "sensors": summaries,
            "empty_sensors": empty,
            "by_class": stats_mod.rollup_by_class(summaries, metas),
            "summary": self.registry.summarize_registry(building_id),
        }

    # -- training and forecasting --------------------------------------------

    def _train_config(self, seed: int | None) -> TrainConfig:
        cfg = self.config.train
        return cfg if seed is None else replace(cfg, seed=seed)

    def _run_config_snapshot(self, model_id: str, horizon: int, tc: TrainConfig) -> dict:
        return {
            "model": model_id,
            "horizon": horizon,
            "train": asdict(tc),
            "preprocess": asdict(self.config.preprocess),
        }

    def train_and_store(self, building_id: str, model_id: str, horizons=HORIZONS,
                        seed: int | None = None) -> list[str]:
        """Run one model over the horizons; persist runs, model blobs, forecasts.

        Completed runs are cached by content-hash run_id: a re-run with the
        same config, data, and seed reuses the stored result.
        """
        if model_id not in MODEL_IDS:
            raise UnknownModel(model_id)
        dataset = self.dataset(building_id)
        tc = self._train_config(seed)
        fingerprint = fingerprint_matrix(dataset.matrix, dataset.channels, dataset.grid_start)
        run_ids = []
        for horizon in horizons:
            snapshot = self._run_config_snapshot(model_id, int(horizon), tc)
            run_id = compute_run_id(snapshot, fingerprint, tc.seed)
            run_ids.append(run_id)
            try:
                existing = self.store.get_run(run_id, building_id)
            except NotFound:
                existing = None
            if existing is not None and existing.status in ("done", "failed"):
                # finished records are immutable; a failed run stays failed
                # until the config or seed (and hence the run id) changes
                if existing.status == "done":
                    log.info("run %s already done; reusing", run_id[:12])
                else:
                    log.warning("run %s previously failed (%s); change the seed "
                                "or config to retry", run_id[:12], existing.failure)
                continue
            record = RunRecord(run_id=run_id, building_id=building_id, model_id=model_id,
                               horizon=int(horizon), created_at=int(time.time()),
                               config=snapshot, status="running")
            self.store.put_run(record)
            try:
                metrics, predict = self._fit_one(dataset, model_id, int(horizon), tc, building_id, run_id)
                self.store.put_run(replace(record, status="done", metrics=metrics))
                self.store.put_forecasts(
                    building_id,
                    self._tail_forecasts(dataset, predict, int(horizon), run_id, tc.lookback))
            except Exception as exc:
                self.store.put_run(replace(record, status="failed", failure=str(exc)))
                raise
        return run_ids

    def _fit_one(self, dataset, model_id, horizon, tc, building_id, run_id):
        if model_id == "dlinear":
            model, tlog = train(dataset, horizon, tc)
            self.store.put_model_blob(building_id, run_id, model_to_bytes(model))
            predict = lambda x: forward(model, x)
            metrics = dict(score_windows(predict, dataset, horizon, tc.lookback))
            metrics["training"] = {
                "stop_epoch": tlog.stop_epoch,
                "best_epoch": tlog.best_epoch,
                "val_fallback": tlog.val_fallback,
                "wall_time_s": round(tlog.wall_time_s, 3),
            }
            return metrics, predict
        predict = lambda x: seasonal_naive(x, horizon)
        return dict(score_windows(predict, dataset, horizon, tc.lookback)), predict

    def _tail_forecasts(self, dataset: PreprocessedDataset, predict, horizon: int,
                        run_id: str, lookback: int) -> list[ForecastRecord]:
        x = dataset.matrix[-lookback:]
        yhat = predict(x[None])[0]  # H x C, normalized
        origin = dataset.grid_start + (dataset.n_steps - 1) * dataset.step_seconds
        records = []
        for c, sensor_id in enumerate(dataset.channels):
            normalized = yhat[:, c]
            physical = denormalize(normalized, dataset.means[c], dataset.stds[c])
            records.append(ForecastRecord(
                run_id=run_id, sensor_id=sensor_id, origin=origin, horizon=horizon,
                values_normalized=tuple(normalized.tolist()),
                values_physical=tuple(physical.tolist()),
            ))
        return records

    def evaluate_models(self, building_id: str, model_ids, horizons=HORIZONS,
                        seed: int | None = None) -> list[MetricReport]:
        """Pure evaluation sweep (no store writes), one report per model."""
        dataset = self.dataset(building_id)
        tc = self._train_config(seed)
        reports = []
        for model_id in model_ids:
            if model_id == "dlinear":
                factory = dlinear_factory(tc)
            elif model_id == "snaive":
                factory = snaive_factory()
            else:
                raise UnknownModel(model_id)
            reports.append(evaluate_sweep(dataset, factory, horizons, model_id=model_id,
                                          lookback=tc.lookback))
        return reports

    # -- periodic refresh ------------------------------------------------------

    def refresh_forecasts(self) -> int:
        """Re-issue forecasts for every done run from the newest data."""
        written = 0
        for building_id in self.registry.building_ids():
            try:
                dataset = self.dataset(building_id)
            except UnknownBuilding:
                continue
            for run in self.store.list_runs(building_id, status="done"):
                predict = self._predictor_for_run(building_id, run)
                if predict is None:
                    continue
                lookback = int(run.config.get("train", {}).get("lookback",
                                                               self.config.train.lookback))
                records = self._tail_forecasts(dataset, predict, run.horizon, run.run_id, lookback)
                self.store.put_forecasts(building_id, records)
                written += len(records)
        return written

    def _predictor_for_run(self, building_id: str, run: RunRecord):
        if run.model_id == "snaive":
            return lambda x: seasonal_naive(x, run.horizon)
        try:
            path = self.store.get_model_path(building_id, run.run_id)
            model = load_model(path, expect_horizon=run.horizon)
        except BricklineError as exc:
            log.warning("run %s: cannot reload model (%s); skipped", run.run_id[:12], exc)
            return None
        return lambda x: forward(model, x)


# --------------------------------------------------------------------------
# training jobs


@dataclass
class TrainJob:
    job_id: str
    building_id: str
    model_id: str
    horizons: tuple[int, ...]
    status: str = "pending"  # pending -> running -> done | failed
    run_ids: list = field(default_factory=list)
    error: str | None = None
    created_at: float = field(default_factory=time.time)

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "building": self.building_id,
            "model": self.model_id,
            "horizons": list(self.horizons),
            "status": self.status,
            "run_ids": list(self.run_ids),
            "error": self.error,
        }


class JobManager:
    """Background training jobs, one at a time per (building, model)."""

    def __init__(self, engine: Engine):
        self.engine = engine
        self._lock = threading.Lock()
        self._jobs: dict[str, TrainJob] = {}
        self._counter = 0

    def submit(self, building_id: str, model_id: str, horizons, seed: int | None = None) -> TrainJob:
        if not self.engine.registry.has_building(building_id):
            raise UnknownBuilding(building_id)
        if model_id not in MODEL_IDS:
            raise UnknownModel(model_id)
        horizons = tuple(int(h) for h in horizons)
        with self._lock:
            for job in self._jobs.values():
                if (job.building_id == building_id and job.model_id == model_id
                        and job.status in ("pending", "running")):
                    raise JobAlreadyRunning(f"job {job.job_id} already {job.status}")
            self._counter += 1
            job = TrainJob(job_id=f"job-{self._counter:04d}", building_id=building_id,
                           model_id=model_id, horizons=horizons)
            self._jobs[job.job_id] = job
        threading.Thread(target=self._run, args=(job, seed), daemon=True).start()
        return job

    def _run(self, job: TrainJob, seed: int | None) -> None:
        with self._lock:
            job.status = "running"
        try:
            run_ids = self.engine.train_and_store(job.building_id, job.model_id,
                                                  job.horizons, seed)
            with self._lock:
                job.run_ids = run_ids
                job.status = "done"
        except Exception as exc:
            log.exception("training job %s failed", job.job_id)
            with self._lock:
                job.status = "failed"
                job.error = str(exc)

    def get(self, job_id: str) -> TrainJob | None:
        with self._lock:
            return self._jobs.get(job_id)
