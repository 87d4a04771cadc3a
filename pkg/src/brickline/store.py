"""Append-only results store plus the periodic refresh scheduler.

Layout, one directory per building::

    <root>/<building>/runs/<run_id>.json
    <root>/<building>/forecasts/<sensor>/<horizon>/<origin>.json
    <root>/<building>/models/<run_id>.bin
    <root>/<building>/index.json

Every write lands in a uniquely named temp file in the destination directory
and is published with an atomic rename, so readers and crash-recovery only
ever see complete documents. The index is a rebuildable cache; the record
files are the source of truth. run_id is a content hash, which makes re-runs
idempotent.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
import uuid
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .domain import BricklineError

log = logging.getLogger(__name__)

RUN_STATUSES = ("pending", "running", "done", "failed")


class NotFound(BricklineError):
    pass


class StoreCorrupt(BricklineError):
    pass


class ImmutableRecord(BricklineError):
    pass


def canonical_json(obj) -> str:
    """Stable serialization: sorted keys, no whitespace, UTF-8 as-is."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def compute_run_id(config: dict, data_fingerprint: str, seed: int) -> str:
    payload = canonical_json({"config": config, "data": data_fingerprint, "seed": seed})
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def fingerprint_matrix(matrix: np.ndarray, channels, grid_start: int) -> str:
    digest = hashlib.sha256()
    digest.update(canonical_json({"channels": list(channels), "grid_start": grid_start,
                                  "shape": list(matrix.shape)}).encode("utf-8"))
    digest.update(np.ascontiguousarray(matrix, dtype="<f8").tobytes())
    return digest.hexdigest()


@dataclass(frozen=True)
class RunRecord:
    run_id: str
    building_id: str
    model_id: str
    horizon: int
    created_at: int
    config: dict
    status: str = "pending"
    metrics: dict | None = None
    failure: str | None = None

    def __post_init__(self):
        if self.status not in RUN_STATUSES:
            raise ValueError(f"bad status {self.status!r}")
        if self.status == "done" and self.metrics is None:
            raise ValueError("done runs must carry metrics")
        if self.status == "failed" and not self.failure:
            raise ValueError("failed runs must carry a reason")

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "building_id": self.building_id,
            "model_id": self.model_id,
            "horizon": self.horizon,
            "created_at": self.created_at,
            "config": self.config,
            "status": self.status,
            "metrics": self.metrics,
            "failure": self.failure,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RunRecord":
        try:
            return cls(**{k: payload[k] for k in
                          ("run_id", "building_id", "model_id", "horizon",
                           "created_at", "config", "status", "metrics", "failure")})
        except (KeyError, TypeError, ValueError) as exc:
            raise StoreCorrupt(f"bad run record: {exc}") from exc


@dataclass(frozen=True)
class ForecastRecord:
    run_id: str
    sensor_id: str
    origin: int          # grid timestamp of the last observed step
    horizon: int
    values_normalized: tuple
    values_physical: tuple
    step_seconds: int = 600

    def __post_init__(self):
        vn = tuple(float(v) for v in self.values_normalized)
        vp = tuple(float(v) for v in self.values_physical)
        object.__setattr__(self, "values_normalized", vn)
        object.__setattr__(self, "values_physical", vp)
        if len(vn) != self.horizon or len(vp) != self.horizon:
            raise ValueError("value arrays must have exactly `horizon` entries")
        if not all(np.isfinite(vn)) or not all(np.isfinite(vp)):
            raise ValueError("forecast values must be finite")

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "sensor_id": self.sensor_id,
            "origin": self.origin,
            "horizon": self.horizon,
            "values_normalized": list(self.values_normalized),
            "values_physical": list(self.values_physical),
            "step_seconds": self.step_seconds,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ForecastRecord":
        try:
            return cls(**{k: payload[k] for k in
                          ("run_id", "sensor_id", "origin", "horizon",
                           "values_normalized", "values_physical", "step_seconds")})
        except (KeyError, TypeError, ValueError) as exc:
            raise StoreCorrupt(f"bad forecast record: {exc}") from exc


class ResultsStore:
    """Single-writer, multi-reader document store over flat JSON files.

    `fault_hook`, when set, is invoked between the temp-file write and the
    rename — tests use it to simulate a crash at the most dangerous moment.
    """

    def __init__(self, root, fault_hook=None):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.fault_hook = fault_hook
        self._write_lock = threading.Lock()

    # -- low-level ---------------------------------------------------------

    def _publish(self, path: Path, data: bytes) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.parent / f"{path.name}.{uuid.uuid4().hex}.tmp"
        with open(tmp, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        if self.fault_hook is not None:
            self.fault_hook(path)
        os.replace(tmp, path)

    def _write_json(self, path: Path, obj) -> None:
        self._publish(path, (canonical_json(obj) + "\n").encode("utf-8"))

    @staticmethod
    def _read_json(path: Path) -> dict:
        try:
            with open(path, encoding="utf-8") as fh:
                return json.load(fh)
        except FileNotFoundError:
            raise
        except (OSError, json.JSONDecodeError) as exc:
            raise StoreCorrupt(f"{path}: {exc}") from exc

    def _building_dir(self, building_id: str) -> Path:
        safe = building_id.replace("/", "_")
        return self.root / safe

    # -- runs ----------------------------------------------------------------

    def put_run(self, record: RunRecord) -> None:
        """Write or advance a run. Done/failed records are immutable: re-putting
        an identical one is a no-op, mutating one is an error."""
        path = self._building_dir(record.building_id) / "runs" / f"{record.run_id}.json"
        with self._write_lock:
            try:
                existing = self._read_json(path)
            except FileNotFoundError:
                existing = None
            if existing is not None and existing.get("status") in ("done", "failed"):
                if existing == record.to_dict():
                    return
                raise ImmutableRecord(f"run {record.run_id} is already {existing['status']}")
            self._write_json(path, record.to_dict())
            self._refresh_index(record.building_id)

    def get_run(self, run_id: str, building_id: str | None = None) -> RunRecord:
        for bdir in self._building_dirs(building_id):
            path = bdir / "runs" / f"{run_id}.json"
            if path.exists():
                return RunRecord.from_dict(self._read_json(path))
        raise NotFound(f"run {run_id}")

    def list_runs(self, building_id: str | None = None, model_id: str | None = None,
                  status: str | None = None) -> list[RunRecord]:
        """Newest-first run listing, optionally filtered."""
        out = []
        for bdir in self._building_dirs(building_id):
            runs_dir = bdir / "runs"
            if not runs_dir.is_dir():
                continue
            for path in runs_dir.glob("*.json"):
                record = RunRecord.from_dict(self._read_json(path))
                if model_id is not None and record.model_id != model_id:
                    continue
                if status is not None and record.status != status:
                    continue
                out.append(record)
        out.sort(key=lambda r: (-r.created_at, r.run_id))
        return out

    def _building_dirs(self, building_id: str | None):
        if building_id is not None:
            yield self._building_dir(building_id)
            return
        if self.root.is_dir():
            yield from sorted(p for p in self.root.iterdir() if p.is_dir())

    def _refresh_index(self, building_id: str) -> None:
        """Rewrite the per-building index cache from the record files."""
        bdir = self._building_dir(building_id)
        runs_dir = bdir / "runs"
        entries = {}
        if runs_dir.is_dir():
            for path in sorted(runs_dir.glob("*.json")):
                payload = self._read_json(path)
                entries[payload["run_id"]] = {
                    "model_id": payload["model_id"],
                    "horizon": payload["horizon"],
                    "status": payload["status"],
                    "created_at": payload["created_at"],
                }
        self._write_json(bdir / "index.json", {"runs": entries})

    # -- forecasts -----------------------------------------------------------

    def put_forecasts(self, building_id: str, records) -> None:
        with self._write_lock:
            for record in records:
                run_path = self._building_dir(building_id) / "runs" / f"{record.run_id}.json"
                if not run_path.exists():
                    raise NotFound(f"run {record.run_id} (store forecasts after their run)")
                path = (self._building_dir(building_id) / "forecasts" / record.sensor_id
                        / str(record.horizon) / f"{record.origin}.json")
                self._write_json(path, record.to_dict())

    def query_forecast(self, building_id: str, sensor_id: str, horizon: int,
                       at: int | None = None, model_id: str | None = None) -> ForecastRecord:
        """Latest forecast for (sensor, horizon) — newest origin ≤ `at` if given,
        optionally restricted to runs of one model."""
        fdir = self._building_dir(building_id) / "forecasts" / sensor_id / str(horizon)
        if not fdir.is_dir():
            raise NotFound(f"no forecast for {sensor_id} at horizon {horizon}")
        origins = []
        for path in fdir.glob("*.json"):
            try:
                origins.append(int(path.stem))
            except ValueError:
                raise StoreCorrupt(f"{path}: origin filename must be an integer")
        origins.sort(reverse=True)
        for origin in origins:
            if at is not None and origin > at:
                continue
            record = ForecastRecord.from_dict(self._read_json(fdir / f"{origin}.json"))
            if model_id is not None:
                run = self.get_run(record.run_id, building_id)
                if run.model_id != model_id:
                    continue
            return record
        raise NotFound(f"no forecast for {sensor_id} at horizon {horizon}")

    # -- model blobs -----------------------------------------------------------

    def put_model_blob(self, building_id: str, run_id: str, blob: bytes) -> Path:
        path = self._building_dir(building_id) / "models" / f"{run_id}.bin"
        with self._write_lock:
            self._publish(path, blob)
        return path

    def get_model_path(self, building_id: str, run_id: str) -> Path:
        path = self._building_dir(building_id) / "models" / f"{run_id}.bin"
        if not path.exists():
            raise NotFound(f"model blob for run {run_id}")
        return path

    # -- hygiene -----------------------------------------------------------

    def sweep_temp_files(self) -> int:
        """Remove leftover temp files from interrupted writes; returns count."""
        removed = 0
        for tmp in self.root.rglob("*.tmp"):
            tmp.unlink(missing_ok=True)
            removed += 1
        return removed


class RefreshScheduler:
    """Fixed-period job runner with overlap skipping and a clean stop.

    Ticks fire at start + k*period. A tick whose deadline passed while the
    previous invocation was still running — or while it is still busy — is
    skipped and counted, never run late. `clock`/`sleep_fn`/`worker` are
    injectable so tests can drive a mock clock synchronously.
    """

    def __init__(self, period_s: float, job, *, clock=time.monotonic,
                 sleep_fn=None, worker=None):
        if period_s <= 0:
            raise ValueError("period must be > 0")
        self.period_s = period_s
        self.job = job
        self._clock = clock
        self._stop = threading.Event()
        self._sleep = sleep_fn if sleep_fn is not None else self._stop.wait
        self._worker = worker if worker is not None else self._thread_worker
        self._busy = threading.Event()
        self._thread = None
        self.invocations = 0
        self.skipped = 0

    @staticmethod
    def _thread_worker(fn):
        threading.Thread(target=fn, daemon=True).start()

    def start(self) -> "RefreshScheduler":
        self._thread = threading.Thread(target=self.run, daemon=True)
        self._thread.start()
        return self

    def run(self) -> None:
        """The timer loop; public so tests can run it on their own thread."""
        next_t = self._clock() + self.period_s
        while not self._stop.is_set():
            now = self._clock()
            if now >= next_t:
                self.skipped += 1
                log.warning("refresh tick at %s skipped (previous job overran)", next_t)
                next_t += self.period_s
                continue
            self._sleep(next_t - now)
            if self._stop.is_set():
                break
            next_t += self.period_s
            if self._busy.is_set():
                self.skipped += 1
                log.warning("refresh tick skipped (job still running)")
                continue
            self._busy.set()
            self._worker(self._run_once)

    def _run_once(self):
        try:
            self.job()
        except Exception:
            log.exception("scheduled refresh job failed; scheduler continues")
        finally:
            self.invocations += 1
            self._busy.clear()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None and self._thread is not threading.current_thread():
            self._thread.join(timeout=5.0)


def schedule_refresh(period_s: float, job, **kwargs) -> RefreshScheduler:
    """Start a refresh scheduler; returns the handle (call .stop() when done)."""
    return RefreshScheduler(period_s, job, **kwargs).start()
