"""Authenticated HTTP JSON API: login, queries, training-job control.

Built on the stdlib threading HTTP server. Handlers are stateless; shared
state lives in the engine, the results store (single-writer contract), and
the in-memory token table. Every error body has the same shape::

    {"error": {"status": 404, "code": "UnknownSensor", "message": "..."}}
"""

from __future__ import annotations

import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlsplit

import numpy as np

from .auth import CredentialsFile, LoginRateLimiter, TokenTable
from .dlinear import HORIZONS
from .domain import UnknownBuilding, UnknownSensor, format_iso8601, parse_iso8601
from .engine import Engine, JobAlreadyRunning, JobManager, UnknownModel
from .ingest import EmptySeries
from .store import NotFound

log = logging.getLogger(__name__)

MAX_SERIES_POINTS = 50_000

_STATIC_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
    ".map": "application/json",
}


class _HttpError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _bad_request(message: str) -> _HttpError:
    return _HttpError(400, "BadRequest", message)


def _parse_ts(raw: str, name: str) -> int:
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return parse_iso8601(raw)
    except ValueError:
        raise _HttpError(400, "BadRange", f"cannot parse {name}={raw!r}") from None


def _jsonable_values(values) -> list:
    """JSON has no NaN: missing entries become null."""
    return [float(v) if np.isfinite(v) else None for v in values]


class ApiService:
    """Everything the handlers need, plus server construction."""

    def __init__(self, engine: Engine, credentials: CredentialsFile, *,
                 token_ttl_s: float = 12 * 3600, ui_dir=None, clock=None):
        self.engine = engine
        self.credentials = credentials
        kwargs = {} if clock is None else {"clock": clock}
        self.tokens = TokenTable(token_ttl_s, **kwargs)
        self.limiter = LoginRateLimiter(**kwargs)
        self.jobs = JobManager(engine)
        self.ui_dir = Path(ui_dir).resolve() if ui_dir else None

    def make_server(self, host: str, port: int) -> ThreadingHTTPServer:
        service = self

        class Handler(_Handler):
            pass

        Handler.service = service
        server = ThreadingHTTPServer((host, port), Handler)
        server.daemon_threads = True
        return server

    def serve_forever(self, host: str, port: int) -> ThreadingHTTPServer:
        server = self.make_server(host, port)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        log.info("API listening on http://%s:%d", host, port)
        return server


class _Handler(BaseHTTPRequestHandler):
    service: ApiService  # bound by ApiService.make_server
    protocol_version = "HTTP/1.1"

    # -- plumbing ------------------------------------------------------------

    def log_message(self, fmt, *args):
        log.debug("%s - %s", self.address_string(), fmt % args)

    def _cors(self):
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Authorization, Content-Type")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")

    def _send_bytes(self, status: int, data: bytes, content_type: str):
        self.send_response(status)
        self._cors()
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _send_json(self, payload, status: int = 200):
        self._send_bytes(status, json.dumps(payload).encode("utf-8"), "application/json")

    def _send_error_body(self, status: int, code: str, message: str):
        self._send_json({"error": {"status": status, "code": code, "message": message}},
                        status=status)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            raise _bad_request("missing JSON body")
        try:
            body = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            raise _bad_request("body is not valid JSON") from None
        if not isinstance(body, dict):
            raise _bad_request("body must be a JSON object")
        return body

    def _require_auth(self) -> str:
        header = self.headers.get("Authorization") or ""
        token = header[7:] if header.startswith("Bearer ") else None
        user = self.service.tokens.validate(token)
        if user is None:
            raise _HttpError(401, "Unauthorized", "missing, invalid, or expired token")
        return user

    # -- dispatch ------------------------------------------------------------

    def do_OPTIONS(self):
        self.send_response(204)
        self._cors()
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def _dispatch(self, method: str):
        url = urlsplit(self.path)
        parts = [p for p in url.path.split("/") if p]
        query = {k: v[-1] for k, v in parse_qs(url.query).items()}
        try:
            self._route(method, parts, query)
        except _HttpError as exc:
            self._send_error_body(exc.status, exc.code, exc.message)
        except (UnknownBuilding, UnknownSensor) as exc:
            self._send_error_body(404, type(exc).__name__, str(exc))
        except NotFound as exc:
            self._send_error_body(404, "NotFound", str(exc))
        except JobAlreadyRunning as exc:
            self._send_error_body(409, "JobAlreadyRunning", str(exc))
        except UnknownModel as exc:
            self._send_error_body(400, "UnknownModel", str(exc))
        except BrokenPipeError:
            pass
        except Exception as exc:  # noqa: BLE001 - last-resort boundary
            log.exception("unhandled error on %s %s", method, self.path)
            self._send_error_body(500, "InternalError", f"{type(exc).__name__}: {exc}")

    def _route(self, method: str, parts: list[str], query: dict):
        if method == "POST" and parts == ["auth", "login"]:
            return self._login()
        if self.service.ui_dir is not None:
            if method == "GET" and (not parts or parts == ["ui"]) :
                return self._static(["index.html"])
            if method == "GET" and parts[:1] == ["ui"]:
                return self._static(parts[1:] or ["index.html"])
        self._require_auth()

        if method == "GET":
            if parts == ["buildings"]:
                return self._buildings()
            if len(parts) == 3 and parts[0] == "buildings" and parts[2] == "sensors":
                return self._sensors(parts[1], query)
            if len(parts) == 3 and parts[0] == "buildings" and parts[2] == "stats":
                return self._building_stats(parts[1])
            if len(parts) == 3 and parts[0] == "sensors" and parts[2] == "series":
                return self._series(parts[1], query)
            if len(parts) == 3 and parts[0] == "sensors" and parts[2] == "forecast":
                return self._forecast(parts[1], query)
            if len(parts) == 3 and parts[0] == "sensors" and parts[2] == "stats":
                return self._sensor_stats(parts[1])
            if len(parts) == 2 and parts[0] == "jobs":
                return self._job_status(parts[1])
        if method == "POST" and parts == ["jobs", "train"]:
            return self._submit_job()
        raise _HttpError(404, "NotFound", f"no route for {method} {self.path}")

    # -- endpoints -----------------------------------------------------------

    def _login(self):
        body = self._read_body()
        username = body.get("username")
        password = body.get("password")
        if not isinstance(username, str) or not isinstance(password, str):
            raise _bad_request("username and password are required")
        if self.service.limiter.blocked(username):
            raise _HttpError(429, "TooManyAttempts",
                             "too many failed logins; wait a minute")
        if not self.service.credentials.verify(username, password):
            self.service.limiter.record_failure(username)
            raise _HttpError(401, "InvalidCredentials", "bad username or password")
        self.service.limiter.record_success(username)
        session = self.service.tokens.issue(username)
        self._send_json({
            "token": session.token,
            "expires_at": format_iso8601(int(session.expires_at)),
        })

    def _buildings(self):
        engine = self.service.engine
        rows = []
        for building_id in sorted(engine.registry.building_ids()):
            summary = engine.registry.summarize_registry(building_id)
            rows.append({
                "building_id": building_id,
                "name": engine.registry.building_name(building_id),
                "timeseries": summary.timeseries,
                "unique_classes": summary.unique_classes,
                "start_date": summary.start_date,
                "end_date": summary.end_date,
                "duration_days": summary.duration_days,
            })
        self._send_json({"buildings": rows})

    def _sensors(self, building_id: str, query: dict):
        engine = self.service.engine
        wanted = query.get("class")
        stats = engine.building_stats(building_id)
        last_by_sensor = {s.sensor_id: s.last_updated for s in stats["sensors"]}
        rows = []
        for meta in sorted(engine.registry.sensors(building_id), key=lambda m: m.sensor_id):
            if wanted is not None and meta.brick_class != wanted:
                continue
            last = last_by_sensor.get(meta.sensor_id)
            rows.append({
                "sensor_id": meta.sensor_id,
                "brick_class": meta.brick_class,
                "unit": meta.unit,
                "last_updated": None if last is None else format_iso8601(last),
            })
        self._send_json({"building_id": building_id, "sensors": rows})

    def _building_stats(self, building_id: str):
        payload = self.service.engine.building_stats(building_id)
        summary = payload["summary"]
        self._send_json({
            "building_id": building_id,
            "sensors": [s.to_dict() for s in payload["sensors"]],
            "empty_sensors": payload["empty_sensors"],
            "by_class": payload["by_class"],
            "summary": {
                "timeseries": summary.timeseries,
                "unique_classes": summary.unique_classes,
                "start_date": summary.start_date,
                "end_date": summary.end_date,
                "duration_days": summary.duration_days,
            },
        })

    def _series(self, sensor_id: str, query: dict):
        engine = self.service.engine
        view = query.get("view", "raw")
        if view not in ("raw", "processed"):
            raise _bad_request(f"view must be raw or processed, got {view!r}")
        building_id, raw = engine.find_sensor(sensor_id)

        if view == "raw":
            start, values, mask = raw.start, raw.values, raw.mask
            unit = raw.meta.unit
        else:
            dataset = engine.dataset(building_id)
            values = engine.processed_column(building_id, sensor_id)
            start, mask = dataset.grid_start, None
            unit = raw.meta.unit

        n = len(values)
        lo_ts = _parse_ts(query["from"], "from") if "from" in query else start
        hi_ts = _parse_ts(query["to"], "to") if "to" in query else start + 600 * n
        if lo_ts >= hi_ts:
            raise _HttpError(400, "BadRange", "require from < to")

        def ceil_div(a: int, b: int) -> int:
            return -((-a) // b)

        i_lo = min(max(0, ceil_div(lo_ts - start, 600)), n)
        i_hi = min(max(0, ceil_div(hi_ts - start, 600)), n)
        count = max(0, i_hi - i_lo)
        if count > MAX_SERIES_POINTS:
            raise _HttpError(413, "RangeTooLarge",
                             f"{count} points exceed the {MAX_SERIES_POINTS}-point cap; "
                             "narrow the range")
        timestamps = [format_iso8601(start + 600 * i) for i in range(i_lo, i_hi)]
        payload = {
            "sensor_id": sensor_id,
            "building_id": building_id,
            "view": view,
            "unit": unit,
            "step_seconds": 600,
            "timestamps": timestamps,
            "values": _jsonable_values(values[i_lo:i_hi]),
        }
        if mask is not None:
            payload["mask"] = [bool(b) for b in mask[i_lo:i_hi]]
        self._send_json(payload)

    def _forecast(self, sensor_id: str, query: dict):
        engine = self.service.engine
        raw_h = query.get("horizon")
        try:
            horizon = int(raw_h)
        except (TypeError, ValueError):
            raise _HttpError(400, "BadHorizon", f"horizon must be an integer, got {raw_h!r}") from None
        if horizon not in HORIZONS:
            raise _HttpError(400, "BadHorizon",
                             f"horizon must be one of {sorted(HORIZONS)}, got {horizon}")
        building_id, _ = engine.find_sensor(sensor_id)
        try:
            record = engine.store.query_forecast(building_id, sensor_id, horizon,
                                                 model_id=query.get("model"))
        except NotFound:
            raise _HttpError(404, "NoForecastYet",
                             f"no stored forecast for {sensor_id} at horizon {horizon}") from None
        run = engine.store.get_run(record.run_id, building_id)
        payload = record.to_dict()
        payload["origin_iso"] = format_iso8601(record.origin)
        payload["building_id"] = building_id
        payload["model_id"] = run.model_id
        payload["run"] = {
            "run_id": run.run_id,
            "model_id": run.model_id,
            "created_at": run.created_at,
            "metrics": run.metrics,
        }
        self._send_json(payload)

    def _sensor_stats(self, sensor_id: str):
        try:
            summary = self.service.engine.sensor_stats(sensor_id)
        except EmptySeries:
            raise _HttpError(404, "EmptySeries", f"{sensor_id} has no observations") from None
        self._send_json(summary.to_dict())

    def _submit_job(self):
        body = self._read_body()
        building = body.get("building")
        model = body.get("model", "dlinear")
        horizons = body.get("horizons", list(HORIZONS))
        seed = body.get("seed")
        if not isinstance(building, str):
            raise _bad_request("'building' is required")
        if not isinstance(horizons, list) or not horizons:
            raise _bad_request("'horizons' must be a non-empty list")
        for h in horizons:
            if not isinstance(h, int) or h not in HORIZONS:
                raise _HttpError(400, "BadHorizon",
                                 f"horizon must be one of {sorted(HORIZONS)}, got {h!r}")
        if seed is not None and not isinstance(seed, int):
            raise _bad_request("'seed' must be an integer")
        job = self.service.jobs.submit(building, model, horizons, seed)
        self._send_json(job.to_dict(), status=202)

    def _job_status(self, job_id: str):
        job = self.service.jobs.get(job_id)
        if job is None:
            raise _HttpError(404, "NotFound", f"no job {job_id}")
        self._send_json(job.to_dict())

    # -- static dashboard ------------------------------------------------------

    def _static(self, rel_parts: list[str]):
        root = self.service.ui_dir
        target = (root / Path(*rel_parts)).resolve()
        if root not in target.parents and target != root:
            raise _HttpError(404, "NotFound", "no such file")
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            raise _HttpError(404, "NotFound", "no such file")
        ctype = _STATIC_TYPES.get(target.suffix.lower(), "application/octet-stream")
        self._send_bytes(200, target.read_bytes(), ctype)
