/** In-memory stand-in for the analytics service, implementing the documented
 * HTTP contract (paths, query params, payload shapes, error bodies) behind a
 * fetch-compatible function. Every request is appended to `log` so contract
 * tests can assert exactly which endpoint calls the UI issued. */

import type { FetchLike, HttpResponseLike, RequestOptions } from "../src/api";

const USERNAME = "op";
const PASSWORD = "secret";

export const MOCK_START = 1_704_067_200; // 2024-01-01T00:00:00Z
export const MOCK_STEP = 600;
export const MOCK_POINTS = 1_440; // ten days on the 10-minute grid
export const MOCK_END = MOCK_START + MOCK_POINTS * MOCK_STEP;

/** Grid slots [30, 34) of the temperature sensor have no raw observations. */
export const GAP_SLOTS: [number, number] = [30, 34];

function iso(epochSeconds: number): string {
  return new Date(epochSeconds * 1000).toISOString().replace(/\.000Z$/, "Z");
}

function jsonResponse(status: number, payload: unknown): HttpResponseLike {
  return { status, json: () => Promise.resolve(payload) };
}

function errorResponse(status: number, code: string, message: string): HttpResponseLike {
  return jsonResponse(status, { error: { status, code, message } });
}

function abortError(): Error {
  const err = new Error("request aborted");
  err.name = "AbortError";
  return err;
}

interface GatedRequest {
  release(): void;
}

export class MockApi {
  /** `${METHOD} ${path}${?query}` for every request received, in order. */
  log: string[] = [];
  /** When true, series responses are held until releaseSeries() is called. */
  gateSeries = false;
  /** Series responses larger than this return 413 RangeTooLarge. */
  seriesCap = 50_000;
  failLogin = false;
  lockout = false;
  /** Scripted job-status progression returned by successive GET /jobs/{id}. */
  jobStatuses: Array<"pending" | "running" | "done" | "failed"> = ["running", "done"];

  /** (sensor_id, horizon) pairs that have a stored forecast. */
  forecasts = new Map<string, true>([
    ["bldg-x-temp:12", true],
    ["bldg-x-temp:144", true],
    ["bldg-x-hum:144", true],
  ]);

  readonly building = {
    building_id: "bldg-x",
    name: "Mock Block",
    timeseries: 2,
    unique_classes: 2,
    start_date: "2024-01-01",
    end_date: "2024-01-10",
    duration_days: 10,
  };

  readonly sensors = [
    {
      sensor_id: "bldg-x-hum",
      brick_class: "Outside_Air_Humidity_Sensor",
      unit: "percent",
      last_updated: iso(MOCK_END - MOCK_STEP),
    },
    {
      sensor_id: "bldg-x-temp",
      brick_class: "Zone_Air_Temperature_Sensor",
      unit: "degC",
      last_updated: iso(MOCK_END - MOCK_STEP),
    },
  ];

  private readonly validTokens = new Set<string>();
  private tokenCounter = 0;
  private readonly gated: GatedRequest[] = [];
  private jobCounter = 0;

  readonly fetch: FetchLike = (url, init) => this.handle(url, init);

  expireTokens(): void {
    this.validTokens.clear();
  }

  /** Resolve the oldest still-gated series request. */
  releaseSeries(): void {
    const next = this.gated.shift();
    if (next === undefined) throw new Error("no gated series request pending");
    next.release();
  }

  gatedCount(): number {
    return this.gated.length;
  }

  private handle(url: string, init?: RequestOptions): Promise<HttpResponseLike> {
    const parsed = new URL(url, "http://mock.test");
    const method = init?.method ?? "GET";
    const path = parsed.pathname;
    this.log.push(`${method} ${path}${parsed.search}`);

    if (path === "/auth/login" && method === "POST") {
      return Promise.resolve(this.login(init?.body));
    }
    const auth = init?.headers?.["Authorization"] ?? "";
    const token = auth.startsWith("Bearer ") ? auth.slice(7) : "";
    if (!this.validTokens.has(token)) {
      return Promise.resolve(errorResponse(401, "Unauthorized", "missing or invalid token"));
    }

    if (path === "/buildings" && method === "GET") {
      return Promise.resolve(jsonResponse(200, { buildings: [this.building] }));
    }
    if (path === `/buildings/${this.building.building_id}/sensors` && method === "GET") {
      const wanted = parsed.searchParams.get("class");
      const rows =
        wanted === null ? this.sensors : this.sensors.filter((s) => s.brick_class === wanted);
      return Promise.resolve(
        jsonResponse(200, { building_id: this.building.building_id, sensors: rows }),
      );
    }
    if (path === `/buildings/${this.building.building_id}/stats` && method === "GET") {
      return Promise.resolve(jsonResponse(200, this.buildingStats()));
    }
    let m = /^\/sensors\/([^/]+)\/series$/.exec(path);
    if (m !== null && method === "GET") {
      return this.series(m[1]!, parsed.searchParams, init?.signal);
    }
    m = /^\/sensors\/([^/]+)\/forecast$/.exec(path);
    if (m !== null && method === "GET") {
      return Promise.resolve(this.forecast(m[1]!, parsed.searchParams));
    }
    m = /^\/sensors\/([^/]+)\/stats$/.exec(path);
    if (m !== null && method === "GET") {
      const row = this.statsRow(m[1]!);
      return Promise.resolve(
        row === null ? errorResponse(404, "UnknownSensor", `no sensor ${m[1]}`) : jsonResponse(200, row),
      );
    }
    if (path === "/jobs/train" && method === "POST") {
      return Promise.resolve(this.submitJob(init?.body));
    }
    m = /^\/jobs\/([^/]+)$/.exec(path);
    if (m !== null && method === "GET") {
      return Promise.resolve(this.jobStatus(m[1]!));
    }
    return Promise.resolve(errorResponse(404, "NotFound", `no route ${method} ${path}`));
  }

  private login(body: string | undefined): HttpResponseLike {
    if (this.lockout) {
      return errorResponse(429, "TooManyAttempts", "too many failed logins; retry later");
    }
    let creds: { username?: string; password?: string } = {};
    try {
      creds = JSON.parse(body ?? "{}") as typeof creds;
    } catch {
      return errorResponse(400, "BadRequest", "body must be JSON");
    }
    if (this.failLogin || creds.username !== USERNAME || creds.password !== PASSWORD) {
      return errorResponse(401, "InvalidCredentials", "unknown username or wrong password");
    }
    this.tokenCounter += 1;
    const token = `mock-token-${this.tokenCounter}`;
    this.validTokens.add(token);
    return jsonResponse(200, { token, expires_at: iso(MOCK_END + 12 * 3600) });
  }

  /** Physical value at grid slot i — a daily sine plus a slow drift. */
  valueAt(sensorId: string, i: number): number {
    const base = sensorId.endsWith("temp") ? 20 : 55;
    const amp = sensorId.endsWith("temp") ? 5 : 12;
    return (
      Math.round((base + amp * Math.sin((2 * Math.PI * i) / 144) + i * 1e-3) * 1000) / 1000
    );
  }

  private series(
    sensorId: string,
    params: URLSearchParams,
    signal: RequestOptions["signal"],
  ): Promise<HttpResponseLike> {
    const respond = (): HttpResponseLike => {
      if (!this.sensors.some((s) => s.sensor_id === sensorId)) {
        return errorResponse(404, "UnknownSensor", `no sensor ${sensorId}`);
      }
      const view = params.get("view") ?? "raw";
      if (view !== "raw" && view !== "processed") {
        return errorResponse(400, "BadRequest", `view must be raw or processed, got ${view}`);
      }
      const from = params.has("from") ? Number(params.get("from")) : MOCK_START;
      const to = params.has("to") ? Number(params.get("to")) : MOCK_END;
      if (!Number.isFinite(from) || !Number.isFinite(to)) {
        return errorResponse(400, "BadRange", "from/to must be numeric");
      }
      if (from >= to) {
        return errorResponse(400, "BadRange", "require from < to");
      }
      const ceilDiv = (a: number, b: number): number => -Math.floor(-a / b);
      const iLo = Math.min(Math.max(0, ceilDiv(from - MOCK_START, MOCK_STEP)), MOCK_POINTS);
      const iHi = Math.min(Math.max(0, ceilDiv(to - MOCK_START, MOCK_STEP)), MOCK_POINTS);
      const count = Math.max(0, iHi - iLo);
      if (count > this.seriesCap) {
        return errorResponse(
          413,
          "RangeTooLarge",
          `${count} points exceed the ${this.seriesCap}-point cap; narrow the range`,
        );
      }
      const timestamps: string[] = [];
      const values: (number | null)[] = [];
      const mask: boolean[] = [];
      const gapped = sensorId.endsWith("temp") && view === "raw";
      for (let i = iLo; i < iHi; i++) {
        timestamps.push(iso(MOCK_START + i * MOCK_STEP));
        const inGap = gapped && i >= GAP_SLOTS[0] && i < GAP_SLOTS[1];
        values.push(inGap ? null : this.valueAt(sensorId, i));
        mask.push(!inGap);
      }
      const payload: Record<string, unknown> = {
        sensor_id: sensorId,
        building_id: this.building.building_id,
        view,
        unit: sensorId.endsWith("temp") ? "degC" : "percent",
        step_seconds: MOCK_STEP,
        timestamps,
        values,
      };
      if (view === "raw") payload["mask"] = mask;
      return jsonResponse(200, payload);
    };

    if (!this.gateSeries) {
      return Promise.resolve(respond());
    }
    return new Promise<HttpResponseLike>((resolve, reject) => {
      if (signal?.aborted) {
        reject(abortError());
        return;
      }
      signal?.addEventListener("abort", () => reject(abortError()));
      this.gated.push({ release: () => resolve(respond()) });
    });
  }

  private forecast(sensorId: string, params: URLSearchParams): HttpResponseLike {
    if (!this.sensors.some((s) => s.sensor_id === sensorId)) {
      return errorResponse(404, "UnknownSensor", `no sensor ${sensorId}`);
    }
    const horizon = Number(params.get("horizon"));
    if (![12, 48, 96, 144, 432, 1008].includes(horizon)) {
      return errorResponse(400, "BadHorizon", `bad horizon ${params.get("horizon")}`);
    }
    if (!this.forecasts.has(`${sensorId}:${horizon}`)) {
      return errorResponse(
        404,
        "NoForecastYet",
        `no stored forecast for ${sensorId} at horizon ${horizon}`,
      );
    }
    const origin = MOCK_END - MOCK_STEP; // last observed grid step
    const physical = Array.from({ length: horizon }, (_, i) =>
      this.valueAt(sensorId, MOCK_POINTS + i),
    );
    return jsonResponse(200, {
      run_id: "run-mock-0001",
      sensor_id: sensorId,
      origin,
      horizon,
      values_normalized: physical.map((v) => (v - 20) / 5),
      values_physical: physical,
      step_seconds: MOCK_STEP,
      origin_iso: iso(origin),
      building_id: this.building.building_id,
      model_id: "dlinear",
      run: {
        run_id: "run-mock-0001",
        model_id: "dlinear",
        created_at: MOCK_END,
        metrics: { mae: 0.512, mse: 0.433, smape: 11.7 },
      },
    });
  }

  private statsRow(sensorId: string): Record<string, unknown> | null {
    if (!this.sensors.some((s) => s.sensor_id === sensorId)) return null;
    const temp = sensorId.endsWith("temp");
    return {
      sensor_id: sensorId,
      count: temp ? MOCK_POINTS - (GAP_SLOTS[1] - GAP_SLOTS[0]) : MOCK_POINTS,
      missing_rate: temp ? (GAP_SLOTS[1] - GAP_SLOTS[0]) / MOCK_POINTS : 0.0,
      min: temp ? 15.0 : 43.0,
      max: temp ? 25.0 : 67.0,
      mean: temp ? 20.0 : 55.0,
      std: temp ? 3.5 : 8.4,
      trend_slope: temp ? 1e-3 : -2e-4,
      last_value: this.valueAt(sensorId, MOCK_POINTS - 1),
      last_updated: MOCK_END - MOCK_STEP,
      last_updated_iso: iso(MOCK_END - MOCK_STEP),
    };
  }

  private buildingStats(): Record<string, unknown> {
    return {
      building_id: this.building.building_id,
      sensors: this.sensors.map((s) => this.statsRow(s.sensor_id)),
      empty_sensors: [],
      by_class: {
        Outside_Air_Humidity_Sensor: { count: 1, mean_of_means: 55.0 },
        Zone_Air_Temperature_Sensor: { count: 1, mean_of_means: 20.0 },
      },
      summary: {
        timeseries: this.building.timeseries,
        unique_classes: this.building.unique_classes,
        start_date: this.building.start_date,
        end_date: this.building.end_date,
        duration_days: this.building.duration_days,
      },
    };
  }

  private submitJob(body: string | undefined): HttpResponseLike {
    let req: { building?: string; model?: string; horizons?: number[] } = {};
    try {
      req = JSON.parse(body ?? "{}") as typeof req;
    } catch {
      return errorResponse(400, "BadRequest", "body must be JSON");
    }
    if (req.building !== this.building.building_id) {
      return errorResponse(404, "UnknownBuilding", `no building ${req.building}`);
    }
    this.jobCounter += 1;
    return jsonResponse(202, {
      job_id: `job-${String(this.jobCounter).padStart(4, "0")}`,
      building: req.building,
      model: req.model ?? "dlinear",
      horizons: req.horizons ?? [12, 48, 96, 144, 432, 1008],
      status: "pending",
      run_ids: [],
      error: null,
      created_at: MOCK_END,
    });
  }

  private jobStatus(jobId: string): HttpResponseLike {
    if (this.jobCounter === 0) {
      return errorResponse(404, "NotFound", `no job ${jobId}`);
    }
    const status = this.jobStatuses.length > 1 ? this.jobStatuses.shift()! : this.jobStatuses[0]!;
    return jsonResponse(200, {
      job_id: jobId,
      building: this.building.building_id,
      model: "dlinear",
      horizons: [144],
      status,
      run_ids: status === "done" ? ["run-mock-0001"] : [],
      error: status === "failed" ? "training blew up" : null,
      created_at: MOCK_END,
    });
  }
}
