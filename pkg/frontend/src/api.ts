/** Typed client for the analytics API.
 *
 * Every request the dashboard makes goes through this class, so the set of
 * methods below is exactly the set of endpoints the UI can hit. The fetch
 * implementation is injectable for tests; the default is the browser's.
 */

import type {
  ApiErrorBody,
  Building,
  BuildingStats,
  ForecastPayload,
  LoginResponse,
  Sensor,
  SensorStats,
  SeriesView,
  SeriesWindow,
  TrainJobInfo,
} from "./types";

// Structural subsets of the DOM fetch types, so tests can substitute plain
// objects and the browser's own fetch/AbortController satisfy them untouched.
export interface AbortSignalLike {
  readonly aborted: boolean;
  addEventListener(type: "abort", listener: () => void): void;
}

export interface RequestOptions {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
  signal?: AbortSignalLike;
}

export interface HttpResponseLike {
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (url: string, init?: RequestOptions) => Promise<HttpResponseLike>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export function isAbortError(err: unknown): boolean {
  return err instanceof Error && err.name === "AbortError";
}

interface BuildingsResponse {
  buildings: Building[];
}

interface SensorsResponse {
  building_id: string;
  sensors: Sensor[];
}

export interface TrainRequest {
  building: string;
  model?: string;
  horizons?: number[];
  seed?: number;
}

export class ApiClient {
  private token: string | null = null;

  constructor(
    private readonly baseUrl: string,
    // the default adapter hands our structural options to the browser fetch;
    // outside tests the signal is always a real AbortSignal
    private readonly fetchFn: FetchLike = (url, init) => globalThis.fetch(url, init as RequestInit),
  ) {}

  hasToken(): boolean {
    return this.token !== null;
  }

  setToken(token: string | null): void {
    this.token = token;
  }

  clearToken(): void {
    this.token = null;
  }

  /** POST /auth/login — stores the bearer token on success. */
  async login(username: string, password: string): Promise<LoginResponse> {
    const out = await this.request<LoginResponse>("POST", "/auth/login", {
      body: { username, password },
      auth: false,
    });
    this.token = out.token;
    return out;
  }

  /** GET /buildings */
  async buildings(): Promise<Building[]> {
    const out = await this.request<BuildingsResponse>("GET", "/buildings");
    return out.buildings;
  }

  /** GET /buildings/{id}/sensors[?class=] */
  async sensors(buildingId: string, brickClass?: string): Promise<Sensor[]> {
    let path = `/buildings/${encodeURIComponent(buildingId)}/sensors`;
    if (brickClass !== undefined) {
      path += `?class=${encodeURIComponent(brickClass)}`;
    }
    const out = await this.request<SensorsResponse>("GET", path);
    return out.sensors;
  }

  /** GET /buildings/{id}/stats */
  buildingStats(buildingId: string): Promise<BuildingStats> {
    return this.request("GET", `/buildings/${encodeURIComponent(buildingId)}/stats`);
  }

  /** GET /sensors/{id}/series?view=&from=&to= — range is half-open [from, to),
   * epoch seconds. */
  series(
    sensorId: string,
    opts: { view: SeriesView; from?: number; to?: number; signal?: AbortSignalLike },
  ): Promise<SeriesWindow> {
    const params = new URLSearchParams();
    params.set("view", opts.view);
    if (opts.from !== undefined) params.set("from", String(opts.from));
    if (opts.to !== undefined) params.set("to", String(opts.to));
    return this.request(
      "GET",
      `/sensors/${encodeURIComponent(sensorId)}/series?${params.toString()}`,
      { signal: opts.signal },
    );
  }

  /** GET /sensors/{id}/forecast?horizon=[&model=] — newest stored forecast. */
  forecast(sensorId: string, horizon: number, model?: string): Promise<ForecastPayload> {
    const params = new URLSearchParams();
    params.set("horizon", String(horizon));
    if (model !== undefined) params.set("model", model);
    return this.request(
      "GET",
      `/sensors/${encodeURIComponent(sensorId)}/forecast?${params.toString()}`,
    );
  }

  /** GET /sensors/{id}/stats */
  sensorStats(sensorId: string): Promise<SensorStats> {
    return this.request("GET", `/sensors/${encodeURIComponent(sensorId)}/stats`);
  }

  /** POST /jobs/train */
  submitTrain(req: TrainRequest): Promise<TrainJobInfo> {
    return this.request("POST", "/jobs/train", { body: req });
  }

  /** GET /jobs/{id} */
  job(jobId: string): Promise<TrainJobInfo> {
    return this.request("GET", `/jobs/${encodeURIComponent(jobId)}`);
  }

  private async request<T>(
    method: string,
    path: string,
    opts: { body?: unknown; signal?: AbortSignalLike; auth?: boolean } = {},
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (opts.auth !== false && this.token !== null) {
      headers["Authorization"] = `Bearer ${this.token}`;
    }
    let body: string | undefined;
    if (opts.body !== undefined) {
      headers["Content-Type"] = "application/json";
      body = JSON.stringify(opts.body);
    }
    const res = await this.fetchFn(this.baseUrl + path, {
      method,
      headers,
      body,
      signal: opts.signal,
    });
    let payload: unknown = null;
    try {
      payload = await res.json();
    } catch {
      payload = null;
    }
    if (res.status >= 200 && res.status < 300) {
      return payload as T;
    }
    const detail = (payload as Partial<ApiErrorBody> | null)?.error;
    throw new ApiError(
      res.status,
      detail?.code ?? "HttpError",
      detail?.message ?? `HTTP ${res.status}`,
    );
  }
}
