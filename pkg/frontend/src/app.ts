/** The dashboard controller: one instance owns the view state, talks to the
 * API client, and re-renders after every change. Runs entirely on the
 * single-threaded browser event loop — concurrency is handled by cancelling
 * superseded range queries (latest wins), never by locking. */

import { ApiClient, ApiError, isAbortError, type AbortSignalLike } from "./api";
import { forecastPointCount, renderChart, type ChartSeries, type ForecastOverlay } from "./chart";
import {
  clampRange,
  defaultState,
  isHorizon,
  stateFromHash,
  stateToHash,
  type Route,
  type TimeRange,
  type ViewState,
} from "./state";
import {
  GRID_STEP_S,
  HORIZONS,
  type Building,
  type BuildingStats,
  type ForecastPayload,
  type Sensor,
  type SeriesView,
  type SeriesWindow,
  type TrainJobInfo,
} from "./types";
import {
  renderAnalytics,
  renderLogin,
  renderStatistics,
  renderTimeseries,
} from "./views";

export interface Scheduler {
  schedule(fn: () => void, ms: number): unknown;
  cancel(handle: unknown): void;
}

export interface AbortHandle {
  signal: AbortSignalLike;
  abort(): void;
}

export interface AppOptions {
  api: ApiClient;
  /** Receives the full page markup after every state change. */
  render: (html: string) => void;
  /** Receives the canonical location hash after every state change. */
  navigate?: (hash: string) => void;
  scheduler?: Scheduler;
  /** Poll period for job status and latest forecasts. */
  pollIntervalMs?: number;
  makeAbort?: () => AbortHandle;
}

export const DEFAULT_POLL_INTERVAL_MS = 60_000;

/** How many times a RangeTooLarge response may trigger an automatic
 * narrower-window retry before giving up. */
const MAX_RANGE_RETRIES = 6;

const defaultScheduler: Scheduler = {
  schedule: (fn, ms) => setTimeout(fn, ms),
  cancel: (handle) => clearTimeout(handle as ReturnType<typeof setTimeout>),
};

export class App {
  state: ViewState = defaultState();
  buildings: Building[] = [];
  sensors: Sensor[] = [];
  series: SeriesWindow | null = null;
  forecast: ForecastPayload | null = null;
  /** true when the API answered NoForecastYet for the current selection. */
  forecastMissing = false;
  buildingStats: BuildingStats | null = null;
  job: TrainJobInfo | null = null;
  notice: string | null = null;
  loginError: string | null = null;
  loginNotice: string | null = null;

  private readonly api: ApiClient;
  private readonly renderFn: (html: string) => void;
  private readonly navigateFn: (hash: string) => void;
  private readonly scheduler: Scheduler;
  private readonly pollIntervalMs: number;
  private readonly makeAbort: () => AbortHandle;

  private availableRange: TimeRange | null = null;
  private seriesGeneration = 0;
  private inflight: AbortHandle | null = null;
  private pollHandle: unknown = null;
  /** View state preserved across a forced re-login (expired token). */
  private resume: ViewState | null = null;

  constructor(opts: AppOptions) {
    this.api = opts.api;
    this.renderFn = opts.render;
    this.navigateFn = opts.navigate ?? (() => {});
    this.scheduler = opts.scheduler ?? defaultScheduler;
    this.pollIntervalMs = opts.pollIntervalMs ?? DEFAULT_POLL_INTERVAL_MS;
    this.makeAbort =
      opts.makeAbort ??
      (() => {
        const ctl = new AbortController();
        return { signal: ctl.signal, abort: () => ctl.abort() };
      });
  }

  // -- login flow ------------------------------------------------------------

  /** Returns true on success; failures render an inline error and stay put. */
  async login(username: string, password: string): Promise<boolean> {
    try {
      await this.api.login(username, password);
    } catch (err) {
      if (err instanceof ApiError && err.status === 429) {
        this.loginError = "Too many failed attempts — wait a minute before retrying.";
      } else if (err instanceof ApiError && err.status === 401) {
        this.loginError = "Invalid username or password.";
      } else {
        this.loginError = err instanceof Error ? err.message : String(err);
      }
      this.render();
      return false;
    }
    this.loginError = null;
    this.loginNotice = null;
    const resume = this.resume;
    this.resume = null;
    this.state = resume ?? { ...defaultState(), route: "analytics" };
    this.buildings = await this.api.buildings();
    if (this.state.building !== null && this.hasBuilding(this.state.building)) {
      if (this.state.route === "statistics") {
        this.sensors = await this.api.sensors(this.state.building);
        this.availableRange = this.rangeOfBuilding(this.state.building);
        await this.openStatistics();
        return true;
      }
      await this.restoreSelection();
    } else {
      this.state.building = null;
      this.state.sensor = null;
      this.state.range = null;
    }
    this.sync();
    return true;
  }

  /** Re-issue the fetches a preserved view state implies (after re-login). */
  private async restoreSelection(): Promise<void> {
    const { building, sensor, range } = this.state;
    this.sensors = await this.api.sensors(building!);
    this.availableRange = this.rangeOfBuilding(building!);
    if (sensor === null || !this.sensors.some((s) => s.sensor_id === sensor)) {
      this.state.sensor = null;
      return;
    }
    this.state.range = range !== null && this.availableRange !== null
      ? clampRange(range, this.availableRange)
      : this.availableRange;
    await this.fetchSeries();
    if (this.state.route === "analytics") {
      await this.refreshForecast();
    }
  }

  /** A horizon is always selected; forecasts are fetched once the operator
   * has picked one explicitly (or a restored deep link implies one). */
  private forecastWanted(): boolean {
    return this.forecast !== null || this.forecastMissing;
  }

  // -- navigation ------------------------------------------------------------

  goTo(route: Route): void {
    this.state.route = route;
    this.sync();
  }

  async openStatistics(): Promise<void> {
    this.state.route = "statistics";
    if (this.state.building !== null) {
      try {
        this.buildingStats = await this.api.buildingStats(this.state.building);
      } catch (err) {
        this.handleError(err);
        return;
      }
    }
    this.sync();
  }

  /** Apply a deep link (location hash) after login. */
  async applyHash(hash: string): Promise<void> {
    const wanted = stateFromHash(hash);
    if (wanted.route === "login") {
      this.sync();
      return;
    }
    this.state = wanted;
    if (this.state.building === null || !this.hasBuilding(this.state.building)) {
      this.state.building = null;
      this.state.sensor = null;
      this.sync();
      return;
    }
    if (this.state.route === "statistics") {
      this.sensors = await this.api.sensors(this.state.building);
      this.availableRange = this.rangeOfBuilding(this.state.building);
      await this.openStatistics();
      return;
    }
    await this.restoreSelection();
    this.sync();
  }

  // -- selection -------------------------------------------------------------

  async selectBuilding(buildingId: string): Promise<void> {
    if (!this.hasBuilding(buildingId)) {
      this.notice = `unknown building ${buildingId}`;
      this.render();
      return;
    }
    try {
      this.sensors = await this.api.sensors(buildingId);
    } catch (err) {
      this.handleError(err);
      return;
    }
    this.state.building = buildingId;
    this.state.sensor = null;
    this.state.range = null;
    this.series = null;
    this.forecast = null;
    this.forecastMissing = false;
    this.availableRange = this.rangeOfBuilding(buildingId);
    if (this.state.route === "statistics") {
      await this.openStatistics();
      return;
    }
    this.sync();
  }

  async selectSensor(sensorId: string): Promise<void> {
    if (!this.sensors.some((s) => s.sensor_id === sensorId)) {
      this.notice = `unknown sensor ${sensorId}`;
      this.render();
      return;
    }
    this.state.sensor = sensorId;
    this.state.range = this.availableRange;
    this.forecast = null;
    this.forecastMissing = false;
    await this.fetchSeries();
    this.sync();
  }

  /** Zoom or pan: clamp to the sensor's available range and re-query — no
   * page reload, and an in-flight query is cancelled if superseded. */
  async zoom(from: number, to: number): Promise<void> {
    if (this.state.sensor === null) return;
    const available = this.availableRange ?? { from, to };
    this.state.range = clampRange({ from, to }, available);
    await this.fetchSeries();
    this.sync();
  }

  async setSeriesView(view: SeriesView): Promise<void> {
    this.state.view = view;
    if (this.state.sensor !== null) {
      await this.fetchSeries();
    }
    this.sync();
  }

  async selectHorizon(horizon: number): Promise<void> {
    if (!isHorizon(horizon)) {
      throw new Error(`horizon must be one of ${HORIZONS.join(", ")}, got ${horizon}`);
    }
    this.state.horizon = horizon;
    await this.refreshForecast();
    this.sync();
  }

  async selectModel(model: string | null): Promise<void> {
    this.state.model = model;
    if (this.forecastWanted() && this.state.sensor !== null) {
      await this.refreshForecast();
    }
    this.sync();
  }

  // -- data fetching ---------------------------------------------------------

  private async fetchSeries(attempt = 0): Promise<void> {
    const sensor = this.state.sensor;
    const range = this.state.range;
    if (sensor === null || range === null) return;

    const generation = ++this.seriesGeneration;
    this.inflight?.abort();
    const handle = this.makeAbort();
    this.inflight = handle;
    try {
      const win = await this.api.series(sensor, {
        view: this.state.view,
        from: range.from,
        to: range.to,
        signal: handle.signal,
      });
      if (generation !== this.seriesGeneration) return; // superseded
      this.series = win;
      if (attempt === 0) this.notice = null;
    } catch (err) {
      if (generation !== this.seriesGeneration || isAbortError(err)) return;
      if (err instanceof ApiError && err.code === "RangeTooLarge" && attempt < MAX_RANGE_RETRIES) {
        const span = range.to - range.from;
        const half = Math.max(GRID_STEP_S, Math.floor(span / 2));
        this.state.range = { from: range.to - half, to: range.to };
        this.notice =
          "Requested range is too large — showing the most recent half of the window.";
        return this.fetchSeries(attempt + 1);
      }
      this.handleError(err);
    }
  }

  async refreshForecast(): Promise<void> {
    const sensor = this.state.sensor;
    if (sensor === null) return;
    try {
      this.forecast = await this.api.forecast(
        sensor,
        this.state.horizon,
        this.state.model ?? undefined,
      );
      this.forecastMissing = false;
    } catch (err) {
      if (err instanceof ApiError && err.code === "NoForecastYet") {
        this.forecast = null;
        this.forecastMissing = true;
        return;
      }
      this.handleError(err);
    }
  }

  // -- training jobs ---------------------------------------------------------

  async submitTrain(): Promise<void> {
    if (this.state.building === null) return;
    try {
      this.job = await this.api.submitTrain({
        building: this.state.building,
        model: this.state.model ?? "dlinear",
        horizons: [this.state.horizon],
      });
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.notice = "A training job for this building and model is already running.";
        this.render();
        return;
      }
      this.handleError(err);
      return;
    }
    this.notice = null;
    this.render();
  }

  // -- polling ---------------------------------------------------------------

  startPolling(): void {
    if (this.pollHandle !== null) return;
    this.pollHandle = this.scheduler.schedule(() => void this.pollTick(), this.pollIntervalMs);
  }

  stopPolling(): void {
    if (this.pollHandle !== null) {
      this.scheduler.cancel(this.pollHandle);
      this.pollHandle = null;
    }
  }

  /** One poll cycle: job status while a job is active, and the latest
   * forecast for the current selection. Exposed for tests. */
  async pollTick(): Promise<void> {
    if (this.pollHandle !== null) {
      this.scheduler.cancel(this.pollHandle);
      this.pollHandle = null;
    }
    try {
      if (this.job !== null && (this.job.status === "pending" || this.job.status === "running")) {
        this.job = await this.api.job(this.job.job_id);
      }
      if (this.state.sensor !== null && this.forecastWanted()) {
        await this.refreshForecast();
      }
      this.render();
    } catch (err) {
      this.handleError(err);
      if (this.state.route === "login") return; // session gone; stop polling
    }
    this.pollHandle = this.scheduler.schedule(() => void this.pollTick(), this.pollIntervalMs);
  }

  // -- error handling --------------------------------------------------------

  private handleError(err: unknown): void {
    if (err instanceof ApiError && err.status === 401) {
      this.sessionExpired();
      return;
    }
    this.notice = err instanceof Error ? err.message : String(err);
    this.render();
  }

  /** Token no longer valid: preserve the full view state in the URL and fall
   * back to the login page; the next successful login restores it. */
  private sessionExpired(): void {
    this.resume = { ...this.state, range: this.state.range ? { ...this.state.range } : null };
    this.api.clearToken();
    this.stopPolling();
    this.loginNotice = "Session expired — please log in again.";
    const next = stateToHash(this.resume);
    this.state = { ...defaultState(), route: "login" };
    this.navigateFn(`#/login?next=${encodeURIComponent(next)}`);
    this.render();
  }

  /** Restore target parsed from a #/login?next=… deep link. */
  setResumeFromHash(hash: string): void {
    const m = /[?&]next=([^&]+)/.exec(hash);
    if (m !== null && m[1] !== undefined) {
      this.resume = stateFromHash(decodeURIComponent(m[1]));
    }
  }

  // -- rendering -------------------------------------------------------------

  private hasBuilding(buildingId: string): boolean {
    return this.buildings.some((b) => b.building_id === buildingId);
  }

  private rangeOfBuilding(buildingId: string): TimeRange | null {
    const row = this.buildings.find((b) => b.building_id === buildingId);
    if (row === undefined) return null;
    const from = Date.parse(row.start_date + "T00:00:00Z") / 1000;
    const to = Date.parse(row.end_date + "T00:00:00Z") / 1000 + 86_400;
    if (!Number.isFinite(from) || !Number.isFinite(to)) return null;
    return { from, to };
  }

  private historySeries(): ChartSeries | null {
    if (this.series === null) return null;
    return {
      timestamps: this.series.timestamps.map((t) => Date.parse(t) / 1000),
      values: this.series.values,
    };
  }

  private forecastOverlay(): ForecastOverlay | null {
    const fc = this.forecast;
    if (fc === null) return null;
    return {
      timestamps: fc.values_physical.map((_, i) => fc.origin + fc.step_seconds * (i + 1)),
      values: fc.values_physical,
      origin: fc.origin,
    };
  }

  private chartSvg(withForecast: boolean): string | null {
    const history = this.historySeries();
    if (history === null) return null;
    return renderChart({
      history,
      forecast: withForecast ? this.forecastOverlay() : null,
    });
  }

  /** Current number of rendered forecast points (0 when no overlay). */
  overlayPointCount(): number {
    const svg = this.chartSvg(true);
    return svg === null ? 0 : forecastPointCount(svg);
  }

  private sync(): void {
    this.navigateFn(stateToHash(this.state));
    this.render();
  }

  render(): void {
    this.renderFn(this.html());
  }

  html(): string {
    switch (this.state.route) {
      case "login":
        return renderLogin({ error: this.loginError, notice: this.loginNotice });
      case "timeseries":
        return renderTimeseries({
          state: this.state,
          buildings: this.buildings,
          sensors: this.sensors,
          series: this.series,
          chartSvg: this.chartSvg(false),
          notice: this.notice,
        });
      case "analytics":
        return renderAnalytics({
          state: this.state,
          buildings: this.buildings,
          sensors: this.sensors,
          chartSvg: this.chartSvg(true),
          forecast: this.forecast,
          forecastMissing: this.forecastMissing,
          job: this.job,
          notice: this.notice,
        });
      case "statistics":
        return renderStatistics({
          state: this.state,
          buildings: this.buildings,
          stats: this.buildingStats,
          notice: this.notice,
        });
    }
  }
}
