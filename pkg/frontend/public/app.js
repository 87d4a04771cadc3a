"use strict";
(() => {
  // src/api.ts
  var ApiError = class extends Error {
    constructor(status, code, message) {
      super(message);
      this.status = status;
      this.code = code;
      this.name = "ApiError";
    }
  };
  function isAbortError(err) {
    return err instanceof Error && err.name === "AbortError";
  }
  var ApiClient = class {
    constructor(baseUrl, fetchFn = (url, init) => globalThis.fetch(url, init)) {
      this.baseUrl = baseUrl;
      this.fetchFn = fetchFn;
      this.token = null;
    }
    hasToken() {
      return this.token !== null;
    }
    setToken(token) {
      this.token = token;
    }
    clearToken() {
      this.token = null;
    }
    /** POST /auth/login — stores the bearer token on success. */
    async login(username, password) {
      const out = await this.request("POST", "/auth/login", {
        body: { username, password },
        auth: false
      });
      this.token = out.token;
      return out;
    }
    /** GET /buildings */
    async buildings() {
      const out = await this.request("GET", "/buildings");
      return out.buildings;
    }
    /** GET /buildings/{id}/sensors[?class=] */
    async sensors(buildingId, brickClass) {
      let path = `/buildings/${encodeURIComponent(buildingId)}/sensors`;
      if (brickClass !== void 0) {
        path += `?class=${encodeURIComponent(brickClass)}`;
      }
      const out = await this.request("GET", path);
      return out.sensors;
    }
    /** GET /buildings/{id}/stats */
    buildingStats(buildingId) {
      return this.request("GET", `/buildings/${encodeURIComponent(buildingId)}/stats`);
    }
    /** GET /sensors/{id}/series?view=&from=&to= — range is half-open [from, to),
     * epoch seconds. */
    series(sensorId, opts) {
      const params = new URLSearchParams();
      params.set("view", opts.view);
      if (opts.from !== void 0) params.set("from", String(opts.from));
      if (opts.to !== void 0) params.set("to", String(opts.to));
      return this.request(
        "GET",
        `/sensors/${encodeURIComponent(sensorId)}/series?${params.toString()}`,
        { signal: opts.signal }
      );
    }
    /** GET /sensors/{id}/forecast?horizon=[&model=] — newest stored forecast. */
    forecast(sensorId, horizon, model) {
      const params = new URLSearchParams();
      params.set("horizon", String(horizon));
      if (model !== void 0) params.set("model", model);
      return this.request(
        "GET",
        `/sensors/${encodeURIComponent(sensorId)}/forecast?${params.toString()}`
      );
    }
    /** GET /sensors/{id}/stats */
    sensorStats(sensorId) {
      return this.request("GET", `/sensors/${encodeURIComponent(sensorId)}/stats`);
    }
    /** POST /jobs/train */
    submitTrain(req) {
      return this.request("POST", "/jobs/train", { body: req });
    }
    /** GET /jobs/{id} */
    job(jobId) {
      return this.request("GET", `/jobs/${encodeURIComponent(jobId)}`);
    }
    async request(method, path, opts = {}) {
      const headers = {};
      if (opts.auth !== false && this.token !== null) {
        headers["Authorization"] = `Bearer ${this.token}`;
      }
      let body;
      if (opts.body !== void 0) {
        headers["Content-Type"] = "application/json";
        body = JSON.stringify(opts.body);
      }
      const res = await this.fetchFn(this.baseUrl + path, {
        method,
        headers,
        body,
        signal: opts.signal
      });
      let payload = null;
      try {
        payload = await res.json();
      } catch {
        payload = null;
      }
      if (res.status >= 200 && res.status < 300) {
        return payload;
      }
      const detail = payload?.error;
      throw new ApiError(
        res.status,
        detail?.code ?? "HttpError",
        detail?.message ?? `HTTP ${res.status}`
      );
    }
  };

  // src/chart.ts
  function gapSegments(series) {
    const segments = [];
    let current = null;
    for (let i = 0; i < series.values.length; i++) {
      const v = series.values[i];
      const t = series.timestamps[i];
      if (v === null || v === void 0 || t === void 0 || !Number.isFinite(v)) {
        current = null;
        continue;
      }
      if (current === null) {
        current = { xs: [], ys: [] };
        segments.push(current);
      }
      current.xs.push(t);
      current.ys.push(v);
    }
    return segments;
  }
  function makeScale(lo, hi, outLo, outHi) {
    const span = hi - lo;
    if (span <= 0) {
      const mid = (outLo + outHi) / 2;
      return () => mid;
    }
    return (v) => outLo + (v - lo) / span * (outHi - outLo);
  }
  function fmt(v) {
    return String(Math.round(v * 100) / 100);
  }
  function renderChart(spec) {
    const width = spec.width ?? 800;
    const height = spec.height ?? 240;
    const pad = 8;
    const segments = gapSegments(spec.history);
    const xs = [];
    const ys = [];
    for (const seg of segments) {
      xs.push(...seg.xs);
      ys.push(...seg.ys);
    }
    const forecast = spec.forecast ?? null;
    if (forecast !== null) {
      xs.push(forecast.origin, ...forecast.timestamps);
      ys.push(...forecast.values);
    }
    if (xs.length === 0 || ys.length === 0) {
      return `<svg class="chart empty" viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg" preserveAspectRatio="none"><text x="${width / 2}" y="${height / 2}" text-anchor="middle">no data in range</text></svg>`;
    }
    const sx = makeScale(Math.min(...xs), Math.max(...xs), pad, width - pad);
    const sy = makeScale(Math.min(...ys), Math.max(...ys), height - pad, pad);
    const parts = [];
    for (const seg of segments) {
      if (seg.xs.length === 1) {
        parts.push(
          `<circle class="history-pt" cx="${fmt(sx(seg.xs[0]))}" cy="${fmt(sy(seg.ys[0]))}" r="2"/>`
        );
        continue;
      }
      const points = seg.xs.map((x, i) => `${fmt(sx(x))},${fmt(sy(seg.ys[i]))}`).join(" ");
      parts.push(`<polyline class="history" fill="none" points="${points}"/>`);
    }
    if (forecast !== null && forecast.values.length > 0) {
      const ox = fmt(sx(forecast.origin));
      parts.push(
        `<line class="origin-marker" x1="${ox}" x2="${ox}" y1="0" y2="${height}" stroke-dasharray="2 2"/>`
      );
      const points = forecast.timestamps.map((x, i) => `${fmt(sx(x))},${fmt(sy(forecast.values[i]))}`).join(" ");
      parts.push(
        `<polyline class="forecast" fill="none" stroke-dasharray="5 3" points="${points}"/>`
      );
      for (let i = 0; i < forecast.timestamps.length; i++) {
        parts.push(
          `<circle class="forecast-pt" cx="${fmt(sx(forecast.timestamps[i]))}" cy="${fmt(sy(forecast.values[i]))}" r="2"/>`
        );
      }
    }
    return `<svg class="chart" viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg" preserveAspectRatio="none">` + parts.join("") + `</svg>`;
  }
  function forecastPointCount(svg) {
    return (svg.match(/class="forecast-pt"/g) ?? []).length;
  }

  // src/types.ts
  var HORIZONS = [12, 48, 96, 144, 432, 1008];
  var GRID_STEP_S = 600;

  // src/state.ts
  var ROUTES = ["login", "timeseries", "analytics", "statistics"];
  var DEFAULT_HORIZON = 144;
  function defaultState() {
    return {
      route: "login",
      building: null,
      sensor: null,
      range: null,
      horizon: DEFAULT_HORIZON,
      model: null,
      view: "raw"
    };
  }
  function isHorizon(n) {
    return HORIZONS.includes(n);
  }
  function clampRange(wanted, available) {
    const from = Math.max(wanted.from, available.from);
    const to = Math.min(wanted.to, available.to);
    if (from >= to) {
      return { ...available };
    }
    return { from, to };
  }
  function stateToHash(state) {
    const params = new URLSearchParams();
    if (state.building !== null) params.set("building", state.building);
    if (state.sensor !== null) params.set("sensor", state.sensor);
    if (state.range !== null) {
      params.set("from", String(state.range.from));
      params.set("to", String(state.range.to));
    }
    params.set("horizon", String(state.horizon));
    if (state.model !== null) params.set("model", state.model);
    params.set("view", state.view);
    const query = params.toString();
    return `#/${state.route}${query ? "?" + query : ""}`;
  }
  function stateFromHash(hash) {
    const state = defaultState();
    const trimmed = hash.replace(/^#\/?/, "");
    if (trimmed === "") {
      return state;
    }
    const qIdx = trimmed.indexOf("?");
    const routePart = qIdx === -1 ? trimmed : trimmed.slice(0, qIdx);
    if (ROUTES.includes(routePart)) {
      state.route = routePart;
    }
    const params = new URLSearchParams(qIdx === -1 ? "" : trimmed.slice(qIdx + 1));
    state.building = params.get("building");
    state.sensor = params.get("sensor");
    const from = Number(params.get("from"));
    const to = Number(params.get("to"));
    if (Number.isFinite(from) && Number.isFinite(to) && params.has("from") && from < to) {
      state.range = { from, to };
    }
    const horizon = Number(params.get("horizon"));
    if (isHorizon(horizon)) {
      state.horizon = horizon;
    }
    state.model = params.get("model");
    const view = params.get("view");
    if (view === "raw" || view === "processed") {
      state.view = view;
    }
    return state;
  }

  // src/views.ts
  function escapeHtml(text) {
    return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;").replace(/'/g, "&#39;");
  }
  function banner(kind, text) {
    if (text === null || text === "") return "";
    return `<p class="banner ${kind}">${escapeHtml(text)}</p>`;
  }
  function renderLogin(model = {}) {
    return `
<section class="login">
  <h1>Building analytics</h1>
  ${banner("notice", model.notice ?? null)}
  ${banner("error", model.error ?? null)}
  <form data-form="login">
    <label>Username <input name="username" autocomplete="username"/></label>
    <label>Password <input name="password" type="password" autocomplete="current-password"/></label>
    <button type="submit">Log in</button>
  </form>
</section>`;
  }
  function navLink(route, label, active) {
    return `<a href="#/${route}" data-route="${route}" class="${active ? "active" : ""}">${label}</a>`;
  }
  function renderNav(state) {
    return `
<nav>
  ${navLink("timeseries", "Time series", state.route === "timeseries")}
  ${navLink("analytics", "Analytics", state.route === "analytics")}
  ${navLink("statistics", "Statistics", state.route === "statistics")}
</nav>`;
  }
  function renderBuildingSelect(buildings, selected) {
    const options = buildings.map((b) => {
      const sel = b.building_id === selected ? " selected" : "";
      return `<option value="${escapeHtml(b.building_id)}"${sel}>${escapeHtml(b.name)} (${escapeHtml(b.building_id)})</option>`;
    }).join("");
    return `<select data-action="select-building"><option value="">\u2014 building \u2014</option>${options}</select>`;
  }
  function renderSensorSelect(sensors, selected) {
    const options = sensors.map((s) => {
      const sel = s.sensor_id === selected ? " selected" : "";
      return `<option value="${escapeHtml(s.sensor_id)}"${sel}>${escapeHtml(s.sensor_id)} \u2014 ${escapeHtml(s.brick_class)} [${escapeHtml(s.unit)}]</option>`;
    }).join("");
    return `<select data-action="select-sensor"><option value="">\u2014 sensor \u2014</option>${options}</select>`;
  }
  function horizonSelect(selected) {
    const options = HORIZONS.map(
      (h) => `<option value="${h}"${h === selected ? " selected" : ""}>${h} steps</option>`
    ).join("");
    return `<select data-action="select-horizon">${options}</select>`;
  }
  function renderTimeseries(model) {
    const { state } = model;
    const viewToggle = `
    <label><input type="radio" name="series-view" data-action="series-view" value="raw"${state.view === "raw" ? " checked" : ""}/> raw</label>
    <label><input type="radio" name="series-view" data-action="series-view" value="processed"${state.view === "processed" ? " checked" : ""}/> processed</label>`;
    const zoom = `
    <button data-zoom="in">zoom in</button>
    <button data-zoom="out">zoom out</button>
    <button data-zoom="all">full range</button>`;
    const meta = model.series === null ? `<p class="hint">Pick a building and a sensor to plot its series.</p>` : `<p class="series-meta">${escapeHtml(model.series.sensor_id)} \xB7 ${escapeHtml(model.series.view)} \xB7 ${model.series.values.length} points \xB7 unit ${escapeHtml(model.series.unit)}</p>`;
    return `
${renderNav(state)}
<section class="timeseries">
  <div class="controls">
    ${renderBuildingSelect(model.buildings, state.building)}
    ${renderSensorSelect(model.sensors, state.sensor)}
    ${viewToggle}
    ${zoom}
  </div>
  ${banner("notice", model.notice ?? null)}
  ${meta}
  ${model.chartSvg ?? ""}
</section>`;
  }
  function runMetadata(forecast) {
    const metrics = forecast.run.metrics ?? {};
    const cells = Object.keys(metrics).sort().map((k) => `<td>${escapeHtml(k)}=${(metrics[k] ?? 0).toFixed(4)}</td>`).join("");
    return `
  <table class="run-meta">
    <tr>
      <td>model ${escapeHtml(forecast.model_id)}</td>
      <td>origin ${escapeHtml(forecast.origin_iso)}</td>
      <td>horizon ${forecast.horizon}</td>
      ${cells}
    </tr>
  </table>`;
  }
  function emptyForecastState(state) {
    return `
  <div class="empty-state" data-empty-state="forecast">
    <p>No forecast yet for ${escapeHtml(state.sensor ?? "this sensor")} at horizon ${state.horizon}.</p>
    <button data-action="submit-train">Submit a training job</button>
  </div>`;
  }
  function renderAnalytics(model) {
    const { state } = model;
    let body;
    if (state.sensor === null) {
      body = `<p class="hint">Pick a sensor from the dropdown to fetch forecasts.</p>`;
    } else if (model.forecastMissing) {
      body = (model.chartSvg ?? "") + emptyForecastState(state);
    } else if (model.forecast === null) {
      body = (model.chartSvg ?? "") + `<p class="hint">Pick a horizon to overlay the latest forecast.</p>`;
    } else {
      body = (model.chartSvg ?? "") + runMetadata(model.forecast);
    }
    const jobLine = model.job === null ? "" : `<p class="job-status">job ${escapeHtml(model.job.job_id)}: ${escapeHtml(model.job.status)}${model.job.error ? " \u2014 " + escapeHtml(model.job.error) : ""}</p>`;
    return `
${renderNav(state)}
<section class="analytics">
  <div class="controls">
    ${renderBuildingSelect(model.buildings, state.building)}
    ${renderSensorSelect(model.sensors, state.sensor)}
    ${horizonSelect(state.horizon)}
    <button data-zoom="in">zoom in</button>
    <button data-zoom="out">zoom out</button>
    <button data-zoom="all">full range</button>
  </div>
  ${banner("notice", model.notice ?? null)}
  ${body}
  ${jobLine}
</section>`;
  }
  function trendArrow(slope) {
    if (slope > 0) return "\u2191";
    if (slope < 0) return "\u2193";
    return "\u2192";
  }
  function renderStatistics(model) {
    const { state, stats } = model;
    let body;
    if (stats === null) {
      body = `<p class="hint">Pick a building to see its statistics.</p>`;
    } else {
      const rows = stats.sensors.map(
        (s) => `
      <tr data-sensor-row="${escapeHtml(s.sensor_id)}">
        <td>${escapeHtml(s.sensor_id)}</td>
        <td>${s.count}</td>
        <td>${(s.missing_rate * 100).toFixed(1)}%</td>
        <td>${s.min.toFixed(3)}</td>
        <td>${s.max.toFixed(3)}</td>
        <td>${s.mean.toFixed(3)}</td>
        <td>${s.std.toFixed(3)}</td>
        <td class="trend">${trendArrow(s.trend_slope)}</td>
        <td>${escapeHtml(s.last_updated_iso)}</td>
      </tr>`
      ).join("");
      const classes = Object.keys(stats.by_class).sort().map((cls) => {
        const roll = stats.by_class[cls];
        return `<tr><td>${escapeHtml(cls)}</td><td>${roll.count}</td><td>${roll.mean_of_means.toFixed(3)}</td></tr>`;
      }).join("");
      const empties = stats.empty_sensors.length === 0 ? "" : `<p class="empty-sensors">No data yet: ${stats.empty_sensors.map(escapeHtml).join(", ")}</p>`;
      body = `
  <table class="sensor-stats">
    <thead><tr><th>sensor</th><th>count</th><th>missing</th><th>min</th><th>max</th><th>mean</th><th>std</th><th>trend</th><th>last update</th></tr></thead>
    <tbody>${rows}</tbody>
  </table>
  <h2>By Brick class</h2>
  <table class="class-stats">
    <thead><tr><th>class</th><th>sensors</th><th>mean of means</th></tr></thead>
    <tbody>${classes}</tbody>
  </table>
  ${empties}`;
    }
    return `
${renderNav(state)}
<section class="statistics">
  <div class="controls">${renderBuildingSelect(model.buildings, state.building)}</div>
  ${banner("notice", model.notice ?? null)}
  ${body}
</section>`;
  }

  // src/app.ts
  var DEFAULT_POLL_INTERVAL_MS = 6e4;
  var MAX_RANGE_RETRIES = 6;
  var defaultScheduler = {
    schedule: (fn, ms) => setTimeout(fn, ms),
    cancel: (handle) => clearTimeout(handle)
  };
  var App = class {
    constructor(opts) {
      this.state = defaultState();
      this.buildings = [];
      this.sensors = [];
      this.series = null;
      this.forecast = null;
      /** true when the API answered NoForecastYet for the current selection. */
      this.forecastMissing = false;
      this.buildingStats = null;
      this.job = null;
      this.notice = null;
      this.loginError = null;
      this.loginNotice = null;
      this.availableRange = null;
      this.seriesGeneration = 0;
      this.inflight = null;
      this.pollHandle = null;
      /** View state preserved across a forced re-login (expired token). */
      this.resume = null;
      this.api = opts.api;
      this.renderFn = opts.render;
      this.navigateFn = opts.navigate ?? (() => {
      });
      this.scheduler = opts.scheduler ?? defaultScheduler;
      this.pollIntervalMs = opts.pollIntervalMs ?? DEFAULT_POLL_INTERVAL_MS;
      this.makeAbort = opts.makeAbort ?? (() => {
        const ctl = new AbortController();
        return { signal: ctl.signal, abort: () => ctl.abort() };
      });
    }
    // -- login flow ------------------------------------------------------------
    /** Returns true on success; failures render an inline error and stay put. */
    async login(username, password) {
      try {
        await this.api.login(username, password);
      } catch (err) {
        if (err instanceof ApiError && err.status === 429) {
          this.loginError = "Too many failed attempts \u2014 wait a minute before retrying.";
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
    async restoreSelection() {
      const { building, sensor, range } = this.state;
      this.sensors = await this.api.sensors(building);
      this.availableRange = this.rangeOfBuilding(building);
      if (sensor === null || !this.sensors.some((s) => s.sensor_id === sensor)) {
        this.state.sensor = null;
        return;
      }
      this.state.range = range !== null && this.availableRange !== null ? clampRange(range, this.availableRange) : this.availableRange;
      await this.fetchSeries();
      if (this.state.route === "analytics") {
        await this.refreshForecast();
      }
    }
    /** A horizon is always selected; forecasts are fetched once the operator
     * has picked one explicitly (or a restored deep link implies one). */
    forecastWanted() {
      return this.forecast !== null || this.forecastMissing;
    }
    // -- navigation ------------------------------------------------------------
    goTo(route) {
      this.state.route = route;
      this.sync();
    }
    async openStatistics() {
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
    async applyHash(hash) {
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
    async selectBuilding(buildingId) {
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
    async selectSensor(sensorId) {
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
    async zoom(from, to) {
      if (this.state.sensor === null) return;
      const available = this.availableRange ?? { from, to };
      this.state.range = clampRange({ from, to }, available);
      await this.fetchSeries();
      this.sync();
    }
    async setSeriesView(view) {
      this.state.view = view;
      if (this.state.sensor !== null) {
        await this.fetchSeries();
      }
      this.sync();
    }
    async selectHorizon(horizon) {
      if (!isHorizon(horizon)) {
        throw new Error(`horizon must be one of ${HORIZONS.join(", ")}, got ${horizon}`);
      }
      this.state.horizon = horizon;
      await this.refreshForecast();
      this.sync();
    }
    async selectModel(model) {
      this.state.model = model;
      if (this.forecastWanted() && this.state.sensor !== null) {
        await this.refreshForecast();
      }
      this.sync();
    }
    // -- data fetching ---------------------------------------------------------
    async fetchSeries(attempt = 0) {
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
          signal: handle.signal
        });
        if (generation !== this.seriesGeneration) return;
        this.series = win;
        if (attempt === 0) this.notice = null;
      } catch (err) {
        if (generation !== this.seriesGeneration || isAbortError(err)) return;
        if (err instanceof ApiError && err.code === "RangeTooLarge" && attempt < MAX_RANGE_RETRIES) {
          const span = range.to - range.from;
          const half = Math.max(GRID_STEP_S, Math.floor(span / 2));
          this.state.range = { from: range.to - half, to: range.to };
          this.notice = "Requested range is too large \u2014 showing the most recent half of the window.";
          return this.fetchSeries(attempt + 1);
        }
        this.handleError(err);
      }
    }
    async refreshForecast() {
      const sensor = this.state.sensor;
      if (sensor === null) return;
      try {
        this.forecast = await this.api.forecast(
          sensor,
          this.state.horizon,
          this.state.model ?? void 0
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
    async submitTrain() {
      if (this.state.building === null) return;
      try {
        this.job = await this.api.submitTrain({
          building: this.state.building,
          model: this.state.model ?? "dlinear",
          horizons: [this.state.horizon]
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
    startPolling() {
      if (this.pollHandle !== null) return;
      this.pollHandle = this.scheduler.schedule(() => void this.pollTick(), this.pollIntervalMs);
    }
    stopPolling() {
      if (this.pollHandle !== null) {
        this.scheduler.cancel(this.pollHandle);
        this.pollHandle = null;
      }
    }
    /** One poll cycle: job status while a job is active, and the latest
     * forecast for the current selection. Exposed for tests. */
    async pollTick() {
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
        if (this.state.route === "login") return;
      }
      this.pollHandle = this.scheduler.schedule(() => void this.pollTick(), this.pollIntervalMs);
    }
    // -- error handling --------------------------------------------------------
    handleError(err) {
      if (err instanceof ApiError && err.status === 401) {
        this.sessionExpired();
        return;
      }
      this.notice = err instanceof Error ? err.message : String(err);
      this.render();
    }
    /** Token no longer valid: preserve the full view state in the URL and fall
     * back to the login page; the next successful login restores it. */
    sessionExpired() {
      this.resume = { ...this.state, range: this.state.range ? { ...this.state.range } : null };
      this.api.clearToken();
      this.stopPolling();
      this.loginNotice = "Session expired \u2014 please log in again.";
      const next = stateToHash(this.resume);
      this.state = { ...defaultState(), route: "login" };
      this.navigateFn(`#/login?next=${encodeURIComponent(next)}`);
      this.render();
    }
    /** Restore target parsed from a #/login?next=… deep link. */
    setResumeFromHash(hash) {
      const m = /[?&]next=([^&]+)/.exec(hash);
      if (m !== null && m[1] !== void 0) {
        this.resume = stateFromHash(decodeURIComponent(m[1]));
      }
    }
    // -- rendering -------------------------------------------------------------
    hasBuilding(buildingId) {
      return this.buildings.some((b) => b.building_id === buildingId);
    }
    rangeOfBuilding(buildingId) {
      const row = this.buildings.find((b) => b.building_id === buildingId);
      if (row === void 0) return null;
      const from = Date.parse(row.start_date + "T00:00:00Z") / 1e3;
      const to = Date.parse(row.end_date + "T00:00:00Z") / 1e3 + 86400;
      if (!Number.isFinite(from) || !Number.isFinite(to)) return null;
      return { from, to };
    }
    historySeries() {
      if (this.series === null) return null;
      return {
        timestamps: this.series.timestamps.map((t) => Date.parse(t) / 1e3),
        values: this.series.values
      };
    }
    forecastOverlay() {
      const fc = this.forecast;
      if (fc === null) return null;
      return {
        timestamps: fc.values_physical.map((_, i) => fc.origin + fc.step_seconds * (i + 1)),
        values: fc.values_physical,
        origin: fc.origin
      };
    }
    chartSvg(withForecast) {
      const history2 = this.historySeries();
      if (history2 === null) return null;
      return renderChart({
        history: history2,
        forecast: withForecast ? this.forecastOverlay() : null
      });
    }
    /** Current number of rendered forecast points (0 when no overlay). */
    overlayPointCount() {
      const svg = this.chartSvg(true);
      return svg === null ? 0 : forecastPointCount(svg);
    }
    sync() {
      this.navigateFn(stateToHash(this.state));
      this.render();
    }
    render() {
      this.renderFn(this.html());
    }
    html() {
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
            notice: this.notice
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
            notice: this.notice
          });
        case "statistics":
          return renderStatistics({
            state: this.state,
            buildings: this.buildings,
            stats: this.buildingStats,
            notice: this.notice
          });
      }
    }
  };

  // src/config.ts
  function loadConfig(doc) {
    const meta = doc?.querySelector('meta[name="api-base"]');
    const fromMeta = meta?.getAttribute("content");
    if (fromMeta) {
      return { apiBase: fromMeta.replace(/\/$/, "") };
    }
    const fromGlobal = globalThis["API_BASE"];
    if (typeof fromGlobal === "string" && fromGlobal !== "") {
      return { apiBase: fromGlobal.replace(/\/$/, "") };
    }
    return { apiBase: "" };
  }

  // src/main.ts
  function zoomWindow(app, direction) {
    const range = app.state.range;
    if (range === null) return null;
    const span = range.to - range.from;
    const mid = (range.from + range.to) / 2;
    if (direction === "in") {
      const half = Math.max(GRID_STEP_S, Math.floor(span / 4));
      return { from: mid - half, to: mid + half };
    }
    if (direction === "out") {
      return { from: mid - span, to: mid + span };
    }
    return { from: 0, to: 4102444800 };
  }
  function boot() {
    const root = document.getElementById("app");
    if (root === null) return;
    const config = loadConfig(document);
    const api = new ApiClient(config.apiBase);
    const app = new App({
      api,
      render: (html) => {
        root.innerHTML = html;
      },
      navigate: (hash) => {
        if (location.hash !== hash) {
          history.replaceState(null, "", hash);
        }
      }
    });
    app.setResumeFromHash(location.hash);
    document.addEventListener("submit", (event) => {
      const form = event.target;
      if (form.dataset["form"] !== "login") return;
      event.preventDefault();
      const data = new FormData(form);
      void app.login(String(data.get("username") ?? ""), String(data.get("password") ?? "")).then((ok) => {
        if (ok) app.startPolling();
      });
    });
    document.addEventListener("change", (event) => {
      const el = event.target;
      const action = el.dataset["action"];
      const value = el.value;
      if (action === "select-building" && value !== "") void app.selectBuilding(value);
      else if (action === "select-sensor" && value !== "") void app.selectSensor(value);
      else if (action === "select-horizon") void app.selectHorizon(Number(value));
      else if (action === "series-view" && (value === "raw" || value === "processed"))
        void app.setSeriesView(value);
    });
    document.addEventListener("click", (event) => {
      const el = event.target.closest("[data-zoom],[data-action],[data-route]");
      if (el === null) return;
      const zoom = el.dataset["zoom"];
      if (zoom !== void 0) {
        const next = zoomWindow(app, zoom);
        if (next !== null) void app.zoom(next.from, next.to);
        return;
      }
      const action = el.dataset["action"];
      if (action === "submit-train") {
        void app.submitTrain();
        return;
      }
      const route = el.dataset["route"];
      if (route === "statistics") {
        event.preventDefault();
        void app.openStatistics();
      } else if (route === "timeseries" || route === "analytics") {
        event.preventDefault();
        app.goTo(route);
      }
    });
    app.render();
  }
  if (typeof document !== "undefined") {
    boot();
  }
})();
