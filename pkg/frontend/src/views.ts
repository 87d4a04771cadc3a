/** HTML renderers, one per page. Pure functions from data to markup; all
 * interactivity is declared through data-action attributes that the bootstrap
 * module wires to the controller. Render-only: no value shown here is
 * computed client-side. */

import { HORIZONS, type Building, type BuildingStats, type ForecastPayload, type Sensor, type SeriesWindow, type TrainJobInfo } from "./types";
import type { ViewState } from "./state";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function banner(kind: string, text: string | null): string {
  if (text === null || text === "") return "";
  return `<p class="banner ${kind}">${escapeHtml(text)}</p>`;
}

export interface LoginViewModel {
  error?: string | null;
  notice?: string | null;
}

export function renderLogin(model: LoginViewModel = {}): string {
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

function navLink(route: string, label: string, active: boolean): string {
  return `<a href="#/${route}" data-route="${route}" class="${active ? "active" : ""}">${label}</a>`;
}

export function renderNav(state: ViewState): string {
  return `
<nav>
  ${navLink("timeseries", "Time series", state.route === "timeseries")}
  ${navLink("analytics", "Analytics", state.route === "analytics")}
  ${navLink("statistics", "Statistics", state.route === "statistics")}
</nav>`;
}

export function renderBuildingSelect(buildings: Building[], selected: string | null): string {
  const options = buildings
    .map((b) => {
      const sel = b.building_id === selected ? " selected" : "";
      return `<option value="${escapeHtml(b.building_id)}"${sel}>${escapeHtml(b.name)} (${escapeHtml(b.building_id)})</option>`;
    })
    .join("");
  return `<select data-action="select-building"><option value="">— building —</option>${options}</select>`;
}

export function renderSensorSelect(sensors: Sensor[], selected: string | null): string {
  const options = sensors
    .map((s) => {
      const sel = s.sensor_id === selected ? " selected" : "";
      return `<option value="${escapeHtml(s.sensor_id)}"${sel}>${escapeHtml(s.sensor_id)} — ${escapeHtml(s.brick_class)} [${escapeHtml(s.unit)}]</option>`;
    })
    .join("");
  return `<select data-action="select-sensor"><option value="">— sensor —</option>${options}</select>`;
}

function horizonSelect(selected: number): string {
  const options = HORIZONS.map(
    (h) => `<option value="${h}"${h === selected ? " selected" : ""}>${h} steps</option>`,
  ).join("");
  return `<select data-action="select-horizon">${options}</select>`;
}

export interface PanelViewModel {
  state: ViewState;
  buildings: Building[];
  sensors: Sensor[];
  series: SeriesWindow | null;
  chartSvg: string | null;
  notice?: string | null;
}

export function renderTimeseries(model: PanelViewModel): string {
  const { state } = model;
  const viewToggle = `
    <label><input type="radio" name="series-view" data-action="series-view" value="raw"${state.view === "raw" ? " checked" : ""}/> raw</label>
    <label><input type="radio" name="series-view" data-action="series-view" value="processed"${state.view === "processed" ? " checked" : ""}/> processed</label>`;
  const zoom = `
    <button data-zoom="in">zoom in</button>
    <button data-zoom="out">zoom out</button>
    <button data-zoom="all">full range</button>`;
  const meta =
    model.series === null
      ? `<p class="hint">Pick a building and a sensor to plot its series.</p>`
      : `<p class="series-meta">${escapeHtml(model.series.sensor_id)} · ${escapeHtml(model.series.view)} · ${model.series.values.length} points · unit ${escapeHtml(model.series.unit)}</p>`;
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

export interface AnalyticsViewModel {
  state: ViewState;
  buildings: Building[];
  sensors: Sensor[];
  chartSvg: string | null;
  forecast: ForecastPayload | null;
  /** true when the API answered NoForecastYet for the current selection */
  forecastMissing: boolean;
  job: TrainJobInfo | null;
  notice?: string | null;
}

function runMetadata(forecast: ForecastPayload): string {
  const metrics = forecast.run.metrics ?? {};
  const cells = Object.keys(metrics)
    .sort()
    .map((k) => `<td>${escapeHtml(k)}=${(metrics[k] ?? 0).toFixed(4)}</td>`)
    .join("");
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

function emptyForecastState(state: ViewState): string {
  return `
  <div class="empty-state" data-empty-state="forecast">
    <p>No forecast yet for ${escapeHtml(state.sensor ?? "this sensor")} at horizon ${state.horizon}.</p>
    <button data-action="submit-train">Submit a training job</button>
  </div>`;
}

export function renderAnalytics(model: AnalyticsViewModel): string {
  const { state } = model;
  let body: string;
  if (state.sensor === null) {
    body = `<p class="hint">Pick a sensor from the dropdown to fetch forecasts.</p>`;
  } else if (model.forecastMissing) {
    body = (model.chartSvg ?? "") + emptyForecastState(state);
  } else if (model.forecast === null) {
    body = (model.chartSvg ?? "") + `<p class="hint">Pick a horizon to overlay the latest forecast.</p>`;
  } else {
    body = (model.chartSvg ?? "") + runMetadata(model.forecast);
  }
  const jobLine =
    model.job === null
      ? ""
      : `<p class="job-status">job ${escapeHtml(model.job.job_id)}: ${escapeHtml(model.job.status)}${model.job.error ? " — " + escapeHtml(model.job.error) : ""}</p>`;
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

export function trendArrow(slope: number): string {
  if (slope > 0) return "↑"; // ↑
  if (slope < 0) return "↓"; // ↓
  return "→"; // →
}

export interface StatisticsViewModel {
  state: ViewState;
  buildings: Building[];
  stats: BuildingStats | null;
  notice?: string | null;
}

export function renderStatistics(model: StatisticsViewModel): string {
  const { state, stats } = model;
  let body: string;
  if (stats === null) {
    body = `<p class="hint">Pick a building to see its statistics.</p>`;
  } else {
    const rows = stats.sensors
      .map(
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
      </tr>`,
      )
      .join("");
    const classes = Object.keys(stats.by_class)
      .sort()
      .map((cls) => {
        const roll = stats.by_class[cls]!;
        return `<tr><td>${escapeHtml(cls)}</td><td>${roll.count}</td><td>${roll.mean_of_means.toFixed(3)}</td></tr>`;
      })
      .join("");
    const empties =
      stats.empty_sensors.length === 0
        ? ""
        : `<p class="empty-sensors">No data yet: ${stats.empty_sensors.map(escapeHtml).join(", ")}</p>`;
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
