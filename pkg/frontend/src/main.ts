/** Browser bootstrap: builds the controller with the real fetch, renders into
 * #app, and wires DOM events to controller methods through event delegation.
 * All logic lives in App/views — this file only translates DOM events. */

import { ApiClient } from "./api";
import { App } from "./app";
import { loadConfig } from "./config";
import { GRID_STEP_S } from "./types";

function zoomWindow(app: App, direction: string): { from: number; to: number } | null {
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
  // "all": an absurdly wide request — clamping snaps it to the available range
  return { from: 0, to: 4_102_444_800 };
}

function boot(): void {
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
    },
  });
  app.setResumeFromHash(location.hash);

  document.addEventListener("submit", (event) => {
    const form = event.target as HTMLFormElement;
    if (form.dataset["form"] !== "login") return;
    event.preventDefault();
    const data = new FormData(form);
    void app
      .login(String(data.get("username") ?? ""), String(data.get("password") ?? ""))
      .then((ok) => {
        if (ok) app.startPolling();
      });
  });

  document.addEventListener("change", (event) => {
    const el = event.target as HTMLElement;
    const action = el.dataset["action"];
    const value = (el as HTMLSelectElement | HTMLInputElement).value;
    if (action === "select-building" && value !== "") void app.selectBuilding(value);
    else if (action === "select-sensor" && value !== "") void app.selectSensor(value);
    else if (action === "select-horizon") void app.selectHorizon(Number(value));
    else if (action === "series-view" && (value === "raw" || value === "processed"))
      void app.setSeriesView(value);
  });

  document.addEventListener("click", (event) => {
    const el = (event.target as HTMLElement).closest("[data-zoom],[data-action],[data-route]");
    if (el === null) return;
    const zoom = (el as HTMLElement).dataset["zoom"];
    if (zoom !== undefined) {
      const next = zoomWindow(app, zoom);
      if (next !== null) void app.zoom(next.from, next.to);
      return;
    }
    const action = (el as HTMLElement).dataset["action"];
    if (action === "submit-train") {
      void app.submitTrain();
      return;
    }
    const route = (el as HTMLElement).dataset["route"];
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
