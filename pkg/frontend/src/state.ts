/** View state and its URL form.
 *
 * Everything needed to restore what the operator is looking at lives in the
 * location hash, so any view is deep-linkable and survives a forced re-login.
 * The auth token is deliberately NOT part of the URL.
 */

import { HORIZONS, type Horizon, type SeriesView } from "./types";

export type Route = "login" | "timeseries" | "analytics" | "statistics";

const ROUTES: readonly Route[] = ["login", "timeseries", "analytics", "statistics"];

/** Half-open [from, to) window in epoch seconds. */
export interface TimeRange {
  from: number;
  to: number;
}

export interface ViewState {
  route: Route;
  building: string | null;
  sensor: string | null;
  range: TimeRange | null;
  horizon: Horizon;
  model: string | null;
  view: SeriesView;
}

export const DEFAULT_HORIZON: Horizon = 144;

export function defaultState(): ViewState {
  return {
    route: "login",
    building: null,
    sensor: null,
    range: null,
    horizon: DEFAULT_HORIZON,
    model: null,
    view: "raw",
  };
}

export function isHorizon(n: number): n is Horizon {
  return (HORIZONS as readonly number[]).includes(n);
}

/** Intersect the wanted window with what the sensor actually covers; an empty
 * intersection falls back to the full available window. */
export function clampRange(wanted: TimeRange, available: TimeRange): TimeRange {
  const from = Math.max(wanted.from, available.from);
  const to = Math.min(wanted.to, available.to);
  if (from >= to) {
    return { ...available };
  }
  return { from, to };
}

export function stateToHash(state: ViewState): string {
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

export function stateFromHash(hash: string): ViewState {
  const state = defaultState();
  const trimmed = hash.replace(/^#\/?/, "");
  if (trimmed === "") {
    return state;
  }
  const qIdx = trimmed.indexOf("?");
  const routePart = (qIdx === -1 ? trimmed : trimmed.slice(0, qIdx)) as Route;
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
