/** Wire types for the building-analytics HTTP JSON API.
 *
 * These mirror the server's payloads field-for-field; the dashboard renders
 * them as-is and never recomputes forecasts or statistics client-side.
 */

export const HORIZONS = [12, 48, 96, 144, 432, 1008] as const;
export type Horizon = (typeof HORIZONS)[number];

/** Grid resolution of every stored series, in seconds. */
export const GRID_STEP_S = 600;

export interface LoginResponse {
  token: string;
  expires_at: string;
}

export interface Building {
  building_id: string;
  name: string;
  timeseries: number;
  unique_classes: number;
  start_date: string; // YYYY-MM-DD (UTC)
  end_date: string;
  duration_days: number;
}

export interface Sensor {
  sensor_id: string;
  brick_class: string;
  unit: string;
  last_updated: string | null;
}

export type SeriesView = "raw" | "processed";

export interface SeriesWindow {
  sensor_id: string;
  building_id: string;
  view: SeriesView;
  unit: string;
  step_seconds: number;
  timestamps: string[]; // ISO-8601 UTC, one per grid step
  values: (number | null)[]; // null = missing (raw view only)
  mask?: boolean[]; // raw view: true where observed
}

export interface RunInfo {
  run_id: string;
  model_id: string;
  created_at: number;
  metrics: Record<string, number> | null;
}

export interface ForecastPayload {
  run_id: string;
  sensor_id: string;
  origin: number; // epoch seconds of the last observed grid step
  horizon: number;
  values_normalized: number[];
  values_physical: number[];
  step_seconds: number;
  origin_iso: string;
  building_id: string;
  model_id: string;
  run: RunInfo;
}

export interface SensorStats {
  sensor_id: string;
  count: number;
  missing_rate: number;
  min: number;
  max: number;
  mean: number;
  std: number;
  trend_slope: number;
  last_value: number;
  last_updated: number;
  last_updated_iso: string;
}

export interface ClassRollup {
  count: number;
  mean_of_means: number;
}

export interface BuildingStats {
  building_id: string;
  sensors: SensorStats[];
  empty_sensors: string[];
  by_class: Record<string, ClassRollup>;
  summary: {
    timeseries: number;
    unique_classes: number;
    start_date: string;
    end_date: string;
    duration_days: number;
  };
}

export interface TrainJobInfo {
  job_id: string;
  building: string;
  model: string;
  horizons: number[];
  status: "pending" | "running" | "done" | "failed";
  run_ids: string[];
  error: string | null;
  created_at: number;
}

export interface ApiErrorBody {
  error: {
    status: number;
    code: string;
    message: string;
  };
}
