import { describe, expect, it } from "vitest";

import { defaultState } from "../src/state";
import {
  escapeHtml,
  renderAnalytics,
  renderLogin,
  renderStatistics,
  trendArrow,
} from "../src/views";
import type { BuildingStats, SensorStats } from "../src/types";

describe("login view", () => {
  it("renders an inline error banner without navigating away", () => {
    const html = renderLogin({ error: "Invalid username or password." });
    expect(html).toContain('data-form="login"');
    expect(html).toContain("Invalid username or password.");
    expect(html).toContain('class="banner error"');
  });

  it("renders a lockout/session notice when given", () => {
    const html = renderLogin({ notice: "Session expired — please log in again." });
    expect(html).toContain('class="banner notice"');
    expect(html).toContain("Session expired");
  });

  it("escapes anything reflected into markup", () => {
    expect(escapeHtml(`<img src=x onerror="pwn()">`)).not.toContain("<img");
    const html = renderLogin({ error: `<script>alert(1)</script>` });
    expect(html).not.toContain("<script>");
  });
});

describe("analytics view", () => {
  const base = {
    state: { ...defaultState(), route: "analytics" as const, sensor: "s-1", building: "b" },
    buildings: [],
    sensors: [],
    chartSvg: "<svg class=\"chart\"></svg>",
    job: null,
  };

  it("NoForecastYet renders the empty state with a training prompt", () => {
    const html = renderAnalytics({ ...base, forecast: null, forecastMissing: true });
    expect(html).toContain('data-empty-state="forecast"');
    expect(html).toContain("No forecast yet");
    expect(html).toContain('data-action="submit-train"');
  });

  it("a loaded forecast shows run metadata instead of the empty state", () => {
    const html = renderAnalytics({
      ...base,
      forecastMissing: false,
      forecast: {
        run_id: "r1",
        sensor_id: "s-1",
        origin: 1000,
        horizon: 144,
        values_normalized: [],
        values_physical: [],
        step_seconds: 600,
        origin_iso: "2024-01-10T23:50:00Z",
        building_id: "b",
        model_id: "dlinear",
        run: { run_id: "r1", model_id: "dlinear", created_at: 5, metrics: { smape: 11.71 } },
      },
    });
    expect(html).not.toContain("data-empty-state");
    expect(html).toContain("model dlinear");
    expect(html).toContain("2024-01-10T23:50:00Z");
    expect(html).toContain("smape=11.7100");
  });
});

describe("statistics view", () => {
  const row = (overrides: Partial<SensorStats>): SensorStats => ({
    sensor_id: "s",
    count: 10,
    missing_rate: 0,
    min: 0,
    max: 1,
    mean: 0.5,
    std: 0.1,
    trend_slope: 0,
    last_value: 1,
    last_updated: 1000,
    last_updated_iso: "2024-01-01T00:00:00Z",
    ...overrides,
  });

  it("trend arrows follow the slope sign", () => {
    expect(trendArrow(0.5)).toBe("↑");
    expect(trendArrow(-0.5)).toBe("↓");
    expect(trendArrow(0)).toBe("→");
  });

  it("renders one row per sensor and the class rollup", () => {
    const stats: BuildingStats = {
      building_id: "b",
      sensors: [
        row({ sensor_id: "b-ramp", trend_slope: 0.9 }),
        row({ sensor_id: "b-const", trend_slope: 0 }),
        row({ sensor_id: "b-fall", trend_slope: -0.9 }),
      ],
      empty_sensors: ["b-dead"],
      by_class: { Zone_Air_Temperature_Sensor: { count: 3, mean_of_means: 0.5 } },
      summary: {
        timeseries: 3,
        unique_classes: 1,
        start_date: "2024-01-01",
        end_date: "2024-01-10",
        duration_days: 10,
      },
    };
    const html = renderStatistics({
      state: { ...defaultState(), route: "statistics" },
      buildings: [],
      stats,
    });
    expect(html.match(/data-sensor-row=/g)).toHaveLength(3);
    expect(html).toContain('data-sensor-row="b-ramp"');
    expect(html).toContain("↑");
    expect(html).toContain("↓");
    expect(html).toContain("→");
    expect(html).toContain("Zone_Air_Temperature_Sensor");
    expect(html).toContain("b-dead");
  });
});
