/** The dashboard contract suite: drives the UI controller against the mock
 * API and asserts the exact endpoint traffic plus the rendered outcomes. */

import { describe, expect, it } from "vitest";

import { forecastPointCount } from "../src/chart";
import { makeHarness } from "./harness";
import { MOCK_END, MOCK_START } from "./mock_api";

describe("documented endpoint traffic", () => {
  it("login→select sensor→zoom→select horizon issues exactly the documented calls", async () => {
    const h = makeHarness();
    expect(await h.app.login("op", "secret")).toBe(true);
    await h.app.selectBuilding("bldg-x");
    await h.app.selectSensor("bldg-x-temp");
    const lastDay = { from: MOCK_END - 86_400, to: MOCK_END };
    await h.app.zoom(lastDay.from, lastDay.to);
    await h.app.selectHorizon(144);

    expect(h.mock.log).toEqual([
      "POST /auth/login",
      "GET /buildings",
      "GET /buildings/bldg-x/sensors",
      `GET /sensors/bldg-x-temp/series?view=raw&from=${MOCK_START}&to=${MOCK_END}`,
      `GET /sensors/bldg-x-temp/series?view=raw&from=${lastDay.from}&to=${lastDay.to}`,
      "GET /sensors/bldg-x-temp/forecast?horizon=144",
    ]);
  });

  it("zooming re-queries the series endpoint with the narrowed window only", async () => {
    const h = makeHarness();
    await h.app.login("op", "secret");
    await h.app.selectBuilding("bldg-x");
    await h.app.selectSensor("bldg-x-temp");
    const before = h.mock.log.length;
    // two months requested on a ten-day sensor → clamped, then narrowed to one day
    await h.app.zoom(MOCK_START - 30 * 86_400, MOCK_END + 30 * 86_400);
    await h.app.zoom(MOCK_END - 86_400, MOCK_END);
    const tail = h.mock.log.slice(before);
    expect(tail).toEqual([
      `GET /sensors/bldg-x-temp/series?view=raw&from=${MOCK_START}&to=${MOCK_END}`,
      `GET /sensors/bldg-x-temp/series?view=raw&from=${MOCK_END - 86_400}&to=${MOCK_END}`,
    ]);
    expect(h.app.series?.values).toHaveLength(144);
  });
});

describe("forecast overlay", () => {
  async function loggedInOnTemp() {
    const h = makeHarness();
    await h.app.login("op", "secret");
    await h.app.selectBuilding("bldg-x");
    await h.app.selectSensor("bldg-x-temp");
    return h;
  }

  it("overlay point count equals the selected horizon", async () => {
    const h = await loggedInOnTemp();
    await h.app.selectHorizon(144);
    expect(h.app.forecast?.values_physical).toHaveLength(144);
    expect(forecastPointCount(h.lastFrame())).toBe(144);
    expect(h.app.overlayPointCount()).toBe(144);
  });

  it("switching the horizon changes the overlay length to match", async () => {
    const h = await loggedInOnTemp();
    await h.app.selectHorizon(144);
    await h.app.selectHorizon(12);
    expect(forecastPointCount(h.lastFrame())).toBe(12);
    expect(h.mock.log.filter((l) => l.includes("/forecast?"))).toEqual([
      "GET /sensors/bldg-x-temp/forecast?horizon=144",
      "GET /sensors/bldg-x-temp/forecast?horizon=12",
    ]);
  });

  it("the overlay is appended after the observed history, visually distinct, with an origin marker", async () => {
    const h = await loggedInOnTemp();
    await h.app.selectHorizon(12);
    const frame = h.lastFrame();
    expect(frame).toContain('class="forecast"');
    expect(frame).toContain("stroke-dasharray");
    expect(frame).toContain('class="origin-marker"');
    // run metadata rendered from the payload, not recomputed
    expect(frame).toContain("model dlinear");
    expect(frame).toContain("smape=11.7000");
  });

  it("NoForecastYet renders the empty state with a job-submission prompt", async () => {
    const h = await loggedInOnTemp();
    await h.app.selectHorizon(48); // no stored forecast at 48 in the mock
    const frame = h.lastFrame();
    expect(frame).toContain('data-empty-state="forecast"');
    expect(frame).toContain("No forecast yet");
    expect(frame).toContain('data-action="submit-train"');
    expect(forecastPointCount(frame)).toBe(0);
    // the failed lookup was still a documented call
    expect(h.mock.log.at(-1)).toBe("GET /sensors/bldg-x-temp/forecast?horizon=48");
  });

  it("a horizon outside the six documented values never reaches the API", async () => {
    const h = await loggedInOnTemp();
    const before = h.mock.log.length;
    await expect(h.app.selectHorizon(37)).rejects.toThrow(/horizon must be one of/);
    expect(h.mock.log).toHaveLength(before);
  });
});

describe("login flow", () => {
  it("invalid credentials render an inline error and stay on the login view", async () => {
    const h = makeHarness();
    expect(await h.app.login("op", "wrong")).toBe(false);
    expect(h.app.state.route).toBe("login");
    expect(h.lastFrame()).toContain("Invalid username or password.");
    expect(h.lastFrame()).toContain('data-form="login"');
  });

  it("a lockout response shows the 429 notice", async () => {
    const h = makeHarness();
    h.mock.lockout = true;
    expect(await h.app.login("op", "secret")).toBe(false);
    expect(h.lastFrame()).toContain("Too many failed attempts");
  });

  it("gaps in the raw series render as breaks in the chart", async () => {
    const h = makeHarness();
    await h.app.login("op", "secret");
    await h.app.selectBuilding("bldg-x");
    await h.app.selectSensor("bldg-x-temp");
    // the mock's raw temperature series has one gap → two history polylines
    expect(h.lastFrame().match(/class="history"/g)).toHaveLength(2);
    // the processed view is gap-free → a single polyline
    await h.app.setSeriesView("processed");
    expect(h.lastFrame().match(/class="history"/g)).toHaveLength(1);
  });
});
