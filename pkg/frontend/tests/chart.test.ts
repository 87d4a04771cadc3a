import { describe, expect, it } from "vitest";

import { forecastPointCount, gapSegments, renderChart } from "../src/chart";

const ts = (n: number): number[] => Array.from({ length: n }, (_, i) => 1000 + 600 * i);

describe("gap segmentation", () => {
  it("splits on nulls so gaps render as breaks, not interpolation", () => {
    const segments = gapSegments({
      timestamps: ts(7),
      values: [1, 2, null, null, 5, 6, 7],
    });
    expect(segments).toHaveLength(2);
    expect(segments[0]!.ys).toEqual([1, 2]);
    expect(segments[1]!.ys).toEqual([5, 6, 7]);
  });

  it("handles leading/trailing nulls and all-null series", () => {
    expect(gapSegments({ timestamps: ts(4), values: [null, 1, 2, null] })).toHaveLength(1);
    expect(gapSegments({ timestamps: ts(3), values: [null, null, null] })).toHaveLength(0);
  });
});

describe("chart rendering", () => {
  it("a gapped history draws one polyline per segment", () => {
    const svg = renderChart({
      history: { timestamps: ts(6), values: [1, 2, null, 4, 5, 6] },
    });
    expect(svg.match(/class="history"/g)).toHaveLength(2);
    expect(svg).not.toContain("forecast");
  });

  it("an isolated point becomes a dot, not a zero-length line", () => {
    const svg = renderChart({
      history: { timestamps: ts(3), values: [1, null, 3] },
    });
    expect(svg.match(/class="history-pt"/g)).toHaveLength(2);
  });

  it("the forecast overlay is visually distinct and marks its origin", () => {
    const svg = renderChart({
      history: { timestamps: ts(5), values: [1, 2, 3, 4, 5] },
      forecast: {
        timestamps: [1000 + 600 * 5, 1000 + 600 * 6, 1000 + 600 * 7],
        values: [5.5, 6, 6.5],
        origin: 1000 + 600 * 4,
      },
    });
    expect(svg).toContain('class="forecast"');
    expect(svg).toContain("stroke-dasharray"); // dashed = distinct from history
    expect(svg).toContain('class="origin-marker"');
    expect(forecastPointCount(svg)).toBe(3);
  });

  it("renders an explicit empty state when nothing is plottable", () => {
    const svg = renderChart({ history: { timestamps: [], values: [] } });
    expect(svg).toContain('class="chart empty"');
    expect(svg).toContain("no data in range");
  });

  it("point counting sees only forecast dots, never history dots", () => {
    const svg = renderChart({
      history: { timestamps: ts(3), values: [1, null, 3] },
      forecast: { timestamps: [4000, 4600], values: [4, 5], origin: 2200 },
    });
    expect(forecastPointCount(svg)).toBe(2);
  });
});
