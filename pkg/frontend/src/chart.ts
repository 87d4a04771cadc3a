/** SVG chart rendering: observed history plus an optional forecast overlay.
 *
 * Pure string-in/string-out so it tests without a DOM. Missing values (nulls)
 * split the history into separate polyline segments — gaps render as visual
 * breaks, never as interpolated lines. The forecast is a visually distinct
 * dashed series with one dot per predicted step and a vertical marker at the
 * forecast origin.
 */

export interface ChartSeries {
  timestamps: number[]; // epoch seconds
  values: (number | null)[];
}

export interface ForecastOverlay {
  timestamps: number[]; // epoch seconds, one per predicted step
  values: number[];
  origin: number; // epoch seconds of the last observed step
}

export interface ChartSpec {
  history: ChartSeries;
  forecast?: ForecastOverlay | null;
  width?: number;
  height?: number;
}

export interface Segment {
  xs: number[];
  ys: number[];
}

/** Split a series on nulls into runs of consecutive observed points. */
export function gapSegments(series: ChartSeries): Segment[] {
  const segments: Segment[] = [];
  let current: Segment | null = null;
  for (let i = 0; i < series.values.length; i++) {
    const v = series.values[i];
    const t = series.timestamps[i];
    if (v === null || v === undefined || t === undefined || !Number.isFinite(v)) {
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

interface Scale {
  (v: number): number;
}

function makeScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const span = hi - lo;
  if (span <= 0) {
    const mid = (outLo + outHi) / 2;
    return () => mid;
  }
  return (v: number) => outLo + ((v - lo) / span) * (outHi - outLo);
}

function fmt(v: number): string {
  return String(Math.round(v * 100) / 100);
}

export function renderChart(spec: ChartSpec): string {
  const width = spec.width ?? 800;
  const height = spec.height ?? 240;
  const pad = 8;

  const segments = gapSegments(spec.history);
  const xs: number[] = [];
  const ys: number[] = [];
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
    return (
      `<svg class="chart empty" viewBox="0 0 ${width} ${height}" ` +
      `xmlns="http://www.w3.org/2000/svg" preserveAspectRatio="none">` +
      `<text x="${width / 2}" y="${height / 2}" text-anchor="middle">no data in range</text>` +
      `</svg>`
    );
  }

  const sx = makeScale(Math.min(...xs), Math.max(...xs), pad, width - pad);
  const sy = makeScale(Math.min(...ys), Math.max(...ys), height - pad, pad);

  const parts: string[] = [];
  for (const seg of segments) {
    if (seg.xs.length === 1) {
      parts.push(
        `<circle class="history-pt" cx="${fmt(sx(seg.xs[0]!))}" cy="${fmt(sy(seg.ys[0]!))}" r="2"/>`,
      );
      continue;
    }
    const points = seg.xs.map((x, i) => `${fmt(sx(x))},${fmt(sy(seg.ys[i]!))}`).join(" ");
    parts.push(`<polyline class="history" fill="none" points="${points}"/>`);
  }

  if (forecast !== null && forecast.values.length > 0) {
    const ox = fmt(sx(forecast.origin));
    parts.push(
      `<line class="origin-marker" x1="${ox}" x2="${ox}" y1="0" y2="${height}" stroke-dasharray="2 2"/>`,
    );
    const points = forecast.timestamps
      .map((x, i) => `${fmt(sx(x))},${fmt(sy(forecast.values[i]!))}`)
      .join(" ");
    parts.push(
      `<polyline class="forecast" fill="none" stroke-dasharray="5 3" points="${points}"/>`,
    );
    for (let i = 0; i < forecast.timestamps.length; i++) {
      parts.push(
        `<circle class="forecast-pt" cx="${fmt(sx(forecast.timestamps[i]!))}" ` +
          `cy="${fmt(sy(forecast.values[i]!))}" r="2"/>`,
      );
    }
  }

  return (
    `<svg class="chart" viewBox="0 0 ${width} ${height}" ` +
    `xmlns="http://www.w3.org/2000/svg" preserveAspectRatio="none">` +
    parts.join("") +
    `</svg>`
  );
}

/** Number of forecast points in a rendered chart (one dot per step). */
export function forecastPointCount(svg: string): number {
  return (svg.match(/class="forecast-pt"/g) ?? []).length;
}
