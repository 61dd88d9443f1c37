import { scaleLinear, scaleLog } from "d3-scale";
import { area, line } from "d3-shape";

import type { EnsembleRow, ParsedCsv, TraceRow } from "./schema.js";

export type XAxis = "iteration" | "time";

export interface PlotSeries {
  label: string;
  x: number[];
  y: number[];
  /** Present for ensemble inputs: pointwise minimum and maximum. */
  band?: { lo: number[]; hi: number[] };
  /** Rows excluded because an RSE value was missing or not positive
   * (the y-axis is always logarithmic). */
  dropped: number;
}

export interface FigureOptions {
  xAxis: XAxis;
  width?: number;
  height?: number;
}

export interface Figure {
  series: PlotSeries[];
  svg: string;
}

const NS_PER_SECOND = 1e9;
const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const MARGIN = { top: 20, right: 24, bottom: 46, left: 68 };

function positive(v: number | null): v is number {
  return v !== null && v > 0;
}

/** Turn a parsed CSV into plottable arrays. Values are copied verbatim from
 * the file; the only transformation is dropping rows a log axis cannot show
 * and converting nanoseconds to seconds on the time axis. */
export function buildSeries(input: ParsedCsv, label: string, xAxis: XAxis): PlotSeries {
  const x: number[] = [];
  const y: number[] = [];
  if (input.kind === "trace") {
    let dropped = 0;
    for (const row of input.rows as TraceRow[]) {
      if (!positive(row.rse)) {
        dropped++;
        continue;
      }
      x.push(xAxis === "iteration" ? row.k : row.elapsed_ns / NS_PER_SECOND);
      y.push(row.rse);
    }
    return { label, x, y, dropped };
  }
  const lo: number[] = [];
  const hi: number[] = [];
  let dropped = 0;
  for (const row of input.rows as EnsembleRow[]) {
    if (!positive(row.rse_min) || !positive(row.rse_median) || !positive(row.rse_max)) {
      dropped++;
      continue;
    }
    x.push(xAxis === "iteration" ? row.k : row.elapsed_ns_median / NS_PER_SECOND);
    y.push(row.rse_median);
    lo.push(row.rse_min);
    hi.push(row.rse_max);
  }
  return { label, x, y, band: { lo, hi }, dropped };
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return [lo, hi];
}

function decadeTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo)); Math.pow(10, e) <= hi * (1 + 1e-12); e++) {
    ticks.push(Math.pow(10, e));
  }
  return ticks;
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Render the series into a fixed-size SVG: one line per series, a shaded
 * min/max region for series carrying a band, log-scale y, and a legend.
 * Output depends only on the inputs. */
export function renderFigure(seriesList: PlotSeries[], options: FigureOptions): Figure {
  const width = options.width ?? 720;
  const height = options.height ?? 480;
  const plotted = seriesList.filter((s) => s.x.length > 0);
  if (plotted.length === 0) {
    throw new Error("nothing to plot: every row was dropped or inputs were empty");
  }

  const xs = plotted.flatMap((s) => s.x);
  const ys = plotted.flatMap((s) => s.band ? s.y.concat(s.band.lo, s.band.hi) : s.y);
  const xScale = scaleLinear()
    .domain(extent(xs))
    .range([MARGIN.left, width - MARGIN.right]);
  const [yLo, yHi] = extent(ys);
  const yScale = scaleLog()
    .domain([yLo, yHi === yLo ? yLo * 10 : yHi])
    .range([height - MARGIN.bottom, MARGIN.top]);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="12">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);

  const xTicks = xScale.ticks(8);
  let yTicks = decadeTicks(yLo, yScale.domain()[1]);
  if (yTicks.length < 2) yTicks = yScale.ticks(5);
  for (const t of yTicks) {
    const yPix = yScale(t);
    parts.push(
      `<line x1="${MARGIN.left}" x2="${width - MARGIN.right}" y1="${yPix}" y2="${yPix}" ` +
        `stroke="#dddddd"/>`,
      `<text x="${MARGIN.left - 6}" y="${yPix}" text-anchor="end" ` +
        `dominant-baseline="middle">${t.toExponential(0)}</text>`,
    );
  }
  for (const t of xTicks) {
    const xPix = xScale(t);
    parts.push(
      `<line x1="${xPix}" x2="${xPix}" y1="${height - MARGIN.bottom}" ` +
        `y2="${height - MARGIN.bottom + 4}" stroke="#333333"/>`,
      `<text x="${xPix}" y="${height - MARGIN.bottom + 18}" text-anchor="middle">${t}</text>`,
    );
  }
  parts.push(
    `<line x1="${MARGIN.left}" x2="${width - MARGIN.right}" ` +
      `y1="${height - MARGIN.bottom}" y2="${height - MARGIN.bottom}" stroke="#333333"/>`,
    `<line x1="${MARGIN.left}" x2="${MARGIN.left}" y1="${MARGIN.top}" ` +
      `y2="${height - MARGIN.bottom}" stroke="#333333"/>`,
    `<text x="${(MARGIN.left + width - MARGIN.right) / 2}" y="${height - 10}" ` +
      `text-anchor="middle">${options.xAxis === "time" ? "time (s)" : "iteration"}</text>`,
    `<text x="16" y="${(MARGIN.top + height - MARGIN.bottom) / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 16 ${(MARGIN.top + height - MARGIN.bottom) / 2})">RSE</text>`,
  );

  plotted.forEach((s, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    if (s.band) {
      const toArea = area<number>()
        .x((_, i) => xScale(s.x[i]))
        .y0((_, i) => yScale(s.band!.lo[i]))
        .y1((_, i) => yScale(s.band!.hi[i]));
      parts.push(
        `<path d="${toArea(s.band.lo)}" fill="${color}" fill-opacity="0.18" stroke="none"/>`,
      );
    }
    const toLine = line<number>()
      .x((_, i) => xScale(s.x[i]))
      .y((v) => yScale(v));
    parts.push(
      `<path d="${toLine(s.y)}" fill="none" stroke="${color}" stroke-width="1.5"/>`,
    );
  });

  plotted.forEach((s, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const yPix = MARGIN.top + 8 + 18 * idx;
    const xPix = width - MARGIN.right - 150;
    parts.push(
      `<line x1="${xPix}" x2="${xPix + 24}" y1="${yPix}" y2="${yPix}" ` +
        `stroke="${color}" stroke-width="1.5"/>`,
      `<text x="${xPix + 30}" y="${yPix}" dominant-baseline="middle">${esc(s.label)}</text>`,
    );
  });

  parts.push("</svg>");
  return { series: plotted, svg: parts.join("\n") };
}
