/**
 * SVG rendering of convergence curves: objective (or objective minus a
 * reference value, on a log axis) against effective data passes.
 *
 * Series are thinned to at most 2000 points each by uniform subsampling
 * before rendering; the sidecar data file always carries the unthinned
 * filtered rows.
 */

import { writeFileSync } from "fs";

import { PlotSpec } from "./spec.js";
import { readTrace } from "./trace.js";

export interface SeriesData {
  label: string;
  csv: string;
  passes: number[];
  values: number[]; // objective, or objective - fstar in log mode
  objectives: number[]; // original objective column for the sidecar
  dropped: number; // nonpositive suboptimality rows removed in log mode
}

export interface RenderResult {
  series: SeriesData[];
  droppedTotal: number;
  svg: string;
}

const WIDTH = 760;
const HEIGHT = 480;
const MARGIN = { left: 72, right: 24, top: 40, bottom: 48 };
const MAX_RENDER_POINTS = 2000;
const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

export function collectSeries(spec: PlotSpec): SeriesData[] {
  return spec.series.map(({ csv, label }) => {
    const rows = readTrace(csv);
    const passes: number[] = [];
    const values: number[] = [];
    const objectives: number[] = [];
    let dropped = 0;
    for (const row of rows) {
      if (spec.mode === "log-suboptimality") {
        const gap = row.objective - (spec.fstar as number);
        if (!(gap > 0)) {
          dropped += 1;
          continue;
        }
        values.push(gap);
      } else {
        values.push(row.objective);
      }
      passes.push(row.effectivePasses);
      objectives.push(row.objective);
    }
    return { label, csv, passes, values, objectives, dropped };
  });
}

function thin<T>(xs: T[]): T[] {
  if (xs.length <= MAX_RENDER_POINTS) return xs;
  const out: T[] = [];
  const step = (xs.length - 1) / (MAX_RENDER_POINTS - 1);
  for (let i = 0; i < MAX_RENDER_POINTS; i++) {
    out.push(xs[Math.round(i * step)]);
  }
  return out;
}

function niceTicks(lo: number, hi: number, count: number): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count) ?? 10 * step;
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / chosen) * chosen; t <= hi + 1e-12 * span; t += chosen) {
    ticks.push(t);
  }
  return ticks;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0);
  return String(Number(v.toPrecision(6)));
}

export function renderSvg(spec: PlotSpec, series: SeriesData[]): string {
  const log = spec.mode === "log-suboptimality";
  const drawable = series.filter((s) => s.values.length > 0);
  const allX = drawable.flatMap((s) => s.passes);
  const allY = drawable.flatMap((s) => (log ? s.values.map(Math.log10) : s.values));
  const x0 = allX.length ? Math.min(...allX) : 0;
  const x1 = allX.length ? Math.max(...allX) : 1;
  let y0 = allY.length ? Math.min(...allY) : 0;
  let y1 = allY.length ? Math.max(...allY) : 1;
  if (y0 === y1) {
    y0 -= 1;
    y1 += 1;
  }
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (x: number) => MARGIN.left + ((x - x0) / (x1 - x0 || 1)) * plotW;
  const sy = (y: number) => MARGIN.top + (1 - (y - y0) / (y1 - y0)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
  );
  if (spec.title) {
    parts.push(
      `<text x="${WIDTH / 2}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">${escapeXml(spec.title)}</text>`,
    );
  }

  // axes box
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#333"/>`,
  );

  // x ticks
  for (const t of niceTicks(x0, x1, 7)) {
    const px = sx(t);
    parts.push(
      `<line x1="${px}" y1="${MARGIN.top + plotH}" x2="${px}" y2="${MARGIN.top + plotH + 5}" stroke="#333"/>`,
      `<text x="${px}" y="${MARGIN.top + plotH + 20}" text-anchor="middle" font-family="sans-serif" font-size="11">${fmt(t)}</text>`,
    );
  }
  // y ticks: decades in log mode, linear otherwise
  const yTicks = log
    ? rangeInt(Math.ceil(y0), Math.floor(y1)).map((e) => e)
    : niceTicks(y0, y1, 6);
  for (const t of yTicks) {
    const py = sy(t);
    const label = log ? `1e${t}` : fmt(t);
    parts.push(
      `<line x1="${MARGIN.left - 5}" y1="${py}" x2="${MARGIN.left}" y2="${py}" stroke="#333"/>`,
      `<line x1="${MARGIN.left}" y1="${py}" x2="${MARGIN.left + plotW}" y2="${py}" stroke="#ddd" stroke-dasharray="2,4"/>`,
      `<text x="${MARGIN.left - 8}" y="${py + 4}" text-anchor="end" font-family="sans-serif" font-size="11">${label}</text>`,
    );
  }

  // axis labels
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 12}" text-anchor="middle" font-family="sans-serif" font-size="12">effective passes</text>`,
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${log ? "objective - reference (log)" : "objective"}</text>`,
  );

  // curves, legend entries in input order
  drawable.forEach((s, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const xs = thin(s.passes);
    const ys = thin(s.values);
    const pts = xs
      .map((x, i) => `${sx(x).toFixed(2)},${sy(log ? Math.log10(ys[i]) : ys[i]).toFixed(2)}`)
      .join(" ");
    parts.push(
      `<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.6"/>`,
    );
  });
  drawable.forEach((s, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const ly = MARGIN.top + 14 + 16 * idx;
    const lx = MARGIN.left + plotW - 170;
    parts.push(
      `<line x1="${lx}" y1="${ly - 4}" x2="${lx + 22}" y2="${ly - 4}" stroke="${color}" stroke-width="2"/>`,
      `<text x="${lx + 28}" y="${ly}" font-family="sans-serif" font-size="12">${escapeXml(s.label)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n");
}

function rangeInt(a: number, b: number): number[] {
  const out: number[] = [];
  for (let i = a; i <= b; i++) out.push(i);
  return out.length ? out : [a];
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function sidecarCsv(spec: PlotSpec, series: SeriesData[]): string {
  const lines =
    spec.mode === "log-suboptimality"
      ? ["series,effective_passes,objective,suboptimality"]
      : ["series,effective_passes,objective"];
  for (const s of series) {
    for (let i = 0; i < s.passes.length; i++) {
      if (spec.mode === "log-suboptimality") {
        lines.push(`${s.label},${s.passes[i]},${s.objectives[i]},${s.values[i]}`);
      } else {
        lines.push(`${s.label},${s.passes[i]},${s.objectives[i]}`);
      }
    }
  }
  return lines.join("\n") + "\n";
}

export function render(spec: PlotSpec): RenderResult {
  const series = collectSeries(spec);
  const svg = renderSvg(spec, series);
  writeFileSync(spec.output, svg);
  if (spec.sidecar) {
    writeFileSync(spec.sidecar, sidecarCsv(spec, series));
  }
  const droppedTotal = series.reduce((acc, s) => acc + s.dropped, 0);
  return { series, droppedTotal, svg };
}
