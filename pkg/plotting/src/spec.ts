/**
 * Plot specification files: flat key=value lines with # comments.
 *
 *   series.1.csv   = runs/svrg_const_mean.csv
 *   series.1.label = rand-SVRG
 *   series.2.csv   = runs/acc_svrg_const_mean.csv
 *   series.2.label = acc-SVRG
 *   mode           = log-suboptimality   # or: raw
 *   fstar          = 0.317189            # or: fstar_csv = <trace.csv>
 *   output         = figure.svg
 *   sidecar        = figure_data.csv     # optional
 *   title          = my experiment       # optional
 */

import { readFileSync } from "fs";

import { readTrace } from "./trace.js";

export interface SeriesSpec {
  csv: string;
  label: string;
}

export interface PlotSpec {
  series: SeriesSpec[];
  mode: "log-suboptimality" | "raw";
  fstar: number | null;
  output: string;
  sidecar: string | null;
  title: string;
}

export function parseKeyValues(text: string, origin: string): Map<string, string> {
  const out = new Map<string, string>();
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const stripped = lines[i].split("#", 1)[0].trim();
    if (stripped === "") continue;
    const eq = stripped.indexOf("=");
    if (eq < 1) {
      throw new Error(`${origin}:${i + 1}: expected key=value`);
    }
    const key = stripped.slice(0, eq).trim();
    const value = stripped.slice(eq + 1).trim();
    if (out.has(key)) {
      throw new Error(`${origin}:${i + 1}: duplicate key ${key}`);
    }
    out.set(key, value);
  }
  return out;
}

export function loadPlotSpec(path: string): PlotSpec {
  const kv = parseKeyValues(readFileSync(path, "utf8"), path);

  const series: SeriesSpec[] = [];
  for (let i = 1; ; i++) {
    const csv = kv.get(`series.${i}.csv`);
    if (csv === undefined) break;
    const label = kv.get(`series.${i}.label`) ?? csv;
    series.push({ csv, label });
    kv.delete(`series.${i}.csv`);
    kv.delete(`series.${i}.label`);
  }
  if (series.length === 0) {
    throw new Error(`${path}: no series.N.csv entries`);
  }

  const mode = (kv.get("mode") ?? "log-suboptimality") as PlotSpec["mode"];
  if (mode !== "log-suboptimality" && mode !== "raw") {
    throw new Error(`${path}: unknown mode ${mode}`);
  }

  let fstar: number | null = null;
  if (kv.has("fstar")) {
    fstar = Number(kv.get("fstar"));
    if (!Number.isFinite(fstar)) throw new Error(`${path}: fstar is not a number`);
  } else if (kv.has("fstar_csv")) {
    const rows = readTrace(kv.get("fstar_csv")!);
    fstar = Math.min(...rows.map((r) => r.objective));
  }
  if (mode === "log-suboptimality" && fstar === null) {
    throw new Error(`${path}: log-suboptimality mode needs fstar or fstar_csv`);
  }

  const output = kv.get("output");
  if (!output) throw new Error(`${path}: missing output`);

  const spec: PlotSpec = {
    series,
    mode,
    fstar,
    output,
    sidecar: kv.get("sidecar") ?? null,
    title: kv.get("title") ?? "",
  };

  for (const key of ["mode", "fstar", "fstar_csv", "output", "sidecar", "title"]) kv.delete(key);
  if (kv.size > 0) {
    throw new Error(`${path}: unknown keys: ${[...kv.keys()].join(", ")}`);
  }
  return spec;
}
