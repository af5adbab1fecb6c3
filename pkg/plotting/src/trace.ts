/**
 * Reader for solver trace CSVs.
 *
 * The schema is fixed: a header row
 * `k,effective_passes,objective,objective_avg,gap,variance,seconds,restart`
 * followed by one row per record; optional fields are empty strings.
 */

import { readFileSync } from "fs";

export const CSV_HEADER =
  "k,effective_passes,objective,objective_avg,gap,variance,seconds,restart";

export interface TraceRow {
  k: number;
  effectivePasses: number;
  objective: number;
  objectiveAvg: number | null;
  gap: number | null;
  variance: number | null;
  seconds: number | null;
  restart: boolean;
}

function opt(field: string): number | null {
  return field === "" ? null : Number(field);
}

export function readTrace(path: string): TraceRow[] {
  const text = readFileSync(path, "utf8");
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0 || lines[0] !== CSV_HEADER) {
    throw new Error(`trace schema mismatch in ${path}: bad header ${JSON.stringify(lines[0] ?? "")}`);
  }
  const rows: TraceRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== 8) {
      throw new Error(`trace schema mismatch in ${path}: row ${i + 1} has ${parts.length} fields`);
    }
    const row: TraceRow = {
      k: Number(parts[0]),
      effectivePasses: Number(parts[1]),
      objective: Number(parts[2]),
      objectiveAvg: opt(parts[3]),
      gap: opt(parts[4]),
      variance: opt(parts[5]),
      seconds: opt(parts[6]),
      restart: parts[7] === "1",
    };
    if (!Number.isFinite(row.k) || !Number.isFinite(row.effectivePasses) || Number.isNaN(row.objective)) {
      throw new Error(`trace schema mismatch in ${path}: unparsable row ${i + 1}`);
    }
    rows.push(row);
  }
  return rows;
}
