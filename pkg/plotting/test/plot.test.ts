import { mkdtempSync, readFileSync, writeFileSync, existsSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";

import { describe, expect, it } from "vitest";

import { collectSeries, render, sidecarCsv } from "../src/render.js";
import { loadPlotSpec, parseKeyValues } from "../src/spec.js";
import { CSV_HEADER, readTrace } from "../src/trace.js";

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "vrprox-plot-"));
}

/** Trace with a geometric objective decay toward fstar. */
function geometricTrace(path: string, n: number, fstar: number, ratio = 0.9): void {
  const lines = [CSV_HEADER];
  for (let k = 0; k < n; k++) {
    const obj = fstar + Math.pow(ratio, k);
    lines.push(`${k},${k * 5},${obj},,,,,0`);
  }
  writeFileSync(path, lines.join("\n") + "\n");
}

function specFile(dir: string, body: string): string {
  const p = join(dir, "plot.spec");
  writeFileSync(p, body);
  return p;
}

describe("plotspec parsing", () => {
  it("parses key=value lines with comments", () => {
    const kv = parseKeyValues("# hi\na = 1\nb = two # tail\n", "x");
    expect(kv.get("a")).toBe("1");
    expect(kv.get("b")).toBe("two");
  });

  it("rejects unknown keys and missing series", () => {
    const dir = tmp();
    expect(() => loadPlotSpec(specFile(dir, "mode = raw\noutput = o.svg\n"))).toThrow(/series/);
    const csv = join(dir, "t.csv");
    geometricTrace(csv, 5, 0.3);
    expect(() =>
      loadPlotSpec(
        specFile(dir, `series.1.csv = ${csv}\noutput = o.svg\nmode = raw\nwarp = 9\n`),
      ),
    ).toThrow(/warp/);
  });

  it("requires fstar in log mode", () => {
    const dir = tmp();
    const csv = join(dir, "t.csv");
    geometricTrace(csv, 5, 0.3);
    expect(() =>
      loadPlotSpec(specFile(dir, `series.1.csv = ${csv}\noutput = o.svg\n`)),
    ).toThrow(/fstar/);
  });

  it("takes fstar from a source CSV as the minimum objective", () => {
    const dir = tmp();
    const csv = join(dir, "t.csv");
    geometricTrace(csv, 20, 0.25);
    const spec = loadPlotSpec(
      specFile(
        dir,
        `series.1.csv = ${csv}\nfstar_csv = ${csv}\noutput = ${join(dir, "o.svg")}\n`,
      ),
    );
    const rows = readTrace(csv);
    expect(spec.fstar).toBe(Math.min(...rows.map((r) => r.objective)));
  });
});

describe("trace schema", () => {
  it("names the offending file on header mismatch", () => {
    const dir = tmp();
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "totally,wrong,header\n1,2,3\n");
    expect(() => readTrace(bad)).toThrow(/bad\.csv/);
  });

  it("round-trips rows with empty optional fields", () => {
    const dir = tmp();
    const csv = join(dir, "t.csv");
    writeFileSync(csv, `${CSV_HEADER}\n0,1.0,0.5,,,,,0\n3,2.0,0.4,0.45,1e-3,,0.2,1\n`);
    const rows = readTrace(csv);
    expect(rows).toHaveLength(2);
    expect(rows[0].objectiveAvg).toBeNull();
    expect(rows[1].gap).toBe(1e-3);
    expect(rows[1].restart).toBe(true);
  });
});

describe("rendering", () => {
  it("renders a geometric-decay trace without dropping rows", () => {
    const dir = tmp();
    const csv = join(dir, "t.csv");
    geometricTrace(csv, 60, 0.3);
    const out = join(dir, "fig.svg");
    const side = join(dir, "fig_data.csv");
    const spec = loadPlotSpec(
      specFile(
        dir,
        `series.1.csv = ${csv}\nseries.1.label = run\nfstar = 0.3\noutput = ${out}\nsidecar = ${side}\n`,
      ),
    );
    const result = render(spec);
    expect(result.droppedTotal).toBe(0);
    expect(existsSync(out)).toBe(true);
    expect(readFileSync(out, "utf8")).toContain("<svg");
  });

  it("sidecar data equals the filtered input rows exactly", () => {
    const dir = tmp();
    const csv = join(dir, "t.csv");
    const fstar = 0.4;
    // mix in rows at and below fstar that log mode must drop
    const lines = [CSV_HEADER];
    const objectives = [1.4, 1.1, 0.9, fstar, 0.39, 0.6, 0.5];
    objectives.forEach((obj, k) => lines.push(`${k},${k * 5},${obj},,,,,0`));
    writeFileSync(csv, lines.join("\n") + "\n");
    const out = join(dir, "fig.svg");
    const side = join(dir, "fig_data.csv");
    const spec = loadPlotSpec(
      specFile(
        dir,
        `series.1.csv = ${csv}\nseries.1.label = run\nfstar = ${fstar}\noutput = ${out}\nsidecar = ${side}\n`,
      ),
    );
    const result = render(spec);
    expect(result.droppedTotal).toBe(2);

    const sidecarLines = readFileSync(side, "utf8").trim().split("\n");
    expect(sidecarLines[0]).toBe("series,effective_passes,objective,suboptimality");
    const kept = readTrace(csv).filter((r) => r.objective - fstar > 0);
    expect(sidecarLines.length - 1).toBe(kept.length);
    kept.forEach((row, i) => {
      const [label, passes, objective, gap] = sidecarLines[i + 1].split(",");
      expect(label).toBe("run");
      expect(Number(passes)).toBe(row.effectivePasses);
      expect(Number(objective)).toBe(row.objective);
      expect(Number(gap)).toBe(row.objective - fstar);
    });
  });

  it("raw mode needs no fstar and keeps every row", () => {
    const dir = tmp();
    const csv = join(dir, "t.csv");
    geometricTrace(csv, 30, 0.0);
    const out = join(dir, "fig.svg");
    const spec = loadPlotSpec(
      specFile(dir, `series.1.csv = ${csv}\nmode = raw\noutput = ${out}\n`),
    );
    const result = render(spec);
    expect(result.droppedTotal).toBe(0);
    expect(result.series[0].passes.length).toBe(30);
  });

  it("keeps legend entries in input order", () => {
    const dir = tmp();
    const a = join(dir, "a.csv");
    const b = join(dir, "b.csv");
    geometricTrace(a, 10, 0.3);
    geometricTrace(b, 10, 0.3, 0.8);
    const out = join(dir, "fig.svg");
    const spec = loadPlotSpec(
      specFile(
        dir,
        `series.1.csv = ${a}\nseries.1.label = first\nseries.2.csv = ${b}\nseries.2.label = second\nfstar = 0.3\noutput = ${out}\n`,
      ),
    );
    const { svg } = render(spec);
    expect(svg.indexOf(">first<")).toBeGreaterThan(-1);
    expect(svg.indexOf(">first<")).toBeLessThan(svg.indexOf(">second<"));
  });

  it("thins long series for rendering but not in the sidecar", () => {
    const dir = tmp();
    const csv = join(dir, "t.csv");
    geometricTrace(csv, 5000, 0.2, 0.999);
    const out = join(dir, "fig.svg");
    const side = join(dir, "side.csv");
    const spec = loadPlotSpec(
      specFile(
        dir,
        `series.1.csv = ${csv}\nfstar = 0.2\noutput = ${out}\nsidecar = ${side}\n`,
      ),
    );
    const { svg, series } = render(spec);
    const points = svg.match(/<polyline points="([^"]*)"/)![1].split(" ");
    expect(points.length).toBeLessThanOrEqual(2000);
    expect(series[0].passes.length).toBe(5000);
    const sidecarRows = readFileSync(side, "utf8").trim().split("\n").length - 1;
    expect(sidecarRows).toBe(5000);
  });

  it("sidecar text is reproducible", () => {
    const dir = tmp();
    const csv = join(dir, "t.csv");
    geometricTrace(csv, 40, 0.31);
    const spec = loadPlotSpec(
      specFile(
        dir,
        `series.1.csv = ${csv}\nfstar = 0.31\noutput = ${join(dir, "o.svg")}\n`,
      ),
    );
    const s1 = sidecarCsv(spec, collectSeries(spec));
    const s2 = sidecarCsv(spec, collectSeries(spec));
    expect(s1).toBe(s2);
  });
});
