#!/usr/bin/env node
/**
 * Render convergence figures from solver trace CSVs.
 *
 * Usage: vrprox-plot <plotspec-file>
 *
 * The plotspec is a key=value file naming the input CSVs, the y-axis mode
 * and the output image; see spec.ts for the full key list.
 */

import { render } from "./render.js";
import { loadPlotSpec } from "./spec.js";

export function main(argv: string[]): number {
  if (argv.length !== 1) {
    console.error("usage: vrprox-plot <plotspec-file>");
    return 1;
  }
  try {
    const spec = loadPlotSpec(argv[0]);
    const result = render(spec);
    for (const s of result.series) {
      if (s.dropped > 0) {
        console.warn(`warning: dropped ${s.dropped} nonpositive rows from ${s.csv}`);
      }
    }
    console.log(`wrote ${spec.output} (${result.series.length} series)`);
    if (spec.sidecar) console.log(`wrote ${spec.sidecar}`);
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith("plot.js")) {
  process.exit(main(process.argv.slice(2)));
}
