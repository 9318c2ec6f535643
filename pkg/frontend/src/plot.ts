/**
 * Standalone figure renderer for scheme-comparison campaigns.
 *
 * Usage:
 *   dyntdd-plot --input results.csv --out figs/ [--format svg]
 *               [--directions DL,UL] [--no-gains]
 *
 * One figure per direction: mean packet throughput vs offered load, one
 * series per scheme, seed min/max band, gain labels against the static
 * baseline.  Output is deterministic: re-rendering the same CSV writes
 * byte-identical files.
 */

import { mkdirSync, writeFileSync } from "fs";
import { join } from "path";

import { buildSeries } from "./aggregate.js";
import { readResults, SchemaError } from "./csv.js";
import { renderChart } from "./svg.js";

export interface PlotSpec {
  inputCsv: string;
  outputDir: string;
  directions: ("DL" | "UL")[];
  figureFormat: "svg" | "png" | "pdf";
  annotateGains: boolean;
}

export function render(spec: PlotSpec): string[] {
  if (spec.figureFormat !== "svg") {
    // raster/pdf back ends would pull in heavyweight dependencies; the
    // deterministic target format is SVG
    throw new Error(`figure format ${spec.figureFormat} is not supported; use svg`);
  }
  const rows = readResults(spec.inputCsv);
  mkdirSync(spec.outputDir, { recursive: true });
  const written: string[] = [];
  for (const direction of spec.directions) {
    const series = buildSeries(rows, direction);
    if (series.length === 0) {
      throw new SchemaError(`no rows for direction ${direction}`);
    }
    const svg = renderChart(series, {
      title: `Mean packet throughput, ${direction}`,
      yLabel: `mean packet throughput (Mbps, ${direction})`,
      annotateGains: spec.annotateGains,
    });
    const path = join(spec.outputDir, `throughput_${direction.toLowerCase()}.svg`);
    writeFileSync(path, svg);
    written.push(path);
  }
  return written;
}

export function parseArgs(argv: string[]): PlotSpec {
  const spec: PlotSpec = {
    inputCsv: "",
    outputDir: "figs",
    directions: ["DL", "UL"],
    figureFormat: "svg",
    annotateGains: true,
  };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      if (i + 1 >= argv.length) throw new Error(`missing value for ${arg}`);
      return argv[++i];
    };
    switch (arg) {
      case "--input": spec.inputCsv = next(); break;
      case "--out": spec.outputDir = next(); break;
      case "--format": spec.figureFormat = next() as PlotSpec["figureFormat"]; break;
      case "--directions":
        spec.directions = next().split(",").map((d) => {
          if (d !== "DL" && d !== "UL") throw new Error(`unknown direction ${d}`);
          return d;
        });
        break;
      case "--no-gains": spec.annotateGains = false; break;
      default:
        throw new Error(`unknown argument ${arg}`);
    }
  }
  if (!spec.inputCsv) throw new Error("--input is required");
  return spec;
}

const invokedDirectly = process.argv[1] !== undefined
  && import.meta.url.endsWith(process.argv[1].split("/").pop()!);

if (invokedDirectly) {
  try {
    const spec = parseArgs(process.argv.slice(2));
    for (const f of render(spec)) console.log(`wrote ${f}`);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    process.exit(1);
  }
}
