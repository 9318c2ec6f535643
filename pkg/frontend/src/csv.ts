/**
 * Reader for the simulator's versioned results CSV.
 *
 * Expected layout:
 *   # dyntdd-results v1
 *   scheme,lambda_dl,seed,direction,mean_tput_mbps,p5,p50,p95,completed,unfinished,gain_vs_s1_pct
 *   s1,0.5,1,DL,12.345678,...
 *
 * Later comment lines (e.g. an appended error flag) are ignored; the
 * version line and column header are mandatory.
 */

import { readFileSync } from "fs";

export const SCHEMA_VERSION = "dyntdd-results v1";

export const COLUMNS = [
  "scheme", "lambda_dl", "seed", "direction", "mean_tput_mbps",
  "p5", "p50", "p95", "completed", "unfinished", "gain_vs_s1_pct",
] as const;

export interface ResultRow {
  scheme: string;
  lambda_dl: number;
  seed: number;
  direction: "DL" | "UL";
  mean_tput_mbps: number;
  p5: number;
  p50: number;
  p95: number;
  completed: number;
  unfinished: number;
  gain_vs_s1_pct: number | null;
}

export class SchemaError extends Error {}

export function parseResultsText(text: string): ResultRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("results CSV is empty");
  }
  const version = lines[0].replace(/^#\s*/, "");
  if (!lines[0].startsWith("#") || version !== SCHEMA_VERSION) {
    throw new SchemaError(
      `unrecognized results schema; expected header "# ${SCHEMA_VERSION}"`);
  }
  if (lines.length < 2 || lines[1] !== COLUMNS.join(",")) {
    throw new SchemaError("column header does not match the v1 schema");
  }
  const rows: ResultRow[] = [];
  for (const line of lines.slice(2)) {
    if (line.startsWith("#")) continue;
    const parts = line.split(",");
    if (parts.length !== COLUMNS.length) {
      throw new SchemaError(`malformed data row: ${line}`);
    }
    const direction = parts[3];
    if (direction !== "DL" && direction !== "UL") {
      throw new SchemaError(`unknown direction ${direction}`);
    }
    rows.push({
      scheme: parts[0],
      lambda_dl: Number(parts[1]),
      seed: Number(parts[2]),
      direction,
      mean_tput_mbps: Number(parts[4]),
      p5: Number(parts[5]),
      p50: Number(parts[6]),
      p95: Number(parts[7]),
      completed: Number(parts[8]),
      unfinished: Number(parts[9]),
      gain_vs_s1_pct: parts[10] === "" ? null : Number(parts[10]),
    });
  }
  if (rows.length === 0) {
    throw new SchemaError("results CSV contains no data rows");
  }
  return rows;
}

export function readResults(path: string): ResultRow[] {
  return parseResultsText(readFileSync(path, "utf8"));
}
