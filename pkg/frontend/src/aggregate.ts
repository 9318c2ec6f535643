/**
 * Seed aggregation for plotting: arithmetic mean of the per-seed means plus
 * a min/max band, and relative gains against the s1 baseline computed from
 * those seed means.  No smoothing anywhere: plotted values are exactly the
 * averages of the CSV rows.
 */

import { ResultRow } from "./csv.js";

export interface SeriesPoint {
  lambda: number;
  mean: number;     // seed-averaged mean throughput, Mbps
  lo: number;       // min across seeds
  hi: number;       // max across seeds
  gainPct: number | null;  // vs s1 at the same lambda, null for s1 itself
}

export interface Series {
  scheme: string;
  points: SeriesPoint[];
}

const BASELINE = "s1";

function mean(xs: number[]): number {
  let s = 0;
  for (const x of xs) s += x;
  return s / xs.length;
}

export function buildSeries(rows: ResultRow[], direction: "DL" | "UL"): Series[] {
  const byScheme = new Map<string, Map<number, number[]>>();
  for (const r of rows) {
    if (r.direction !== direction) continue;
    let perLambda = byScheme.get(r.scheme);
    if (!perLambda) byScheme.set(r.scheme, (perLambda = new Map()));
    let vals = perLambda.get(r.lambda_dl);
    if (!vals) perLambda.set(r.lambda_dl, (vals = []));
    vals.push(r.mean_tput_mbps);
  }

  const baseline = new Map<number, number>();
  const basePerLambda = byScheme.get(BASELINE);
  if (basePerLambda) {
    for (const [lam, vals] of basePerLambda) baseline.set(lam, mean(vals));
  }

  const schemes = [...byScheme.keys()].sort();
  return schemes.map((scheme) => {
    const perLambda = byScheme.get(scheme)!;
    const lambdas = [...perLambda.keys()].sort((a, b) => a - b);
    const points = lambdas.map((lambda) => {
      const vals = perLambda.get(lambda)!;
      const m = mean(vals);
      const base = baseline.get(lambda);
      const gainPct =
        scheme === BASELINE || base === undefined || base === 0
          ? null
          : (m / base - 1) * 100;
      return {
        lambda,
        mean: m,
        lo: Math.min(...vals),
        hi: Math.max(...vals),
        gainPct,
      };
    });
    return { scheme, points };
  });
}
