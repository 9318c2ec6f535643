import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { buildSeries } from "../src/aggregate.js";
import { COLUMNS, parseResultsText, SCHEMA_VERSION, SchemaError } from "../src/csv.js";
import { render } from "../src/plot.js";

function makeCsv(opts?: { schemes?: string[]; lambdas?: number[]; seeds?: number[] }) {
  const schemes = opts?.schemes ?? ["s1", "s3", "s4"];
  const lambdas = opts?.lambdas ?? [0.5, 2.5];
  const seeds = opts?.seeds ?? [1, 2];
  const lines = [`# ${SCHEMA_VERSION}`, COLUMNS.join(",")];
  for (const scheme of schemes) {
    for (const lam of lambdas) {
      for (const seed of seeds) {
        for (const dir of ["DL", "UL"]) {
          // deterministic synthetic values, distinct per key
          const v = 10 + schemes.indexOf(scheme) * 3 + lam + seed * 0.25
            + (dir === "UL" ? 0.5 : 0);
          lines.push([scheme, lam, seed, dir, v.toFixed(6), "1", "2", "3",
            "10", "0", scheme === "s1" ? "0.000000" : "5.0"].join(","));
        }
      }
    }
  }
  return lines.join("\n") + "\n";
}

function writeTmpCsv(text: string): string {
  const dir = mkdtempSync(join(tmpdir(), "dyntdd-plot-"));
  const path = join(dir, "results.csv");
  writeFileSync(path, text);
  return path;
}

describe("csv parsing", () => {
  it("round-trips rows", () => {
    const rows = parseResultsText(makeCsv());
    expect(rows.length).toBe(3 * 2 * 2 * 2);
    expect(rows[0].scheme).toBe("s1");
    expect(rows[0].mean_tput_mbps).toBeCloseTo(10 + 0.5 + 0.25, 10);
  });

  it("rejects unknown schema versions by name", () => {
    const bad = makeCsv().replace(SCHEMA_VERSION, "dyntdd-results v999");
    expect(() => parseResultsText(bad)).toThrowError(SCHEMA_VERSION);
  });

  it("rejects empty input and missing data", () => {
    expect(() => parseResultsText("")).toThrow(SchemaError);
    expect(() => parseResultsText(`# ${SCHEMA_VERSION}\n${COLUMNS.join(",")}\n`))
      .toThrow(/no data rows/);
  });

  it("ignores trailing comment rows", () => {
    const rows = parseResultsText(makeCsv() + "# error: run failed\n");
    expect(rows.length).toBe(24);
  });
});

describe("seed aggregation", () => {
  it("series values are exactly the seed means", () => {
    const rows = parseResultsText(makeCsv());
    const series = buildSeries(rows, "DL");
    for (const s of series) {
      for (const p of s.points) {
        const vals = rows
          .filter((r) => r.scheme === s.scheme && r.direction === "DL"
            && r.lambda_dl === p.lambda)
          .map((r) => r.mean_tput_mbps);
        const mean = vals.reduce((a, b) => a + b, 0) / vals.length;
        expect(p.mean).toBe(mean);           // exact, no smoothing
        expect(p.lo).toBe(Math.min(...vals));
        expect(p.hi).toBe(Math.max(...vals));
      }
    }
  });

  it("gains are relative to the s1 seed mean and null for s1", () => {
    const rows = parseResultsText(makeCsv());
    const series = buildSeries(rows, "UL");
    const s1 = series.find((s) => s.scheme === "s1")!;
    const s3 = series.find((s) => s.scheme === "s3")!;
    expect(s1.points.every((p) => p.gainPct === null)).toBe(true);
    for (let i = 0; i < s3.points.length; i++) {
      const want = (s3.points[i].mean / s1.points[i].mean - 1) * 100;
      expect(s3.points[i].gainPct).toBe(want);
    }
  });
});

describe("render", () => {
  const spec = (csvPath: string, outDir: string, extra?: object) => ({
    inputCsv: csvPath,
    outputDir: outDir,
    directions: ["DL", "UL"] as ("DL" | "UL")[],
    figureFormat: "svg" as const,
    annotateGains: true,
    ...extra,
  });

  it("writes one figure per direction with one series per scheme", () => {
    const csv = writeTmpCsv(makeCsv());
    const out = mkdtempSync(join(tmpdir(), "figs-"));
    const files = render(spec(csv, out));
    expect(files.length).toBe(2);
    const svg = readFileSync(files[0], "utf8");
    const polylines = svg.match(/<polyline /g) ?? [];
    expect(polylines.length).toBe(3);       // s1, s3, s4
    expect(svg).toContain("data-scheme=\"s4\"");
    expect(svg).toMatch(/\+5%|\+[0-9]+%/);  // gain annotations present
  });

  it("embedded point values equal the seed means exactly", () => {
    const csv = writeTmpCsv(makeCsv());
    const out = mkdtempSync(join(tmpdir(), "figs-"));
    const [dlFile] = render(spec(csv, out));
    const svg = readFileSync(dlFile, "utf8");
    const rows = parseResultsText(makeCsv());
    const series = buildSeries(rows, "DL");
    for (const s of series) {
      for (const p of s.points) {
        const marker = new RegExp(
          `data-scheme="${s.scheme}" data-lambda="${p.lambda}" data-value="([^"]+)"`);
        const m = svg.match(marker);
        expect(m, `marker for ${s.scheme}@${p.lambda}`).toBeTruthy();
        expect(Number(m![1])).toBe(p.mean);
      }
    }
  });

  it("is byte-identical across repeated renders", () => {
    const csv = writeTmpCsv(makeCsv());
    const out1 = mkdtempSync(join(tmpdir(), "figs-"));
    const out2 = mkdtempSync(join(tmpdir(), "figs-"));
    const a = render(spec(csv, out1)).map((f) => readFileSync(f));
    const b = render(spec(csv, out2)).map((f) => readFileSync(f));
    expect(a.length).toBe(b.length);
    for (let i = 0; i < a.length; i++) {
      expect(a[i].equals(b[i])).toBe(true);
    }
  });

  it("single-scheme CSV renders without annotations", () => {
    const csv = writeTmpCsv(makeCsv({ schemes: ["s1"] }));
    const out = mkdtempSync(join(tmpdir(), "figs-"));
    const files = render(spec(csv, out));
    const svg = readFileSync(files[0], "utf8");
    expect((svg.match(/<polyline /g) ?? []).length).toBe(1);
    expect(svg).not.toMatch(/%</);
  });

  it("rejects unsupported formats and missing directions", () => {
    const csv = writeTmpCsv(makeCsv());
    const out = mkdtempSync(join(tmpdir(), "figs-"));
    expect(() => render(spec(csv, out, { figureFormat: "png" })))
      .toThrow(/not supported/);
  });
});
