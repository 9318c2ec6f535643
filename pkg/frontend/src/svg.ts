/**
 * Minimal deterministic SVG line charts: no timestamps, no randomness, and
 * fixed number formatting, so identical inputs produce identical bytes.
 * Data points carry data-lambda / data-value attributes with full-precision
 * values for downstream verification.
 */

import { Series } from "./aggregate.js";

const WIDTH = 840;
const HEIGHT = 520;
const MARGIN = { left: 70, right: 170, top: 48, bottom: 56 };

const PALETTE: Record<string, string> = {
  s1: "#444444",
  s2: "#1f77b4",
  s3: "#2ca02c",
  s4: "#d62728",
  s5: "#9467bd",
};

const SCHEME_LABELS: Record<string, string> = {
  s1: "s1 static",
  s2: "s2 dynamic 200 ms",
  s3: "s3 dynamic 10 ms",
  s4: "s4 dynamic 10 ms + IC",
  s5: "s5 flexible + IC",
};

function fmt(x: number, digits = 2): string {
  return x.toFixed(digits);
}

function niceTicks(maxVal: number, n = 5): number[] {
  if (maxVal <= 0) return [0, 1];
  const raw = maxVal / n;
  const mag = 10 ** Math.floor(Math.log10(raw));
  const step = [1, 2, 2.5, 5, 10].map((m) => m * mag).find((s) => s >= raw)!;
  const ticks: number[] = [];
  for (let v = 0; v <= maxVal + 1e-9; v += step) ticks.push(v);
  return ticks;
}

export interface ChartOptions {
  title: string;
  yLabel: string;
  annotateGains: boolean;
}

export function renderChart(series: Series[], opts: ChartOptions): string {
  const lambdas = [...new Set(series.flatMap((s) => s.points.map((p) => p.lambda)))]
    .sort((a, b) => a - b);
  const xMin = Math.min(...lambdas);
  const xMax = Math.max(...lambdas);
  const yMax = Math.max(...series.flatMap((s) => s.points.map((p) => p.hi))) * 1.08;

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (x: number) =>
    MARGIN.left + (xMax === xMin ? plotW / 2 : ((x - xMin) / (xMax - xMin)) * plotW);
  const sy = (y: number) => MARGIN.top + plotH - (y / yMax) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
    `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`);
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="16">` +
    `${opts.title}</text>`);

  // axes and grid
  const axisY = MARGIN.top + plotH;
  parts.push(`<g stroke="#222" stroke-width="1">` +
    `<line x1="${MARGIN.left}" y1="${axisY}" x2="${MARGIN.left + plotW}" y2="${axisY}"/>` +
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${axisY}"/></g>`);
  for (const lam of lambdas) {
    const x = sx(lam);
    parts.push(
      `<line x1="${fmt(x)}" y1="${axisY}" x2="${fmt(x)}" y2="${axisY + 5}" stroke="#222"/>` +
      `<text x="${fmt(x)}" y="${axisY + 20}" text-anchor="middle" font-size="12">` +
      `${lam}</text>`);
  }
  for (const tick of niceTicks(yMax)) {
    const y = sy(tick);
    parts.push(
      `<line x1="${MARGIN.left - 5}" y1="${fmt(y)}" x2="${MARGIN.left}" y2="${fmt(y)}" stroke="#222"/>` +
      `<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${MARGIN.left + plotW}" y2="${fmt(y)}" ` +
      `stroke="#dddddd" stroke-width="0.5"/>` +
      `<text x="${MARGIN.left - 9}" y="${fmt(y + 4)}" text-anchor="end" font-size="12">` +
      `${fmt(tick, tick < 10 ? 1 : 0)}</text>`);
  }
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 12}" text-anchor="middle" ` +
    `font-size="13">offered DL packet arrival rate λ (packets/s per cell)</text>`);
  parts.push(
    `<text x="20" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="13" ` +
    `transform="rotate(-90 20 ${MARGIN.top + plotH / 2})">${opts.yLabel}</text>`);

  // min-max band, line and markers per scheme
  for (const s of series) {
    const color = PALETTE[s.scheme] ?? "#888888";
    if (s.points.length > 1) {
      const upper = s.points.map((p) => `${fmt(sx(p.lambda))},${fmt(sy(p.hi))}`);
      const lower = [...s.points].reverse()
        .map((p) => `${fmt(sx(p.lambda))},${fmt(sy(p.lo))}`);
      parts.push(
        `<polygon points="${upper.join(" ")} ${lower.join(" ")}" fill="${color}" ` +
        `fill-opacity="0.12" stroke="none"/>`);
    }
    const line = s.points.map((p) => `${fmt(sx(p.lambda))},${fmt(sy(p.mean))}`).join(" ");
    parts.push(
      `<polyline points="${line}" fill="none" stroke="${color}" stroke-width="2"/>`);
    for (const p of s.points) {
      parts.push(
        `<circle cx="${fmt(sx(p.lambda))}" cy="${fmt(sy(p.mean))}" r="3.5" fill="${color}" ` +
        `data-scheme="${s.scheme}" data-lambda="${p.lambda}" data-value="${p.mean}"/>`);
      if (opts.annotateGains && p.gainPct !== null) {
        const sign = p.gainPct >= 0 ? "+" : "";
        parts.push(
          `<text x="${fmt(sx(p.lambda))}" y="${fmt(sy(p.mean) - 8)}" text-anchor="middle" ` +
          `font-size="10" fill="${color}">${sign}${fmt(p.gainPct, 0)}%</text>`);
      }
    }
  }

  // legend
  let ly = MARGIN.top + 8;
  for (const s of series) {
    const color = PALETTE[s.scheme] ?? "#888888";
    const lx = MARGIN.left + plotW + 14;
    parts.push(
      `<line x1="${lx}" y1="${ly}" x2="${lx + 22}" y2="${ly}" stroke="${color}" stroke-width="2"/>` +
      `<text x="${lx + 28}" y="${ly + 4}" font-size="12">` +
      `${SCHEME_LABELS[s.scheme] ?? s.scheme}</text>`);
    ly += 20;
  }

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
