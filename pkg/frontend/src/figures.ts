import { ResultRow, median, seriesKey } from "./schema";

export type FigureKind = "speed" | "accuracy" | "violation";

export const FIGURE_KINDS: FigureKind[] = ["speed", "accuracy", "violation"];

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { top: 36, right: 160, bottom: 56, left: 76 };
const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;

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

function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Fixed-format coordinate so output bytes do not depend on float printing
 *  quirks across runs. */
function px(v: number): string {
  return v.toFixed(2);
}

interface LogScale {
  (v: number): number;
  min: number;
  max: number;
}

function logScale(values: number[], rangeLo: number, rangeHi: number): LogScale {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  // pad to the surrounding powers of ten so every point sits inside the axes
  lo = Math.pow(10, Math.floor(Math.log10(lo)));
  hi = Math.pow(10, Math.ceil(Math.log10(hi)));
  if (lo === hi) {
    lo /= 10;
    hi *= 10;
  }
  const f = (v: number) =>
    rangeLo +
    ((Math.log10(v) - Math.log10(lo)) / (Math.log10(hi) - Math.log10(lo))) *
      (rangeHi - rangeLo);
  return Object.assign(f, { min: lo, max: hi });
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  const e0 = Math.round(Math.log10(lo));
  const e1 = Math.round(Math.log10(hi));
  const step = Math.max(1, Math.ceil((e1 - e0) / 8));
  for (let e = e0; e <= e1; e += step) ticks.push(Math.pow(10, e));
  return ticks;
}

function tickLabel(v: number): string {
  const e = Math.round(Math.log10(v));
  return `1e${e}`;
}

function frame(title: string, xLabel: string, yLabel: string): string[] {
  return [
    `<rect x="0" y="0" width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`,
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${PLOT_W}" height="${PLOT_H}" fill="none" stroke="#333333"/>`,
    `<text x="${px(MARGIN.left + PLOT_W / 2)}" y="20" text-anchor="middle" font-size="15" font-family="sans-serif">${esc(title)}</text>`,
    `<text x="${px(MARGIN.left + PLOT_W / 2)}" y="${HEIGHT - 12}" text-anchor="middle" font-size="12" font-family="sans-serif">${esc(xLabel)}</text>`,
    `<text x="16" y="${px(MARGIN.top + PLOT_H / 2)}" text-anchor="middle" font-size="12" font-family="sans-serif" transform="rotate(-90 16 ${px(MARGIN.top + PLOT_H / 2)})">${esc(yLabel)}</text>`,
  ];
}

function yTickLines(scale: LogScale): string[] {
  const out: string[] = [];
  for (const t of logTicks(scale.min, scale.max)) {
    const y = scale(t);
    out.push(
      `<line x1="${MARGIN.left}" y1="${px(y)}" x2="${MARGIN.left + PLOT_W}" y2="${px(y)}" stroke="#dddddd"/>`,
      `<text x="${MARGIN.left - 6}" y="${px(y + 4)}" text-anchor="end" font-size="11" font-family="sans-serif">${tickLabel(t)}</text>`
    );
  }
  return out;
}

function legend(names: string[]): string[] {
  const out: string[] = [];
  names.forEach((name, i) => {
    const y = MARGIN.top + 10 + 18 * i;
    const x = MARGIN.left + PLOT_W + 12;
    out.push(
      `<rect x="${x}" y="${px(y - 8)}" width="12" height="12" fill="${PALETTE[i % PALETTE.length]}"/>`,
      `<text x="${x + 18}" y="${px(y + 2)}" font-size="11" font-family="sans-serif">${esc(name)}</text>`
    );
  });
  return out;
}

function groupBySeries(rows: ResultRow[]): Map<string, ResultRow[]> {
  const groups = new Map<string, ResultRow[]>();
  for (const row of rows) {
    const key = seriesKey(row);
    const bucket = groups.get(key);
    if (bucket) bucket.push(row);
    else groups.set(key, [row]);
  }
  return new Map([...groups.entries()].sort((a, b) => a[0].localeCompare(b[0])));
}

/** Median wall-clock time against problem size, one log-log line per
 *  (experiment, p) series. */
function speedFigure(rows: ResultRow[]): string[] {
  const groups = groupBySeries(rows);
  const body = frame("median wall time vs problem size", "n", "wall time (ms)");

  const allN = rows.map((r) => r.n);
  const medians = new Map<string, [number, number][]>();
  for (const [key, bucket] of groups) {
    const byN = new Map<number, number[]>();
    for (const r of bucket) {
      const times = byN.get(r.n);
      if (times) times.push(r.wall_ms);
      else byN.set(r.n, [r.wall_ms]);
    }
    const pts: [number, number][] = [...byN.entries()]
      .sort((a, b) => a[0] - b[0])
      .map(([n, times]) => [n, Math.max(median(times), 1e-3)]);
    medians.set(key, pts);
  }
  const allT = [...medians.values()].flat().map(([, t]) => t);

  const sx = logScale(allN, MARGIN.left, MARGIN.left + PLOT_W);
  const sy = logScale(allT, MARGIN.top + PLOT_H, MARGIN.top);
  body.push(...yTickLines(sy));
  for (const t of logTicks(sx.min, sx.max)) {
    body.push(
      `<text x="${px(sx(t))}" y="${MARGIN.top + PLOT_H + 18}" text-anchor="middle" font-size="11" font-family="sans-serif">${tickLabel(t)}</text>`
    );
  }

  let i = 0;
  for (const [key, pts] of medians) {
    const color = PALETTE[i % PALETTE.length];
    const path = pts
      .map(([n, t], j) => `${j === 0 ? "M" : "L"}${px(sx(n))},${px(sy(t))}`)
      .join(" ");
    body.push(`<path d="${path}" fill="none" stroke="${color}" stroke-width="1.5"/>`);
    for (const [n, t] of pts) {
      body.push(`<circle cx="${px(sx(n))}" cy="${px(sy(t))}" r="3" fill="${color}"/>`);
    }
    i += 1;
  }
  body.push(...legend([...medians.keys()]));
  return body;
}

/** Per-trial forward errors as a strip plot on a log axis, one column per
 *  (experiment, p) series.  The y-axis always covers the smallest error in
 *  the data, however tiny. */
function accuracyFigure(rows: ResultRow[]): string[] {
  const withError = rows.filter((r) => r.forward_error !== null);
  if (withError.length === 0) {
    throw new Error("accuracy figure needs rows with a forward_error value");
  }
  const groups = groupBySeries(withError);
  const body = frame("forward error per trial", "series", "forward error");

  // zero errors would fall off a log axis; clamp them just below the data
  const positive = withError
    .map((r) => r.forward_error as number)
    .filter((e) => e > 0);
  const floor = positive.length > 0 ? Math.min(...positive) / 10 : 1e-17;
  const errs = withError.map((r) => Math.max(r.forward_error as number, floor));

  const sy = logScale(errs, MARGIN.top + PLOT_H, MARGIN.top);
  body.push(...yTickLines(sy));

  const keys = [...groups.keys()];
  const step = PLOT_W / keys.length;
  keys.forEach((key, i) => {
    const xc = MARGIN.left + step * (i + 0.5);
    const color = PALETTE[i % PALETTE.length];
    const bucket = groups.get(key) as ResultRow[];
    bucket.forEach((r, j) => {
      // deterministic horizontal spread instead of random jitter
      const off = bucket.length === 1 ? 0 : ((j / (bucket.length - 1)) - 0.5) * step * 0.5;
      const e = Math.max(r.forward_error as number, floor);
      body.push(
        `<circle cx="${px(xc + off)}" cy="${px(sy(e))}" r="2.5" fill="${color}" fill-opacity="0.7"/>`
      );
    });
    body.push(
      `<text x="${px(xc)}" y="${MARGIN.top + PLOT_H + 18}" text-anchor="middle" font-size="10" font-family="sans-serif">${esc(key)}</text>`
    );
  });
  body.push(...legend(keys));
  return body;
}

/** Worst feasibility violation per (series, n) as grouped bars on a linear
 *  axis.  An all-zero file still renders: the bars just have zero height. */
function violationFigure(rows: ResultRow[]): string[] {
  const groups = groupBySeries(rows);
  const body = frame("worst feasibility violation vs problem size", "n", "violation");

  const ns = [...new Set(rows.map((r) => r.n))].sort((a, b) => a - b);
  const keys = [...groups.keys()];
  const worst = new Map<string, Map<number, number>>();
  for (const [key, bucket] of groups) {
    const byN = new Map<number, number>();
    for (const r of bucket) {
      const v = Math.max(r.feasibility_violation, 0);
      byN.set(r.n, Math.max(byN.get(r.n) ?? 0, v));
    }
    worst.set(key, byN);
  }
  const peak = Math.max(...[...worst.values()].flatMap((m) => [...m.values()]));
  const yMax = peak > 0 ? peak * 1.1 : 1;
  const y0 = MARGIN.top + PLOT_H;
  const sy = (v: number) => y0 - (v / yMax) * PLOT_H;

  body.push(
    `<text x="${MARGIN.left - 6}" y="${px(y0 + 4)}" text-anchor="end" font-size="11" font-family="sans-serif">0</text>`,
    `<text x="${MARGIN.left - 6}" y="${px(sy(yMax) + 4)}" text-anchor="end" font-size="11" font-family="sans-serif">${yMax.toExponential(1)}</text>`
  );

  const groupW = PLOT_W / ns.length;
  const barW = (groupW * 0.7) / keys.length;
  ns.forEach((n, gi) => {
    const gx = MARGIN.left + groupW * gi + groupW * 0.15;
    keys.forEach((key, ki) => {
      if (!worst.get(key)?.has(n)) return;
      const v = worst.get(key)?.get(n) ?? 0;
      const h = y0 - sy(v);
      body.push(
        `<rect x="${px(gx + barW * ki)}" y="${px(sy(v))}" width="${px(barW)}" height="${px(h)}" fill="${PALETTE[ki % PALETTE.length]}" stroke="#333333" stroke-width="0.5"/>`
      );
    });
    body.push(
      `<text x="${px(gx + (barW * keys.length) / 2)}" y="${y0 + 18}" text-anchor="middle" font-size="11" font-family="sans-serif">${n}</text>`
    );
  });
  body.push(...legend(keys));
  return body;
}

/** Render one figure kind from validated result rows as a standalone SVG
 *  document.  Output is byte-for-byte deterministic for the same input. */
export function renderFigure(rows: ResultRow[], kind: FigureKind): string {
  let body: string[];
  if (kind === "speed") body = speedFigure(rows);
  else if (kind === "accuracy") body = accuracyFigure(rows);
  else if (kind === "violation") body = violationFigure(rows);
  else throw new Error(`unknown figure kind: ${kind}`);
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    ...body,
    "</svg>",
    "",
  ].join("\n");
}
