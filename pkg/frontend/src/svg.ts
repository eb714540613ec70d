/** Hand-rolled SVG line plots. Output depends only on the parsed table,
 * so rendering the same CSV twice gives identical bytes.
 */
import { CsvError, Table } from "./csv.js";
import { FigureSpec, orderedMetrics } from "./figures.js";

const W = 760;
const H = 480;
const X0 = 70;
const X1 = 740;
const Y0 = 40;
const Y1 = 360;

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

interface Pt {
  x: number;
  y: number;
}

interface Series {
  metric: string;
  pts: Pt[];
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function fmtNum(v: number): string {
  if (v === 0) return "0";
  return String(Number(v.toPrecision(10)));
}

function niceStep(span: number, target: number): number {
  const raw = span / target;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * mag * (1 + 1e-12)) return m * mag;
  }
  return 10 * mag;
}

function linTicks(lo: number, hi: number, target = 5): number[] {
  const step = niceStep(hi - lo, target);
  const first = Math.ceil(lo / step - 1e-9) * step;
  const ticks: number[] = [];
  for (let i = 0; ; i++) {
    const t = Number((first + i * step).toPrecision(12));
    if (t > hi + 1e-9 * step) break;
    ticks.push(t);
  }
  return ticks;
}

function decadeTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.round(Math.log10(lo)); e <= Math.round(Math.log10(hi)); e++) {
    ticks.push(Math.pow(10, e));
  }
  return ticks;
}

/** [0, nice ceiling above hi]; plots that start at zero read honestly */
function zeroDomain(hi: number): [number, number] {
  if (hi <= 0) return [0, 1];
  const step = niceStep(hi, 5);
  return [0, Math.ceil(hi / step - 1e-9) * step];
}

function collectSeries(spec: FigureSpec, table: Table): Series[] {
  const exps = [...new Set(table.rows.map((r) => r.experiment))];
  if (!exps.includes(spec.id)) {
    throw new CsvError(
      `csv holds experiment '${exps.join(",")}', figure ${spec.id} needs '${spec.id}'`,
    );
  }
  const byMetric = new Map<string, Pt[]>();
  for (const r of table.rows) {
    if (r.experiment !== spec.id || !spec.selects(r.metric)) continue;
    const pt =
      spec.orientation === "cdf"
        ? { x: r.value, y: r.sweepValue }
        : { x: r.sweepValue, y: r.value };
    let pts = byMetric.get(r.metric);
    if (!pts) byMetric.set(r.metric, (pts = []));
    pts.push(pt);
  }
  const series: Series[] = [];
  for (const metric of orderedMetrics(spec, new Set(byMetric.keys()))) {
    let pts = byMetric.get(metric)!;
    if (spec.logY) pts = pts.filter((p) => p.y > 0);
    if (pts.length === 0) continue; // nothing drawable on this scale
    pts = [...pts].sort((a, b) => a.x - b.x || a.y - b.y);
    series.push({ metric, pts });
  }
  if (series.length === 0) {
    throw new CsvError(`no plottable series for ${spec.id}`);
  }
  return series;
}

export function renderFigure(spec: FigureSpec, table: Table): string {
  const series = collectSeries(spec, table);
  const xs = series.flatMap((s) => s.pts.map((p) => p.x));
  const ys = series.flatMap((s) => s.pts.map((p) => p.y));

  let xLo: number;
  let xHi: number;
  let xTicks: number[];
  if (spec.orientation === "cdf") {
    [xLo, xHi] = zeroDomain(Math.max(...xs));
    xTicks = linTicks(xLo, xHi);
  } else {
    xLo = Math.min(...xs);
    xHi = Math.max(...xs);
    if (xHi === xLo) {
      xLo -= 1;
      xHi += 1;
    }
    xTicks = linTicks(xLo, xHi);
  }

  let yLo: number;
  let yHi: number;
  let yTicks: number[];
  if (spec.logY) {
    yLo = Math.pow(10, Math.floor(Math.log10(Math.min(...ys))));
    yHi = Math.pow(10, Math.ceil(Math.log10(Math.max(...ys))));
    if (yHi <= yLo) yHi = yLo * 10;
    yTicks = decadeTicks(yLo, yHi);
  } else if (spec.orientation === "cdf") {
    yLo = 0;
    yHi = 100;
    yTicks = [0, 25, 50, 75, 100];
  } else {
    [yLo, yHi] = zeroDomain(Math.max(...ys));
    yTicks = linTicks(yLo, yHi);
  }

  const sx = (v: number) => X0 + ((v - xLo) / (xHi - xLo)) * (X1 - X0);
  const sy = spec.logY
    ? (v: number) =>
        Y1 - ((Math.log10(v) - Math.log10(yLo)) / (Math.log10(yHi) - Math.log10(yLo))) * (Y1 - Y0)
    : (v: number) => Y1 - ((v - yLo) / (yHi - yLo)) * (Y1 - Y0);

  const out: string[] = [];
  out.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">`,
  );
  out.push(`<rect width="${W}" height="${H}" fill="#ffffff"/>`);
  out.push(
    `<text x="${(X0 + X1) / 2}" y="24" text-anchor="middle" font-family="Helvetica, Arial, sans-serif" font-size="16">${esc(spec.title)}</text>`,
  );

  for (const t of yTicks) {
    const y = sy(t).toFixed(2);
    out.push(`<line x1="${X0}" y1="${y}" x2="${X1}" y2="${y}" stroke="#dddddd"/>`);
    out.push(
      `<text x="${X0 - 8}" y="${y}" dy="4" text-anchor="end" font-family="Helvetica, Arial, sans-serif" font-size="12">${fmtNum(t)}</text>`,
    );
  }
  for (const t of xTicks) {
    const x = sx(t).toFixed(2);
    out.push(`<line x1="${x}" y1="${Y1}" x2="${x}" y2="${Y1 + 5}" stroke="#333333"/>`);
    out.push(
      `<text x="${x}" y="${Y1 + 20}" text-anchor="middle" font-family="Helvetica, Arial, sans-serif" font-size="12">${fmtNum(t)}</text>`,
    );
  }
  out.push(
    `<rect x="${X0}" y="${Y0}" width="${X1 - X0}" height="${Y1 - Y0}" fill="none" stroke="#333333"/>`,
  );
  out.push(
    `<text x="${(X0 + X1) / 2}" y="${Y1 + 38}" text-anchor="middle" font-family="Helvetica, Arial, sans-serif" font-size="13">${esc(spec.xLabel)}</text>`,
  );
  out.push(
    `<text x="18" y="${(Y0 + Y1) / 2}" transform="rotate(-90 18 ${(Y0 + Y1) / 2})" text-anchor="middle" font-family="Helvetica, Arial, sans-serif" font-size="13">${esc(spec.yLabel)}</text>`,
  );

  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const d = s.pts
      .map((p, j) => `${j === 0 ? "M" : "L"}${sx(p.x).toFixed(2)},${sy(p.y).toFixed(2)}`)
      .join(" ");
    out.push(
      `<path class="series" d="${d}" fill="none" stroke="${color}" stroke-width="1.8"/>`,
    );
    if (spec.orientation === "sweep") {
      for (const p of s.pts) {
        out.push(
          `<circle cx="${sx(p.x).toFixed(2)}" cy="${sy(p.y).toFixed(2)}" r="3" fill="${color}"/>`,
        );
      }
    }
  });

  const perRow = 3;
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const lx = X0 + (i % perRow) * 220;
    const ly = Y1 + 52 + Math.floor(i / perRow) * 18;
    out.push(
      `<line class="legend" x1="${lx}" y1="${ly}" x2="${lx + 22}" y2="${ly}" stroke="${color}" stroke-width="1.8"/>`,
    );
    out.push(
      `<text x="${lx + 28}" y="${ly}" dy="4" font-family="Helvetica, Arial, sans-serif" font-size="12">${esc(s.metric)}</text>`,
    );
  });

  if (table.configHash !== null || table.seed !== null) {
    const parts: string[] = [];
    if (table.configHash !== null) parts.push(`config ${table.configHash}`);
    if (table.seed !== null) parts.push(`seed ${table.seed}`);
    out.push(
      `<text x="${X0}" y="${H - 10}" font-family="Helvetica, Arial, sans-serif" font-size="11" fill="#777777">${esc(parts.join("  "))}</text>`,
    );
  }

  out.push("</svg>");
  return out.join("\n") + "\n";
}
