/**
 * The six study figures, rendered as deterministic SVG from the CSV
 * contracts of a covlqr run directory:
 *
 *  fig1a/fig1b - stabilizing percentage / median gap vs the regularization
 *                coefficient, one curve per method (first (T, sigma_w) cell);
 *  fig2a/fig2b - heat grids of log(S_II/S_I) and log(M_I/M_II) over the
 *                (T, sigma_w) grid, min-max normalized to [0, 1];
 *  fig3a/fig3b - histograms of log10(S_II/S_I) for the random-plant study
 *                at the first and second noise level.
 *
 * Cells whose value is NR (no median reported / undefined ratio) render
 * with a hatch pattern. All numbers are taken verbatim from the CSVs.
 */

import { join } from "node:path";

import { asRecords, cellValue, MissingColumnError, readTable, Row } from "./csv.js";
import { linearScale, minMaxNormalize, niceTicks } from "./scale.js";
import {
  HATCH_ID,
  circle,
  fmt,
  heatColor,
  line,
  polyline,
  rect,
  svgDocument,
  text,
} from "./svg.js";

export const FIGURE_IDS = ["fig1a", "fig1b", "fig2a", "fig2b", "fig3a", "fig3b"] as const;
export type FigureId = (typeof FIGURE_IDS)[number];

export interface FigureSpec {
  id: FigureId;
  runDir: string;
  normalize?: boolean; // fig2 only; default true
}

const W = 440;
const H = 330;
const M = { left: 58, right: 18, top: 28, bottom: 46 };
const COLOR_I = "#1f77b4";
const COLOR_II = "#ff7f0e";

interface Frame {
  x: (v: number) => number;
  y: (v: number) => number;
  body: string[];
}

function frame(xDomain: [number, number], yDomain: [number, number],
               xLabel: string, yLabel: string, title: string): Frame {
  const x = linearScale(xDomain, [M.left, W - M.right]);
  const y = linearScale(yDomain, [H - M.bottom, M.top]);
  const body: string[] = [];
  body.push(line(M.left, H - M.bottom, W - M.right, H - M.bottom));
  body.push(line(M.left, M.top, M.left, H - M.bottom));
  for (const t of niceTicks(xDomain[0], xDomain[1])) {
    body.push(line(x(t), H - M.bottom, x(t), H - M.bottom + 4));
    body.push(text(x(t), H - M.bottom + 16, fmt(t), 10, "middle"));
  }
  for (const t of niceTicks(yDomain[0], yDomain[1])) {
    body.push(line(M.left - 4, y(t), M.left, y(t)));
    body.push(text(M.left - 7, y(t) + 3, fmt(t), 10, "end"));
  }
  body.push(text(W / 2, H - 8, xLabel, 11, "middle"));
  body.push(text(14, H / 2, yLabel, 11, "middle", -90));
  body.push(text(W / 2, 16, title, 12, "middle"));
  return { x, y, body };
}

interface CurveCell {
  coeffs: number[];
  coeffsII: number[];
  sI: Array<number | null>;
  sII: Array<number | null>;
  mI: Array<number | null>;
  mII: Array<number | null>;
}

function firstCellCurves(runDir: string): CurveCell {
  const table = readTable(join(runDir, "example1_curves.csv"),
                          ["t", "sigma_w", "method", "coefficient", "s", "m"]);
  const rows = asRecords(table);
  if (rows.length === 0) throw new Error(`no rows in ${table.file}`);
  const key = (r: Row) => `${r.t}|${r.sigma_w}`;
  const firstKey = key(rows[0]);
  const cell = rows.filter((r) => key(r) === firstKey);
  const byMethod = (m: string) => cell.filter((r) => r.method === m)
    .sort((a, b) => Number(a.coefficient) - Number(b.coefficient));
  const seriesI = byMethod("I");
  const seriesII = byMethod("II");
  const coeffs = seriesI.map((r) => Number(r.coefficient));
  return {
    coeffs,
    coeffsII: seriesII.map((r) => Number(r.coefficient)),
    sI: seriesI.map((r) => cellValue(r.s)),
    sII: seriesII.map((r) => cellValue(r.s)),
    mI: seriesI.map((r) => cellValue(r.m)),
    mII: seriesII.map((r) => cellValue(r.m)),
  };
}

function curveFigure(runDir: string, which: "s" | "m"): string {
  const cell = firstCellCurves(runDir);
  const xsI = cell.coeffs;
  const xsII = cell.coeffsII;
  const valsI = which === "s" ? cell.sI : cell.mI;
  const valsII = which === "s" ? cell.sII : cell.mII;
  const finite = [...valsI, ...valsII].filter(
    (v): v is number => v !== null && Number.isFinite(v));
  const lo = which === "s" ? 0 : Math.min(0, ...finite);
  const hi = which === "s" ? 100 : (finite.length ? Math.max(...finite) * 1.05 : 1);
  const fr = frame([Math.min(...xsI, ...xsII), Math.max(...xsI, ...xsII)],
                   [lo, hi], "regularization coefficient",
                   which === "s" ? "stabilizing percentage S" : "median gap M",
                   which === "s" ? "S vs coefficient" : "M vs coefficient");
  const draw = (xs: number[], vals: Array<number | null>, color: string) => {
    const pts: Array<[number, number]> = [];
    vals.forEach((v, i) => {
      if (v !== null && Number.isFinite(v)) {
        pts.push([fr.x(xs[i]), fr.y(v)]);
        fr.body.push(circle(fr.x(xs[i]), fr.y(v), 2.2, color));
      } else {
        // no reported value: hatched marker along the top edge
        fr.body.push(rect(fr.x(xs[i]) - 3.5, M.top + 2, 7, 7, `url(#${HATCH_ID})`, color));
      }
    });
    if (pts.length > 1) fr.body.push(polyline(pts, color));
  };
  draw(xsI, valsI, COLOR_I);
  draw(xsII, valsII, COLOR_II);
  fr.body.push(rect(W - 160, M.top + 4, 10, 10, COLOR_I));
  fr.body.push(text(W - 145, M.top + 13, "method I (lambda)", 10));
  fr.body.push(rect(W - 160, M.top + 20, 10, 10, COLOR_II));
  fr.body.push(text(W - 145, M.top + 29, "method II (gamma)", 10));
  return svgDocument(W, H, fr.body);
}

function heatFigure(runDir: string, columnName: "log_s_ratio" | "log_m_ratio",
                    title: string, normalize: boolean): string {
  const table = readTable(join(runDir, "example1_best.csv"),
                          ["t", "sigma_w", columnName]);
  const rows = asRecords(table);
  if (rows.length === 0) throw new Error(`no rows in ${table.file}`);
  const ts = [...new Set(rows.map((r) => Number(r.t)))].sort((a, b) => a - b);
  const sigmas = [...new Set(rows.map((r) => Number(r.sigma_w)))].sort((a, b) => a - b);
  const raw = rows.map((r) => cellValue(r[columnName]));
  const values = normalize ? minMaxNormalize(raw) : raw;
  const body: string[] = [];
  const cw = (W - M.left - M.right) / ts.length;
  const ch = (H - M.top - M.bottom) / sigmas.length;
  rows.forEach((r, i) => {
    const ci = ts.indexOf(Number(r.t));
    const ri = sigmas.indexOf(Number(r.sigma_w));
    const x = M.left + ci * cw;
    const y = H - M.bottom - (ri + 1) * ch;
    const v = values[i];
    const fill = v === null ? `url(#${HATCH_ID})` : heatColor(v);
    body.push(rect(x, y, cw, ch, fill));
    if (v !== null) {
      body.push(text(x + cw / 2, y + ch / 2 + 3, v.toFixed(2), 9, "middle"));
    }
  });
  ts.forEach((t, ci) => body.push(
    text(M.left + (ci + 0.5) * cw, H - M.bottom + 16, fmt(t), 10, "middle")));
  sigmas.forEach((s, ri) => body.push(
    text(M.left - 7, H - M.bottom - (ri + 0.5) * ch + 3, fmt(s), 10, "end")));
  body.push(text(W / 2, H - 8, "data length T", 11, "middle"));
  body.push(text(14, H / 2, "noise level sigma_w", 11, "middle", -90));
  body.push(text(W / 2, 16, title + (normalize ? " (normalized to [0,1])" : ""), 12, "middle"));
  return svgDocument(W, H, body);
}

function histFigure(runDir: string, sigmaIndex: number): string {
  const table = readTable(join(runDir, "example2_hist.csv"),
                          ["sigma_w", "system", "log10_ratio"]);
  const rows = asRecords(table);
  const sigmas = [...new Set(rows.map((r) => Number(r.sigma_w)))].sort((a, b) => a - b);
  if (sigmaIndex >= sigmas.length) {
    throw new Error(
      `run directory has ${sigmas.length} noise level(s); figure needs index ${sigmaIndex}`);
  }
  const sigma = sigmas[sigmaIndex];
  const vals = rows.filter((r) => Number(r.sigma_w) === sigma)
    .map((r) => Number(r.log10_ratio))
    .filter((v) => Number.isFinite(v));
  if (vals.length === 0) throw new Error(`no histogram values for sigma_w=${sigma}`);
  const lo = Math.min(...vals);
  const hi = Math.max(...vals);
  const nBins = 10;
  const width = hi > lo ? (hi - lo) / nBins : 1;
  const counts = new Array(nBins).fill(0);
  for (const v of vals) {
    const idx = hi > lo ? Math.min(nBins - 1, Math.floor((v - lo) / width)) : 0;
    counts[idx] += 1;
  }
  const fr = frame([lo, hi > lo ? hi : lo + 1], [0, Math.max(...counts) * 1.1 || 1],
                   "log10(S_II / S_I)", "number of systems",
                   `histogram at sigma_w = ${fmt(sigma)}`);
  counts.forEach((c, i) => {
    const x0 = fr.x(lo + i * width);
    const x1 = fr.x(lo + (i + 1) * width);
    fr.body.push(rect(x0, fr.y(c), Math.max(1, x1 - x0 - 1), fr.y(0) - fr.y(c), COLOR_II));
  });
  return svgDocument(W, H, fr.body);
}

export function renderFigure(spec: FigureSpec): string {
  const normalize = spec.normalize !== false;
  switch (spec.id) {
    case "fig1a":
      return curveFigure(spec.runDir, "s");
    case "fig1b":
      return curveFigure(spec.runDir, "m");
    case "fig2a":
      return heatFigure(spec.runDir, "log_s_ratio", "log(S_II / S_I)", normalize);
    case "fig2b":
      return heatFigure(spec.runDir, "log_m_ratio", "log(M_I / M_II)", normalize);
    case "fig3a":
      return histFigure(spec.runDir, 0);
    case "fig3b":
      return histFigure(spec.runDir, 1);
    default:
      throw new Error(`unknown figure id: ${spec.id}`);
  }
}

export { MissingColumnError };
