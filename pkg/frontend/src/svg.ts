/** Minimal deterministic SVG assembly: fixed styling, no timestamps. */

const FONT = "font-family=\"Helvetica, Arial, sans-serif\"";

export const HATCH_ID = "nr-hatch";

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function fmt(v: number): string {
  if (!Number.isFinite(v)) return String(v);
  const s = v.toPrecision(6);
  return String(Number(s));
}

export function svgDocument(width: number, height: number, body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<defs><pattern id="${HATCH_ID}" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)">` +
      `<rect width="6" height="6" fill="#f3f3f3"/><line x1="0" y1="0" x2="0" y2="6" stroke="#888888" stroke-width="1.5"/></pattern></defs>`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    ...body,
    "</svg>",
    "",
  ].join("\n");
}

export function line(x1: number, y1: number, x2: number, y2: number,
                     stroke = "#222222", width = 1): string {
  return `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"/>`;
}

export function rect(x: number, y: number, w: number, h: number, fill: string,
                     stroke = "#555555"): string {
  return `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}" stroke="${stroke}" stroke-width="0.5"/>`;
}

export function polyline(points: Array<[number, number]>, stroke: string): string {
  const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return `<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="1.6"/>`;
}

export function circle(x: number, y: number, r: number, fill: string): string {
  return `<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${r}" fill="${fill}"/>`;
}

export function text(x: number, y: number, content: string, size = 11,
                     anchor: "start" | "middle" | "end" = "start",
                     rotate = 0): string {
  const transform = rotate ? ` transform="rotate(${rotate} ${fmt(x)} ${fmt(y)})"` : "";
  return `<text x="${fmt(x)}" y="${fmt(y)}" font-size="${size}" ${FONT} text-anchor="${anchor}"${transform}>${esc(content)}</text>`;
}

/** Two-stop color ramp for normalized heat values in [0, 1]. */
export function heatColor(t: number): string {
  const lo = [13, 71, 161];   // deep blue at 0
  const hi = [216, 67, 21];   // deep orange at 1
  const mix = lo.map((l, i) => Math.round(l + (hi[i] - l) * Math.min(1, Math.max(0, t))));
  return `rgb(${mix[0]},${mix[1]},${mix[2]})`;
}
