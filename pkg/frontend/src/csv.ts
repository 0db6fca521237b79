/** CSV access for the run-directory contracts written by the covlqr CLI. */

import { readFileSync } from "node:fs";

export class MissingColumnError extends Error {
  constructor(column: string, file: string) {
    super(`column '${column}' is missing from ${file}`);
    this.name = "MissingColumnError";
  }
}

export interface Table {
  header: string[];
  rows: string[][];
  file: string;
}

export function parseCsv(text: string, file = "<string>"): Table {
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error(`empty CSV: ${file}`);
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((l) => l.split(","));
  return { header, rows, file };
}

export function readTable(path: string, required: string[]): Table {
  const table = parseCsv(readFileSync(path, "utf-8"), path);
  for (const col of required) {
    if (!table.header.includes(col)) {
      throw new MissingColumnError(col, path);
    }
  }
  return table;
}

/** Numeric cell: NR maps to null, inf/-inf to infinities. */
export function cellValue(raw: string): number | null {
  if (raw === "NR" || raw === "") return null;
  if (raw === "inf") return Infinity;
  if (raw === "-inf") return -Infinity;
  const v = Number(raw);
  if (Number.isNaN(v)) return null;
  return v;
}

export function column(table: Table, name: string): string[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) throw new MissingColumnError(name, table.file);
  return table.rows.map((r) => r[idx]);
}

export interface Row {
  [key: string]: string;
}

export function asRecords(table: Table): Row[] {
  return table.rows.map((cells) => {
    const rec: Row = {};
    table.header.forEach((h, i) => (rec[h] = cells[i]));
    return rec;
  });
}
