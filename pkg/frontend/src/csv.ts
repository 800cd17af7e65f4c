import { readFileSync } from "fs";

export interface Table {
  columns: string[];
  rows: number[][];
}

/** Parse a simple numeric CSV (unquoted, comma-separated, one header row). */
export function parseCsv(text: string): Table {
  const lines = text
    .split(/\r?\n/)
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV");
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== columns.length) {
      throw new Error(`CSV row ${i + 1} has ${parts.length} fields, expected ${columns.length}`);
    }
    rows.push(parts.map((p) => (p.trim() === "" ? NaN : Number(p))));
  }
  return { columns, rows };
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, "utf-8"));
}

export function column(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new Error(`CSV is missing column '${name}' (have: ${table.columns.join(", ")})`);
  }
  return table.rows.map((r) => r[idx]);
}

export function hasColumn(table: Table, name: string): boolean {
  return table.columns.includes(name);
}
