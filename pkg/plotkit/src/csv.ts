/**
 * Strict readers for the simulator's CSV/JSON output contract.
 * Column mismatches fail loudly: these files are the only interface
 * between the plots and the solver.
 */

export interface Table {
  columns: string[];
  rows: Record<string, string>[];
}

export function parseCsv(text: string): Table {
  const lines = text.split("\n").filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV");
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  const rows: Record<string, string>[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== columns.length) {
      throw new Error(
        `CSV row ${i + 1} has ${parts.length} fields, expected ${columns.length}`,
      );
    }
    const row: Record<string, string> = {};
    columns.forEach((c, j) => (row[c] = parts[j]));
    rows.push(row);
  }
  return { columns, rows };
}

export function requireColumns(table: Table, needed: string[], what: string): void {
  const missing = needed.filter((c) => !table.columns.includes(c));
  if (missing.length > 0) {
    throw new Error(
      `${what}: missing column(s) ${missing.join(", ")}; found [${table.columns.join(", ")}]`,
    );
  }
}

export function numeric(table: Table, column: string): number[] {
  return table.rows.map((r, i) => {
    const v = Number(r[column]);
    if (!Number.isFinite(v)) {
      throw new Error(`${column}: non-numeric value ${r[column]!} at row ${i + 2}`);
    }
    return v;
  });
}

/** Columns every simulate run.csv must carry (the solver's contract). */
export const RUN_CSV_COLUMNS = [
  "t", "mass", "n_linf", "n00_l2", "n0neq_l2", "dz_n0neq_l2", "dzz_n0neq_l2",
  "nneq_l2", "dxx_nneq_l2", "dzz_nneq_l2", "dxdz_nneq_l2", "u10_h2",
  "u20_h2", "u30_h2", "w2neq_l2", "lap_u2neq_l2", "dxx_u2neq_l2",
  "dxx_u3neq_l2", "div_res", "tail_frac", "E1", "E2", "E3", "E4", "E5",
  "status",
];
