import { readFileSync } from "fs";

// Fixed column order of the pricing bench CSVs; every input must match it.
export const BENCH_COLUMNS = [
  "instance_id",
  "backend",
  "model",
  "payoff",
  "d",
  "N",
  "S",
  "estimate",
  "stat_error",
  "rel_error",
  "reference",
  "reference_source",
  "wall_ms",
  "seed",
  "slope",
] as const;

const STRING_COLUMNS = new Set([
  "instance_id",
  "backend",
  "model",
  "payoff",
  "reference_source",
]);

export class SchemaError extends Error {}

export interface BenchRow {
  instance_id: string;
  backend: string;
  model: string;
  payoff: string;
  d: number | null;
  N: number | null;
  S: number | null;
  estimate: number | null;
  stat_error: number | null;
  rel_error: number | null;
  reference: number | null;
  reference_source: string;
  wall_ms: number | null;
  seed: number | null;
  slope: number | null;
}

export function parseBenchCsv(text: string, name: string): BenchRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${name}: empty file`);
  }
  if (lines[0] !== BENCH_COLUMNS.join(",")) {
    throw new SchemaError(`${name}: header does not match the bench schema`);
  }
  const rows: BenchRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    // The bench writer never quotes; its string cells are token-like.
    if (lines[i].includes('"')) {
      throw new SchemaError(`${name}: quoted cells are not supported`);
    }
    const cells = lines[i].split(",");
    if (cells.length !== BENCH_COLUMNS.length) {
      throw new SchemaError(
        `${name}: line ${i + 1} has ${cells.length} cells, expected ${BENCH_COLUMNS.length}`
      );
    }
    const row: Record<string, string | number | null> = {};
    for (let j = 0; j < BENCH_COLUMNS.length; j++) {
      const col = BENCH_COLUMNS[j];
      if (STRING_COLUMNS.has(col)) {
        row[col] = cells[j];
      } else if (cells[j] === "") {
        row[col] = null;
      } else {
        const v = Number(cells[j]);
        if (!Number.isFinite(v)) {
          throw new SchemaError(`${name}: line ${i + 1}: bad number in ${col}`);
        }
        row[col] = v;
      }
    }
    rows.push(row as unknown as BenchRow);
  }
  return rows;
}

export function readBenchCsv(path: string): BenchRow[] {
  return parseBenchCsv(readFileSync(path, "utf8"), path);
}
