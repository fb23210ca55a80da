import { mkdtempSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";

import { BENCH_COLUMNS } from "../src/schema";

type Cell = string | number | null;

const DEFAULTS: Record<string, Cell> = {
  instance_id: "toy",
  backend: "rqmc",
  model: "gbm",
  payoff: "basket_put",
  d: 1,
  N: 64,
  S: 8,
  estimate: 1.0,
  stat_error: 0.01,
  rel_error: 0.01,
  reference: 1.0,
  reference_source: "closed_form",
  wall_ms: 1.0,
  seed: 1,
  slope: null,
};

export function benchCsv(rows: Array<Record<string, Cell>>): string {
  const lines = [BENCH_COLUMNS.join(",")];
  for (const over of rows) {
    const cells = BENCH_COLUMNS.map((col) => {
      const v = col in over ? over[col] : DEFAULTS[col];
      return v === null ? "" : String(v);
    });
    lines.push(cells.join(","));
  }
  return lines.join("\n") + "\n";
}

export function tempDir(): string {
  return mkdtempSync(join(tmpdir(), "plotkit-"));
}

export function writeCsv(dir: string, name: string, text: string): string {
  const p = join(dir, name);
  writeFileSync(p, text);
  return p;
}
