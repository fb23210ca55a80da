import { writeFileSync } from "fs";

import { SchemaError } from "./schema";

export interface FigureJob {
  csvPaths: string[];
  // one label per CSV; defaults to "<instance_id> <backend>" from the rows
  labels?: string[];
  outPath: string;
}

export interface FigureResult {
  svgPath: string;
  sidecarPath: string;
  // legend entries in render order
  legend: string[];
}

export function checkJob(job: FigureJob): void {
  if (job.csvPaths.length === 0) {
    throw new SchemaError("at least one CSV is required");
  }
  if (job.labels && job.labels.length !== job.csvPaths.length) {
    throw new SchemaError(
      `${job.labels.length} labels for ${job.csvPaths.length} CSVs`
    );
  }
}

// The renderer emits SVG; any other requested extension is swapped out so
// the written file never lies about its format.
export function svgPath(outPath: string): string {
  return outPath.replace(/\.(svg|png|pdf|jpg|jpeg)$/i, "") + ".svg";
}

export function sidecarPath(outPath: string): string {
  return svgPath(outPath).replace(/\.svg$/, "") + ".values.csv";
}

export function writeFigure(
  outPath: string,
  svg: string,
  sidecar: string,
  legend: string[]
): FigureResult {
  const sp = svgPath(outPath);
  const scp = sidecarPath(outPath);
  writeFileSync(sp, svg);
  writeFileSync(scp, sidecar);
  return { svgPath: sp, sidecarPath: scp, legend };
}
