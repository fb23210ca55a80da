import { fitSlope } from "./fit";
import { FigureJob, FigureResult, checkJob, writeFigure } from "./job";
import { BenchRow, SchemaError, readBenchCsv } from "./schema";
import { PALETTE, Series, logTicks, renderFigure } from "./svg";

interface ConvergenceSeries {
  label: string;
  N: number[];
  rel: number[];
  slope: number;
}

// One series per CSV: per-N rows carry an empty slope cell, the summary row
// carries the harness-fitted slope. The stored slope wins over a refit so
// the legend always matches the harness report.
function extractSeries(rows: BenchRow[], name: string, label?: string): ConvergenceSeries {
  if (rows.length === 0) {
    throw new SchemaError(`${name}: no data rows`);
  }
  const points = rows.filter((r) => r.slope === null);
  const summary = rows.filter((r) => r.slope !== null);
  const N: number[] = [];
  const rel: number[] = [];
  for (const r of points) {
    if (r.N === null || r.rel_error === null) {
      throw new SchemaError(`${name}: per-N row without N or rel_error`);
    }
    if (r.rel_error <= 0) {
      throw new SchemaError(`${name}: rel_error must be positive to plot on a log axis`);
    }
    N.push(r.N);
    rel.push(r.rel_error);
  }
  if (N.length < 2) {
    throw new SchemaError(`${name}: cannot fit a slope from ${N.length} point(s)`);
  }
  const order = N.map((_, i) => i).sort((a, b) => N[a] - N[b]);
  const slope = summary.length > 0 ? (summary[0].slope as number) : fitSlope(N, rel);
  return {
    label: label ?? `${rows[0].instance_id} ${rows[0].backend}`,
    N: order.map((i) => N[i]),
    rel: order.map((i) => rel[i]),
    slope,
  };
}

export function plotConvergence(job: FigureJob): FigureResult {
  checkJob(job);
  const series = job.csvPaths.map((p, i) =>
    extractSeries(readBenchCsv(p), p, job.labels?.[i])
  );

  let xlo = Infinity;
  let xhi = -Infinity;
  let ylo = Infinity;
  let yhi = -Infinity;
  for (const s of series) {
    for (const n of s.N) {
      xlo = Math.min(xlo, Math.log2(n));
      xhi = Math.max(xhi, Math.log2(n));
    }
    for (const r of s.rel) {
      ylo = Math.min(ylo, Math.log2(r));
      yhi = Math.max(yhi, Math.log2(r));
    }
  }
  if (xhi === xlo) {
    xlo -= 0.5;
    xhi += 0.5;
  }
  if (yhi === ylo) {
    ylo -= 0.5;
    yhi += 0.5;
  }

  const legend = series.map((s) => `${s.label} (slope ${s.slope.toFixed(2)})`);
  const drawn: Series[] = series.map((s, i) => ({
    label: legend[i],
    color: PALETTE[i % PALETTE.length],
    xs: s.N.map((n) => (Math.log2(n) - xlo) / (xhi - xlo)),
    ys: s.rel.map((r) => (Math.log2(r) - ylo) / (yhi - ylo)),
  }));
  const svg = renderFigure({
    xLabel: "points N",
    yLabel: "relative statistical error",
    xTicks: logTicks(xlo, xhi, 2),
    yTicks: logTicks(ylo, yhi, 2),
    series: drawn,
  });

  const sidecar: string[] = [];
  series.forEach((s, i) => {
    sidecar.push(`# series: ${legend[i]}`);
    sidecar.push(`# slope: ${s.slope.toFixed(2)}`);
    sidecar.push("N,rel_error");
    for (let j = 0; j < s.N.length; j++) {
      sidecar.push(`${s.N[j]},${s.rel[j]}`);
    }
    sidecar.push("");
  });
  return writeFigure(job.outPath, svg, sidecar.join("\n") + "\n", legend);
}
