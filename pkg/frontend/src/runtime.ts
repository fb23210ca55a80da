import { FigureJob, FigureResult, checkJob, writeFigure } from "./job";
import { BenchRow, SchemaError, readBenchCsv } from "./schema";
import { PALETTE, Series, Tick, logTicks, renderFigure } from "./svg";

// Runtime figures come in two shapes, picked from the data:
//   tolerance: every backend's rows sit at one dimension -> one line per
//     CSV/backend, wall time vs achieved relative error (both log10,
//     tighter tolerances to the right);
//   dimension: some backend's rows span several dimensions -> one line per
//     backend, wall time (log10) vs dimension, keeping the tightest row
//     per backend and dimension.

interface RuntimePoint {
  x: number;
  wall: number;
}

interface RuntimeSeries {
  label: string;
  points: RuntimePoint[];
}

function checkedRows(path: string): BenchRow[] {
  const rows = readBenchCsv(path);
  if (rows.length === 0) {
    throw new SchemaError(`${path}: no tolerance rows`);
  }
  for (const r of rows) {
    if (r.rel_error === null || r.wall_ms === null || r.d === null) {
      throw new SchemaError(`${path}: row without rel_error, wall_ms or d`);
    }
    if (r.rel_error <= 0 || r.wall_ms <= 0) {
      throw new SchemaError(`${path}: rel_error and wall_ms must be positive`);
    }
  }
  return rows;
}

function toleranceSeries(perCsv: BenchRow[][], labels?: string[]): RuntimeSeries[] {
  const out: RuntimeSeries[] = [];
  perCsv.forEach((rows, i) => {
    const byBackend = new Map<string, BenchRow[]>();
    for (const r of rows) {
      const group = byBackend.get(r.backend) ?? [];
      group.push(r);
      byBackend.set(r.backend, group);
    }
    for (const [backend, group] of byBackend) {
      const base = labels?.[i] ?? `${group[0].instance_id} ${backend}`;
      const label = labels && byBackend.size > 1 ? `${base} ${backend}` : base;
      const points = group
        .map((r) => ({ x: r.rel_error as number, wall: r.wall_ms as number }))
        .sort((a, b) => b.x - a.x);
      out.push({ label, points });
    }
  });
  return out;
}

function dimensionSeries(rows: BenchRow[], labels?: string[]): RuntimeSeries[] {
  if (labels) {
    throw new SchemaError(
      "labels are per CSV; dimension-mode series are per backend"
    );
  }
  const byBackend = new Map<string, Map<number, BenchRow>>();
  for (const r of rows) {
    const perDim = byBackend.get(r.backend) ?? new Map<number, BenchRow>();
    const kept = perDim.get(r.d as number);
    if (!kept || (r.rel_error as number) < (kept.rel_error as number)) {
      perDim.set(r.d as number, r);
    }
    byBackend.set(r.backend, perDim);
  }
  const backends = [...byBackend.keys()].sort();
  return backends.map((backend) => {
    const perDim = byBackend.get(backend) as Map<number, BenchRow>;
    const dims = [...perDim.keys()].sort((a, b) => a - b);
    return {
      label: backend,
      points: dims.map((d) => ({
        x: d,
        wall: perDim.get(d)?.wall_ms as number,
      })),
    };
  });
}

export function plotRuntime(job: FigureJob): FigureResult {
  checkJob(job);
  const perCsv = job.csvPaths.map(checkedRows);
  const all = perCsv.flat();

  const dimsPerBackend = new Map<string, Set<number>>();
  for (const r of all) {
    const dims = dimsPerBackend.get(r.backend) ?? new Set<number>();
    dims.add(r.d as number);
    dimsPerBackend.set(r.backend, dims);
  }
  const dimensional = [...dimsPerBackend.values()].some((s) => s.size > 1);

  const series = dimensional
    ? dimensionSeries(all, job.labels)
    : toleranceSeries(perCsv, job.labels);

  let ylo = Infinity;
  let yhi = -Infinity;
  for (const s of series) {
    for (const p of s.points) {
      ylo = Math.min(ylo, Math.log10(p.wall));
      yhi = Math.max(yhi, Math.log10(p.wall));
    }
  }
  if (yhi === ylo) {
    ylo -= 0.5;
    yhi += 0.5;
  }

  let xTicks: Tick[];
  let toX: (x: number) => number;
  let xLabel: string;
  let xColumn: string;
  if (dimensional) {
    const dims = series.flatMap((s) => s.points.map((p) => p.x));
    let lo = Math.min(...dims);
    let hi = Math.max(...dims);
    if (lo === hi) {
      lo -= 0.5;
      hi += 0.5;
    }
    toX = (x) => (x - lo) / (hi - lo);
    xTicks = [];
    for (let d = Math.ceil(lo); d <= Math.floor(hi); d++) {
      xTicks.push({ frac: toX(d), label: `${d}` });
    }
    xLabel = "dimension";
    xColumn = "d";
  } else {
    let lo = Infinity;
    let hi = -Infinity;
    for (const s of series) {
      for (const p of s.points) {
        lo = Math.min(lo, Math.log10(p.x));
        hi = Math.max(hi, Math.log10(p.x));
      }
    }
    if (hi === lo) {
      lo -= 0.5;
      hi += 0.5;
    }
    // reversed: tighter tolerances towards the right edge
    toX = (x) => 1 - (Math.log10(x) - lo) / (hi - lo);
    xTicks = logTicks(lo, hi, 10).map((t) => ({
      frac: 1 - t.frac,
      label: t.label,
    }));
    xLabel = "achieved relative error";
    xColumn = "rel_error";
  }

  const legend = series.map((s) => s.label);
  const drawn: Series[] = series.map((s, i) => ({
    label: s.label,
    color: PALETTE[i % PALETTE.length],
    xs: s.points.map((p) => toX(p.x)),
    ys: s.points.map((p) => (Math.log10(p.wall) - ylo) / (yhi - ylo)),
  }));
  const svg = renderFigure({
    xLabel,
    yLabel: "wall time (ms)",
    xTicks,
    yTicks: logTicks(ylo, yhi, 10),
    series: drawn,
  });

  const sidecar: string[] = [];
  series.forEach((s) => {
    sidecar.push(`# series: ${s.label}`);
    sidecar.push(`${xColumn},wall_ms`);
    for (const p of s.points) {
      sidecar.push(`${p.x},${p.wall}`);
    }
    sidecar.push("");
  });
  return writeFigure(job.outPath, svg, sidecar.join("\n") + "\n", legend);
}
