export { plotConvergence } from "./convergence";
export { plotRuntime } from "./runtime";
export { FigureJob, FigureResult } from "./job";
export { BENCH_COLUMNS, BenchRow, SchemaError, parseBenchCsv, readBenchCsv } from "./schema";
export { fitSlope } from "./fit";
