import { SchemaError } from "./schema";

// Least-squares slope of log2(rel error) on log2(N); only used for inputs
// that carry no stored summary slope (synthetic CSVs).
export function fitSlope(N: number[], rel: number[]): number {
  const x = N.map((n) => Math.log2(n));
  const y = rel.map((r) => Math.log2(r));
  const mx = x.reduce((a, b) => a + b, 0) / x.length;
  const my = y.reduce((a, b) => a + b, 0) / y.length;
  let num = 0;
  let den = 0;
  for (let i = 0; i < x.length; i++) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  if (den === 0) {
    throw new SchemaError("cannot fit a slope: all N values coincide");
  }
  return num / den;
}
