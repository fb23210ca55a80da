#!/usr/bin/env node
import { plotConvergence } from "./convergence";
import { FigureJob } from "./job";
import { plotRuntime } from "./runtime";
import { SchemaError } from "./schema";

const USAGE =
  "usage: plotkit <convergence|runtime> --csv A.csv [B.csv ...] --out FIG [--label L ...]";

export function main(argv: string[]): number {
  const kind = argv[0];
  if (kind !== "convergence" && kind !== "runtime") {
    console.error(USAGE);
    return 2;
  }
  const csvPaths: string[] = [];
  const labels: string[] = [];
  let outPath = "";
  let i = 1;
  while (i < argv.length) {
    const flag = argv[i];
    if (flag === "--csv") {
      i++;
      while (i < argv.length && !argv[i].startsWith("--")) {
        csvPaths.push(argv[i++]);
      }
    } else if (flag === "--label") {
      if (i + 1 >= argv.length) {
        console.error(USAGE);
        return 2;
      }
      labels.push(argv[++i]);
      i++;
    } else if (flag === "--out") {
      if (i + 1 >= argv.length) {
        console.error(USAGE);
        return 2;
      }
      outPath = argv[++i];
      i++;
    } else {
      console.error(`unknown flag ${flag}\n${USAGE}`);
      return 2;
    }
  }
  if (csvPaths.length === 0 || outPath === "") {
    console.error(USAGE);
    return 2;
  }
  const job: FigureJob = {
    csvPaths,
    outPath,
    labels: labels.length > 0 ? labels : undefined,
  };
  try {
    const res = kind === "convergence" ? plotConvergence(job) : plotRuntime(job);
    console.log(`wrote ${res.svgPath} and ${res.sidecarPath}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`error[SchemaError]: ${err.message}`);
      return 2;
    }
    console.error(`error[${(err as Error).constructor.name}]: ${(err as Error).message}`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
