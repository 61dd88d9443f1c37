#!/usr/bin/env node
import { readFileSync, writeFileSync } from "node:fs";
import { basename } from "node:path";
import { pathToFileURL } from "node:url";

import yargs from "yargs";

import { buildSeries, renderFigure, type PlotSeries, type XAxis } from "./figure.js";
import { SchemaError, parseCsv } from "./schema.js";

/** Exit codes follow the benchmark CLI: 0 ok, 1 usage, 2 bad data. */
export async function cliMain(argv: string[]): Promise<number> {
  let args;
  try {
    args = await yargs(argv)
      .usage("plot --input trace-or-ensemble.csv [--input ...] --out figure.svg")
      .option("input", {
        type: "string",
        array: true,
        demandOption: true,
        describe: "benchmark CSV (per-trial trace or ensemble); repeatable",
      })
      .option("x", {
        choices: ["iteration", "time"] as const,
        default: "iteration" as XAxis,
        describe: "x-axis quantity",
      })
      .option("out", {
        type: "string",
        demandOption: true,
        describe: "output SVG path",
      })
      .strict()
      .exitProcess(false)
      .fail((msg, err) => {
        throw err ?? new Error(msg);
      })
      .parse();
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }

  const seriesList: PlotSeries[] = [];
  for (const path of args.input) {
    let text: string;
    try {
      text = readFileSync(path, "utf8");
    } catch (err) {
      console.error(`error: ${(err as Error).message}`);
      return 2;
    }
    let series: PlotSeries;
    try {
      series = buildSeries(parseCsv(text, path), basename(path, ".csv"), args.x);
    } catch (err) {
      if (err instanceof SchemaError) {
        console.error(`error: ${err.message}`);
        return 2;
      }
      throw err;
    }
    if (series.dropped > 0) {
      console.error(
        `note: dropped ${series.dropped} row(s) with missing or nonpositive RSE ` +
          `from the log plot: ${path}`,
      );
    }
    seriesList.push(series);
  }

  let svg: string;
  try {
    ({ svg } = renderFigure(seriesList, { xAxis: args.x }));
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  try {
    writeFileSync(args.out, svg);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  console.log(`wrote ${args.out} (${seriesList.length} series)`);
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  cliMain(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
