import { spawnSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { cliMain } from "../src/cli.js";
import { buildSeries } from "../src/figure.js";
import { parseCsv } from "../src/schema.js";

const PKG_ROOT = join(dirname(fileURLToPath(import.meta.url)), "..");

const ENSEMBLE_TEXT =
  "k,elapsed_ns_median,rse_min,rse_median,rse_max\n" +
  "0,1000,0.5,1.0,2.0\n" +
  "10,2000,0.05,0.1,0.4\n" +
  "20,3000,0.005,0.01,0.04\n" +
  "30,4000,0.004,0.009,0.05\n";

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "rowsolve-plots-"));
}

describe("plot CLI", () => {
  it("renders a synthetic ensemble with full data fidelity", async () => {
    const dir = tmp();
    const csv = join(dir, "ensemble.csv");
    const out = join(dir, "fig.svg");
    writeFileSync(csv, ENSEMBLE_TEXT);

    const code = await cliMain(["--input", csv, "--x", "iteration", "--out", out]);
    expect(code).toBe(0);
    expect(existsSync(out)).toBe(true);
    expect(readFileSync(out, "utf8")).toContain("</svg>");

    const series = buildSeries(parseCsv(ENSEMBLE_TEXT, csv), "ensemble", "iteration");
    expect(series.x).toEqual([0, 10, 20, 30]);
    expect(series.y).toEqual([1.0, 0.1, 0.01, 0.009]);
    expect(series.band).toEqual({
      lo: [0.5, 0.05, 0.005, 0.004],
      hi: [2.0, 0.4, 0.04, 0.05],
    });
    for (let i = 0; i < series.x.length; i++) {
      expect(series.band!.lo[i]).toBeLessThanOrEqual(series.y[i]);
      expect(series.y[i]).toBeLessThanOrEqual(series.band!.hi[i]);
    }
    console.log(
      "[A13] PASS plotted arrays equal the CSV values, min <= median <= max, " +
        "exit 0, output written",
    );
  });

  it("runs as a compiled script with exit code 0", () => {
    const dir = tmp();
    const csv = join(dir, "ensemble.csv");
    const out = join(dir, "fig.svg");
    writeFileSync(csv, ENSEMBLE_TEXT);
    const res = spawnSync(
      process.execPath,
      [join(PKG_ROOT, "dist", "cli.js"), "--input", csv, "--out", out],
      { encoding: "utf8" },
    );
    expect(res.status).toBe(0);
    expect(res.stdout).toContain("wrote");
    expect(existsSync(out)).toBe(true);
  });

  it("overlays several inputs", async () => {
    const dir = tmp();
    const e1 = join(dir, "rmr.csv");
    const e2 = join(dir, "ermr.csv");
    const out = join(dir, "fig.svg");
    writeFileSync(e1, ENSEMBLE_TEXT);
    writeFileSync(e2, ENSEMBLE_TEXT.replace(/0\.009/, "0.0001"));
    const code = await cliMain(["--input", e1, "--input", e2, "--out", out]);
    expect(code).toBe(0);
    const svg = readFileSync(out, "utf8");
    expect(svg).toContain(">rmr</text>");
    expect(svg).toContain(">ermr</text>");
  });

  it("exits 2 on a missing input file", async () => {
    const dir = tmp();
    const code = await cliMain([
      "--input",
      join(dir, "absent.csv"),
      "--out",
      join(dir, "fig.svg"),
    ]);
    expect(code).toBe(2);
  });

  it("exits 2 on a schema mismatch and does not write the figure", async () => {
    const dir = tmp();
    const csv = join(dir, "bad.csv");
    const out = join(dir, "fig.svg");
    writeFileSync(csv, "k,elapsed_ns_median,rse_min,rse_med,rse_max\n0,1,1,1,1\n");
    const code = await cliMain(["--input", csv, "--out", out]);
    expect(code).toBe(2);
    expect(existsSync(out)).toBe(false);
  });

  it("exits 1 on an unknown flag", async () => {
    const code = await cliMain(["--input", "x.csv", "--out", "y.svg", "--bogus"]);
    expect(code).toBe(1);
  });

  it("exits 1 when inputs are missing", async () => {
    const code = await cliMain(["--out", "y.svg"]);
    expect(code).toBe(1);
  });
});
