#!/usr/bin/env node
/**
 * render-figures: turn colorcode-rg sweep/threshold/converge outputs into
 * SVG figures.
 *
 * Usage:
 *   render-figures --spec figure.json
 *   render-figures --kind logical-curves --csv sweep.csv --out fig.svg
 *   render-figures --kind threshold-fit --csv sweep.csv --fit-json fit.json --out fig.svg
 *   render-figures --kind convergence --csv conv.csv --out fig.svg
 *
 * Numeric summaries (pseudothreshold and curve crossings) are printed to
 * stdout; they are pure functions of the input files.
 */

import { readFileSync, writeFileSync } from "fs";

import { SchemaError, readConvergenceCsv, readSweepCsv } from "./csv.js";
import { renderConvergence, renderLogicalCurves, renderThresholdFit } from "./render.js";
import { FigureSpec, figureSpecSchema, fitResultSchema } from "./schema.js";

function parseArgs(argv: string[]): FigureSpec {
  const flags = new Map<string, string[]>();
  let key: string | null = null;
  for (const arg of argv) {
    if (arg.startsWith("--")) {
      key = arg.slice(2);
      if (!flags.has(key)) flags.set(key, []);
    } else if (key) {
      flags.get(key)!.push(arg);
    } else {
      throw new SchemaError(`unexpected positional argument ${arg}`);
    }
  }
  const get = (name: string): string | undefined => flags.get(name)?.[0];

  if (flags.has("spec")) {
    const raw = JSON.parse(readFileSync(get("spec")!, "utf8"));
    return figureSpecSchema.parse(raw);
  }
  const range = (name: string): [number, number] | undefined => {
    const v = get(name);
    if (!v) return undefined;
    const parts = v.split(",").map(Number);
    if (parts.length !== 2 || parts.some((x) => !Number.isFinite(x))) {
      throw new SchemaError(`--${name} expects lo,hi`);
    }
    return [parts[0], parts[1]];
  };
  return figureSpecSchema.parse({
    kind: get("kind"),
    csv: flags.get("csv") ?? [],
    fitJson: get("fit-json"),
    out: get("out"),
    width: get("width") ? Number(get("width")) : undefined,
    height: get("height") ? Number(get("height")) : undefined,
    xRange: range("x-range"),
    yRange: range("y-range"),
  });
}

export function run(argv: string[]): number {
  let spec: FigureSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    console.error(`figure spec error: ${(err as Error).message}`);
    return 2;
  }
  try {
    if (spec.kind === "logical-curves") {
      const rows = spec.csv.flatMap((path) => readSweepCsv(path));
      const result = renderLogicalCurves(rows, spec);
      writeFileSync(spec.out, result.svg);
      for (const [m, p] of [...result.pseudothresholds.entries()].sort()) {
        console.log(`pseudothreshold m=${m}: ${p === null ? "no bracket" : p.toFixed(6)}`);
      }
      for (const c of result.crossings) {
        console.log(
          `curve crossing m=${c.m1} vs m=${c.m2}: ` +
            (c.p === null ? "none in grid" : c.p.toFixed(6)),
        );
      }
    } else if (spec.kind === "threshold-fit") {
      if (!spec.fitJson) {
        throw new SchemaError("threshold-fit needs --fit-json (colorcode-rg threshold output)");
      }
      const fit = fitResultSchema.parse(JSON.parse(readFileSync(spec.fitJson, "utf8")));
      writeFileSync(spec.out, renderThresholdFit(fit, spec));
      for (const [m, entry] of Object.entries(fit.pseudothresholds)) {
        console.log(`pseudothreshold m=${m}: ${entry.p_star.toFixed(6)} (d=${entry.d})`);
      }
      if (fit.fit) {
        console.log(
          `fit: t_inf=${fit.fit.t_inf.toFixed(6)} nu=${fit.fit.nu.toFixed(4)}` +
            ` a=${fit.fit.a.toFixed(4)}${fit.fit.fixed_nu ? " (fixed nu)" : ""}`,
        );
      }
    } else {
      const rows = spec.csv.flatMap((path) => readConvergenceCsv(path));
      writeFileSync(spec.out, renderConvergence(rows, spec));
      const byKey = new Map<string, number>();
      for (const r of rows) {
        const key = `m=${r.m}, p=${r.p}`;
        byKey.set(key, Math.max(byKey.get(key) ?? 0, r.cdf));
      }
      for (const [key, cdf] of byKey) {
        console.log(`converged CDF at final round (${key}): ${cdf.toFixed(4)}`);
      }
    }
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 2;
    }
    console.error(`render error: ${(err as Error).message}`);
    return 1;
  }
  console.log(`wrote ${spec.out}`);
  return 0;
}

const isMain = process.argv[1] && import.meta.url.endsWith(
  process.argv[1].split("/").pop() ?? "",
);
if (isMain) {
  process.exit(run(process.argv.slice(2)));
}
