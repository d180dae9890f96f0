import { readFileSync } from "fs";
import Papa from "papaparse";

import {
  CONVERGENCE_COLUMNS,
  ConvergenceRow,
  SWEEP_COLUMNS,
  SweepRow,
} from "./schema.js";

export class SchemaError extends Error {}

function parseCsv(path: string, expected: readonly string[]): Record<string, string>[] {
  const text = readFileSync(path, "utf8");
  if (text.trim().length === 0) {
    throw new SchemaError(`${path}: empty CSV`);
  }
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`${path}: ${parsed.errors[0].message}`);
  }
  const fields = parsed.meta.fields ?? [];
  const missing = expected.filter((c) => !fields.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(
      `${path}: missing columns [${missing.join(", ")}]; found [${fields.join(", ")}]`,
    );
  }
  if (parsed.data.length === 0) {
    throw new SchemaError(`${path}: no data rows`);
  }
  return parsed.data;
}

function num(path: string, row: Record<string, string>, col: string): number {
  const v = Number(row[col]);
  if (!Number.isFinite(v)) {
    throw new SchemaError(`${path}: column ${col} holds non-numeric value ${row[col]!}`);
  }
  return v;
}

export function readSweepCsv(path: string): SweepRow[] {
  return parseCsv(path, SWEEP_COLUMNS).map((row) => ({
    m: num(path, row, "m"),
    n: num(path, row, "n"),
    d: num(path, row, "d"),
    p: num(path, row, "p"),
    trials: num(path, row, "trials"),
    fail_any: num(path, row, "fail_any"),
    fail_q: [
      num(path, row, "fail_q0"),
      num(path, row, "fail_q1"),
      num(path, row, "fail_q2"),
      num(path, row, "fail_q3"),
    ],
    p_L_avg: num(path, row, "p_L_avg"),
    ci_lo: num(path, row, "ci_lo"),
    ci_hi: num(path, row, "ci_hi"),
    seed: num(path, row, "seed"),
  }));
}

export function readConvergenceCsv(path: string): ConvergenceRow[] {
  return parseCsv(path, CONVERGENCE_COLUMNS).map((row) => ({
    m: num(path, row, "m"),
    p: num(path, row, "p"),
    round: num(path, row, "round"),
    change_fraction: num(path, row, "change_fraction"),
    cdf: num(path, row, "cdf"),
  }));
}
