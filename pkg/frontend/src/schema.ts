import { z } from "zod";

/** Figure request: either loaded from a JSON file or assembled from flags. */
export const figureSpecSchema = z.object({
  kind: z.enum(["logical-curves", "threshold-fit", "convergence"]),
  csv: z.array(z.string()).min(1),
  /** FitResult JSON from `colorcode-rg threshold`; required for threshold-fit. */
  fitJson: z.string().optional(),
  out: z.string(),
  width: z.number().int().positive().default(900),
  height: z.number().int().positive().default(620),
  xRange: z.tuple([z.number(), z.number()]).optional(),
  yRange: z.tuple([z.number(), z.number()]).optional(),
});

export type FigureSpec = z.infer<typeof figureSpecSchema>;

/** One row of a sweep CSV produced by `colorcode-rg sweep`. */
export interface SweepRow {
  m: number;
  n: number;
  d: number;
  p: number;
  trials: number;
  fail_any: number;
  fail_q: [number, number, number, number];
  p_L_avg: number;
  ci_lo: number;
  ci_hi: number;
  seed: number;
}

export const SWEEP_COLUMNS = [
  "m", "n", "d", "p", "trials", "fail_any",
  "fail_q0", "fail_q1", "fail_q2", "fail_q3",
  "p_L_avg", "ci_lo", "ci_hi", "seed",
] as const;

/** One row of a convergence CSV produced by `colorcode-rg converge`. */
export interface ConvergenceRow {
  m: number;
  p: number;
  round: number;
  change_fraction: number;
  cdf: number;
}

export const CONVERGENCE_COLUMNS = ["m", "p", "round", "change_fraction", "cdf"] as const;

/** Pseudothresholds plus scaling fit, as written by `colorcode-rg threshold`. */
export const fitResultSchema = z.object({
  pseudothresholds: z.record(
    z.string(),
    z.object({
      d: z.number(),
      p_star: z.number(),
      ci_lo: z.number().nullable().optional(),
      ci_hi: z.number().nullable().optional(),
    }),
  ),
  fit: z
    .object({
      t_inf: z.number(),
      nu: z.number(),
      a: z.number(),
      residuals: z.array(z.number()),
      fixed_nu: z.boolean(),
    })
    .optional(),
});

export type FitResultFile = z.infer<typeof fitResultSchema>;
