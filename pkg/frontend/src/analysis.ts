import { SweepRow } from "./schema.js";

/** Points of one size's logical-error curve, sorted by p. */
export function curveBySize(rows: SweepRow[]): Map<number, SweepRow[]> {
  const out = new Map<number, SweepRow[]>();
  for (const row of rows) {
    const list = out.get(row.m) ?? [];
    list.push(row);
    out.set(row.m, list);
  }
  for (const list of out.values()) {
    list.sort((a, b) => a.p - b.p);
  }
  return out;
}

/**
 * Crossing of the curve with the diagonal p_L(p) = p, using the same
 * log-linear interpolation between bracketing grid points as the harness.
 */
export function diagonalCrossing(ps: number[], ys: number[]): number | null {
  for (let i = 0; i + 1 < ps.length; i++) {
    const f0 = ys[i] - ps[i];
    const f1 = ys[i + 1] - ps[i + 1];
    if (f0 <= 0 && f1 > 0 && ys[i] > 0) {
      const lx0 = Math.log(ps[i]);
      const lx1 = Math.log(ps[i + 1]);
      const ly0 = Math.log(ys[i]);
      const ly1 = Math.log(ys[i + 1]);
      const s = (ly1 - ly0) / (lx1 - lx0);
      if (s === 1) continue;
      const x = (ly0 - s * lx0) / (1 - s);
      if (x >= Math.min(lx0, lx1) - 1e-12 && x <= Math.max(lx0, lx1) + 1e-12) {
        const p = Math.exp(x);
        if (p > 0 && p < 0.5) return p;
      }
    }
  }
  return null;
}

/** Crossing point of two curves sharing a p grid (log-log interpolation). */
export function curveCrossing(ps: number[], ya: number[], yb: number[]): number | null {
  const d = ps.map((_, i) => Math.log(ya[i]) - Math.log(yb[i]));
  for (let i = 0; i + 1 < ps.length; i++) {
    if (d[i] === 0) return ps[i];
    if ((d[i] < 0 && d[i + 1] >= 0) || (d[i] > 0 && d[i + 1] <= 0)) {
      const t = d[i] / (d[i] - d[i + 1]);
      return Math.exp(Math.log(ps[i]) + t * (Math.log(ps[i + 1]) - Math.log(ps[i])));
    }
  }
  return null;
}

export function scalingCurve(
  a: number,
  nu: number,
  tInf: number,
  dMin: number,
  dMax: number,
  steps = 200,
): Array<[number, number]> {
  const pts: Array<[number, number]> = [];
  for (let i = 0; i <= steps; i++) {
    const d = dMin * Math.pow(dMax / dMin, i / steps);
    pts.push([d, a * Math.pow(d, -1 / nu) + tInf]);
  }
  return pts;
}
