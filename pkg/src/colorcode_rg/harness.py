"""Monte Carlo sweeps, pseudothreshold extraction and finite-size scaling.

Trials are distributed over a process pool in fixed-size chunks whose seeds
derive only from (sweep seed, point index, trial index); per-chunk integer
counts are reduced by chunk index, so results are byte-identical for any
worker count.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import least_squares

from . import __version__
from .decoder import DecoderConfig, decode, lattice_chain
from .lattice import build_lattice
from .noise import trial_rng

CHUNK = 512
WORKERS_ENV = "COLORCODE_RG_WORKERS"

CSV_COLUMNS = [
    "m", "n", "d", "p", "trials", "fail_any",
    "fail_q0", "fail_q1", "fail_q2", "fail_q3",
    "p_L_avg", "ci_lo", "ci_hi", "seed",
]


@dataclass(frozen=True)
class SweepConfig:
    m_list: tuple
    p_list: tuple
    trials: int
    seed: int = 0
    bp_rounds: int = 2
    split_rounds: int = 15
    mode: str = "single"
    sigma_cutoff: float = 1e-6
    out_csv: str | None = None
    out_manifest: str | None = None
    workers: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for p in self.p_list:
            if not (0.0 < p < 0.5):
                raise ValueError(f"p values must lie in (0, 0.5), got {p}")
        if not self.m_list:
            raise ValueError("m_list must not be empty")

    def decoder_config(self) -> DecoderConfig:
        return DecoderConfig(bp_rounds=self.bp_rounds, split_rounds=self.split_rounds,
                             mode=self.mode, sigma_cutoff=self.sigma_cutoff)


@dataclass
class SweepPoint:
    m: int
    n: int
    d: int
    p: float
    trials: int
    fail_any: int
    fail_q: tuple
    p_L_avg: float
    ci_lo: float
    ci_hi: float
    seed: int


@dataclass
class SweepResult:
    config: SweepConfig
    points: list = field(default_factory=list)

    def rows(self):
        for pt in self.points:
            yield [pt.m, pt.n, pt.d, f"{pt.p:.10g}", pt.trials, pt.fail_any,
                   *pt.fail_q, f"{pt.p_L_avg:.10g}", f"{pt.ci_lo:.10g}",
                   f"{pt.ci_hi:.10g}", pt.seed]


def wilson_interval(k: int, n: int, z: float = 1.959963984540054):
    """Wilson score interval for k successes out of n."""
    if n == 0:
        return 0.0, 1.0
    phat = k / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * np.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if k == 0 else max(0.0, center - half)
    hi = 1.0 if k == n else min(1.0, center + half)
    return lo, hi


def _run_chunk(args):
    """Decode one contiguous block of trials; returns integer counts."""
    m, p, seed, point_index, start, count, cfg_kwargs = args
    lattice = build_lattice(m)
    config = DecoderConfig(**cfg_kwargs)
    fail_q = np.zeros(4, dtype=np.int64)
    fail_any = 0
    mismatches = 0
    for t in range(start, start + count):
        rng = trial_rng(seed, point_index, t)
        error = (rng.random(lattice.n_qubits) < p).astype(np.uint8)
        syndrome = lattice.syndrome_of(error)
        if not syndrome.any():
            # the most probable class of a trivial syndrome is trivial
            flags = lattice.logical_failure(error)
        else:
            result = decode(lattice, syndrome, p, config, error=error)
            flags = result.flags
            mismatches += int(result.syndrome_mismatch)
        fail_q += flags
        fail_any += int(flags.any())
    return start, fail_any, fail_q, mismatches


def _worker_count(config: SweepConfig) -> int:
    if config.workers is not None:
        return max(1, config.workers)
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def run_sweep(config: SweepConfig, progress=None) -> SweepResult:
    """Monte Carlo logical error rates over the (m, p) grid."""
    workers = _worker_count(config)
    cfg_kwargs = dict(bp_rounds=config.bp_rounds, split_rounds=config.split_rounds,
                      mode=config.mode, sigma_cutoff=config.sigma_cutoff)
    result = SweepResult(config=config)

    tasks = []
    point_index = 0
    for m in config.m_list:
        for p in config.p_list:
            starts = list(range(0, config.trials, CHUNK))
            for s in starts:
                count = min(CHUNK, config.trials - s)
                tasks.append((m, float(p), config.seed, point_index, s, count, cfg_kwargs))
            point_index += 1

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_chunk, tasks, chunksize=1))
    else:
        outcomes = []
        for t in tasks:
            outcomes.append(_run_chunk(t))
            if progress:
                progress(len(outcomes), len(tasks))

    # deterministic reduction by (point, chunk start) order
    per_point = {}
    for task, out in zip(tasks, outcomes):
        key = task[3]
        per_point.setdefault(key, []).append((out[0], out[1], out[2]))
    point_index = 0
    for m in config.m_list:
        lat = build_lattice(m)
        for p in config.p_list:
            chunks = sorted(per_point[point_index])
            fail_any = sum(c[1] for c in chunks)
            fail_q = np.sum([c[2] for c in chunks], axis=0)
            total_q = int(fail_q.sum())
            p_avg = total_q / (4 * config.trials)
            lo, hi = wilson_interval(total_q, 4 * config.trials)
            result.points.append(SweepPoint(
                m=m, n=lat.params.n, d=lat.params.d, p=float(p),
                trials=config.trials, fail_any=int(fail_any),
                fail_q=tuple(int(x) for x in fail_q),
                p_L_avg=p_avg, ci_lo=lo, ci_hi=hi, seed=config.seed,
            ))
            point_index += 1

    if config.out_csv:
        write_sweep_csv(result, config.out_csv)
    if config.out_manifest:
        write_manifest(config, config.out_manifest)
    return result


def write_sweep_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in result.rows():
            writer.writerow(row)


def read_sweep_csv(path):
    """Rows of a sweep CSV as dicts with numeric fields parsed."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"sweep CSV is missing columns: {missing}")
        for rec in reader:
            out.append({
                "m": int(rec["m"]), "n": int(rec["n"]), "d": int(rec["d"]),
                "p": float(rec["p"]), "trials": int(rec["trials"]),
                "fail_any": int(rec["fail_any"]),
                "fail_q": tuple(int(rec[f"fail_q{i}"]) for i in range(4)),
                "p_L_avg": float(rec["p_L_avg"]),
                "ci_lo": float(rec["ci_lo"]), "ci_hi": float(rec["ci_hi"]),
                "seed": int(rec["seed"]),
            })
    return out


def write_manifest(config: SweepConfig, path) -> None:
    manifest = {
        "config": asdict(config),
        "version": __version__,
        "chunk": CHUNK,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "numpy": np.__version__,
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# threshold extraction

def pseudothreshold(ps, p_ls, ci_lo=None, ci_hi=None):
    """Crossing of the logical curve with the diagonal p_L(p) = p.

    Log-linear interpolation between the bracketing grid points; the Wilson
    band, when given, is propagated by intersecting the shifted curves.
    Raises when the grid does not bracket a crossing inside (0, 0.5).
    """
    p_star = _diagonal_crossing(ps, p_ls)
    if p_star is None:
        raise ValueError("grid does not bracket the pseudothreshold")
    lo = hi = float("nan")
    if ci_lo is not None:
        v = _diagonal_crossing(ps, ci_lo)
        hi = v if v is not None else float("nan")  # lower curve crosses later
    if ci_hi is not None:
        v = _diagonal_crossing(ps, ci_hi)
        lo = v if v is not None else float("nan")
    return p_star, lo, hi


def _diagonal_crossing(ps, ys):
    ps = np.asarray(ps, dtype=float)
    ys = np.asarray(ys, dtype=float)
    order = np.argsort(ps)
    ps, ys = ps[order], ys[order]
    for i in range(len(ps) - 1):
        f0, f1 = ys[i] - ps[i], ys[i + 1] - ps[i + 1]
        if f0 <= 0.0 and f1 > 0.0 and ys[i] > 0.0:
            x = _loglinear_diagonal(ps[i], ys[i], ps[i + 1], ys[i + 1])
            if x is not None and 0.0 < x < 0.5:
                return x
    return None


def _loglinear_diagonal(p0, y0, p1, y1):
    """Solve log y(x) = x on the log-log segment through (p0,y0), (p1,y1)."""
    if y0 <= 0.0 or y1 <= 0.0:
        return None
    lx0, lx1 = np.log(p0), np.log(p1)
    ly0, ly1 = np.log(y0), np.log(y1)
    s = (ly1 - ly0) / (lx1 - lx0)
    if s == 1.0:
        return None
    x = (ly0 - s * lx0) / (1.0 - s)
    if not (min(lx0, lx1) - 1e-12 <= x <= max(lx0, lx1) + 1e-12):
        return None
    return float(np.exp(x))


def curve_crossing(ps, ys_a, ys_b):
    """Crossing point of two logical-error curves on a shared p grid."""
    ps = np.asarray(ps, dtype=float)
    d = np.log(np.asarray(ys_a, dtype=float)) - np.log(np.asarray(ys_b, dtype=float))
    for i in range(len(ps) - 1):
        if d[i] == 0.0:
            return float(ps[i])
        if d[i] < 0.0 <= d[i + 1] or d[i] > 0.0 >= d[i + 1]:
            lx0, lx1 = np.log(ps[i]), np.log(ps[i + 1])
            t = d[i] / (d[i] - d[i + 1])
            return float(np.exp(lx0 + t * (lx1 - lx0)))
    return None


@dataclass
class FitResult:
    t_inf: float
    nu: float
    a: float
    residuals: np.ndarray
    fixed_nu: bool = False

    def to_dict(self):
        return {"t_inf": self.t_inf, "nu": self.nu, "a": self.a,
                "residuals": [float(r) for r in self.residuals],
                "fixed_nu": self.fixed_nu}


def fit_threshold(Ls, ts, fix_nu: float | None = None) -> FitResult:
    """Least-squares fit of t(L) = a * L^(-1/nu) + t_inf.

    With fewer than three points the scaling exponent is fixed (default 1.6)
    and the result flagged.  Initialization is deterministic.
    """
    Ls = np.asarray(Ls, dtype=float)
    ts = np.asarray(ts, dtype=float)
    if Ls.size != ts.size or Ls.size < 2:
        raise ValueError("need at least two (L, t) points")
    if Ls.size < 3 and fix_nu is None:
        fix_nu = 1.6
    if fix_nu is not None:
        x = Ls ** (-1.0 / fix_nu)
        A = np.stack([x, np.ones_like(x)], axis=1)
        coef, *_ = np.linalg.lstsq(A, ts, rcond=None)
        resid = ts - A @ coef
        return FitResult(t_inf=float(coef[1]), nu=float(fix_nu), a=float(coef[0]),
                         residuals=resid, fixed_nu=True)

    t0 = float(ts.min())
    a0 = float((ts[0] - t0) * Ls[0]) or 1e-3
    x0 = np.array([a0, 1.0, t0])

    def model(theta):
        a, nu, t_inf = theta
        return a * Ls ** (-1.0 / nu) + t_inf - ts

    sol = least_squares(model, x0, bounds=([-np.inf, 0.05, 0.0], [np.inf, 20.0, 0.5]),
                        max_nfev=10000)
    if not sol.success:
        raise RuntimeError(f"scaling fit did not converge: {sol.message}")
    a, nu, t_inf = sol.x
    return FitResult(t_inf=float(t_inf), nu=float(nu), a=float(a),
                     residuals=sol.fun, fixed_nu=False)


# ---------------------------------------------------------------------------
# convergence diagnostics

def _converge_chunk(args):
    m, p, seed, point_index, start, count, max_rounds = args
    lattice = build_lattice(m)
    config = DecoderConfig(split_rounds=max_rounds, fixed_split_rounds=True)
    change_hist = np.zeros(max_rounds, dtype=np.int64)
    conv_hist = np.zeros(max_rounds + 1, dtype=np.int64)
    used = 0
    for t in range(start, start + count):
        rng = trial_rng(seed, point_index, t)
        error = (rng.random(lattice.n_qubits) < p).astype(np.uint8)
        syndrome = lattice.syndrome_of(error)
        if not syndrome.any():
            conv_hist[0] += 1
            used += 1
            continue
        result = decode(lattice, syndrome, p, config, error=error)
        top = result.diagnostics[0]
        counts = top.split_changes
        change_hist[: len(counts)] += counts
        conv_hist[min(top.converged_round, max_rounds)] += 1
        used += 1
    return start, change_hist, conv_hist, used


def convergence_report(m: int, p: float, trials: int, seed: int = 0,
                       max_rounds: int = 15, workers: int | None = None):
    """Top-level splitting diagnostics: per-round mean change fraction per
    splitting pair, and the cumulative fraction of converged cases."""
    lattice = build_lattice(m)
    n_pairs = lattice.n_pairs
    tasks = [(m, float(p), seed, 0, s, min(CHUNK, trials - s), max_rounds)
             for s in range(0, trials, CHUNK)]
    if workers is not None:
        nworkers = max(1, workers)
    else:
        env = os.environ.get(WORKERS_ENV)
        nworkers = max(1, int(env)) if env else max(1, os.cpu_count() or 1)
    if nworkers > 1:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            outs = list(pool.map(_converge_chunk, tasks, chunksize=1))
    else:
        outs = [_converge_chunk(t) for t in tasks]
    outs.sort(key=lambda o: o[0])
    change = np.sum([o[1] for o in outs], axis=0)
    conv = np.sum([o[2] for o in outs], axis=0)
    total = sum(o[3] for o in outs)
    change_fraction = change / (total * n_pairs)
    cdf = np.cumsum(conv) / total
    return {
        "m": m, "p": p, "trials": total, "n_pairs": n_pairs,
        "rounds": list(range(1, max_rounds + 1)),
        "change_fraction": change_fraction.tolist(),
        "cdf": cdf[1:].tolist(),   # cdf[r] = fraction converged by round r
        "cdf_round0": float(cdf[0]),
    }


def write_convergence_csv(report: dict, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "p", "round", "change_fraction", "cdf"])
        for r, cf, cd in zip(report["rounds"], report["change_fraction"], report["cdf"]):
            writer.writerow([report["m"], f"{report['p']:.10g}", r,
                             f"{cf:.10g}", f"{cd:.10g}"])
