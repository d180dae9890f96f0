"""Command-line interface: sweep, threshold, converge, selftest."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np


def _parse_float_list(text):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _parse_int_list(text):
    return tuple(int(x) for x in text.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="colorcode-rg",
        description="Rescaling decoder and Monte Carlo harness for the "
                    "4.8.8 toric color code",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="Monte Carlo logical error rate sweep")
    sw.add_argument("--m-list", type=_parse_int_list, required=True,
                    help="comma separated rescaling levels, e.g. 1,2")
    sw.add_argument("--p-list", type=_parse_float_list, required=True,
                    help="comma separated physical error rates")
    sw.add_argument("--trials", type=int, required=True)
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--bp-rounds", type=int, default=2)
    sw.add_argument("--split-rounds", type=int, default=15)
    sw.add_argument("--mode", choices=["single", "full"], default="single")
    sw.add_argument("--out", required=True, help="output CSV path")
    sw.add_argument("--manifest", default=None,
                    help="run manifest JSON path (default: <out>.manifest.json)")

    th = sub.add_parser("threshold", help="pseudothresholds and scaling fit")
    th.add_argument("csv", nargs="+", help="sweep CSV files")
    th.add_argument("--fix-nu", type=float, default=None,
                    help="fix the scaling exponent instead of fitting it")
    th.add_argument("--out", default=None, help="write the fit JSON here")

    cv = sub.add_parser("converge", help="splitting convergence diagnostics")
    cv.add_argument("--m", type=int, required=True)
    cv.add_argument("--p", type=float, required=True)
    cv.add_argument("--trials", type=int, required=True)
    cv.add_argument("--seed", type=int, default=0)
    cv.add_argument("--rounds", type=int, default=15)
    cv.add_argument("--out", required=True, help="output CSV path")

    st = sub.add_parser("selftest", help="run the built-in invariant checks")
    st.add_argument("--trials", type=int, default=200)
    st.add_argument("--seed", type=int, default=7)
    return parser


def cmd_sweep(args) -> int:
    from .harness import SweepConfig, run_sweep

    manifest = args.manifest or (args.out + ".manifest.json")
    config = SweepConfig(
        m_list=tuple(args.m_list), p_list=tuple(args.p_list), trials=args.trials,
        seed=args.seed, bp_rounds=args.bp_rounds, split_rounds=args.split_rounds,
        mode=args.mode, out_csv=args.out, out_manifest=manifest,
    )
    result = run_sweep(config)
    for pt in result.points:
        print(f"m={pt.m} n={pt.n} p={pt.p:.6g} p_L={pt.p_L_avg:.6g} "
              f"[{pt.ci_lo:.6g}, {pt.ci_hi:.6g}] fail_any={pt.fail_any}/{pt.trials}")
    print(f"wrote {args.out}")
    return 0


def cmd_threshold(args) -> int:
    from .harness import fit_threshold, pseudothreshold, read_sweep_csv

    rows = []
    for path in args.csv:
        rows.extend(read_sweep_csv(path))
    by_m = {}
    for r in rows:
        by_m.setdefault(r["m"], []).append(r)

    pseudo = {}
    for m, pts in sorted(by_m.items()):
        pts.sort(key=lambda r: r["p"])
        ps = [r["p"] for r in pts]
        pls = [r["p_L_avg"] for r in pts]
        try:
            star, lo, hi = pseudothreshold(
                ps, pls, [r["ci_lo"] for r in pts], [r["ci_hi"] for r in pts])
        except ValueError as exc:
            print(f"m={m}: {exc}", file=sys.stderr)
            continue
        d = pts[0]["d"]
        pseudo[m] = {"d": d, "p_star": star, "ci_lo": lo, "ci_hi": hi}
        print(f"m={m} d={d}: pseudothreshold {star:.6g} [{lo:.6g}, {hi:.6g}]")

    out = {"pseudothresholds": pseudo}
    if len(pseudo) >= 2:
        Ls = [v["d"] for v in pseudo.values()]
        ts = [v["p_star"] for v in pseudo.values()]
        fit = fit_threshold(Ls, ts, fix_nu=args.fix_nu)
        out["fit"] = fit.to_dict()
        flag = " (fixed nu)" if fit.fixed_nu else ""
        print(f"fit: t_inf={fit.t_inf:.6g} nu={fit.nu:.4g} a={fit.a:.4g}{flag}")
    text = json.dumps(out, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def cmd_converge(args) -> int:
    from .harness import convergence_report, write_convergence_csv

    report = convergence_report(args.m, args.p, args.trials, seed=args.seed,
                                max_rounds=args.rounds)
    write_convergence_csv(report, args.out)
    for r, cf, cd in zip(report["rounds"], report["change_fraction"], report["cdf"]):
        print(f"round {r:2d}: change fraction {cf:.6f}  converged {cd:.4f}")
    print(f"wrote {args.out}")
    return 0


def cmd_selftest(args) -> int:
    from . import selftest

    ok = selftest.run(trials=args.trials, seed=args.seed)
    return 0 if ok else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    np.seterr(over="raise", invalid="raise")
    handlers = {
        "sweep": cmd_sweep,
        "threshold": cmd_threshold,
        "converge": cmd_converge,
        "selftest": cmd_selftest,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
