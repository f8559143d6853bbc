"""Command line interface.

Subcommands: gen-ses, gen-svm, run, verify, sweep.
Exit codes: 0 ok, 1 verify failed, 2 input error, 3 infeasible input,
4 internal width assertion.
"""
from __future__ import annotations

import argparse
import json
import sys

from .bench import (REPORT_FIELDS, format_report, run_file, sweep, sweep_csv,
                    verify_report)
from .config import RunConfig
from .instances import (SES_DISTS, InstanceFormatError, gen_ses_text,
                        gen_svm_text, load, save)
from .meta import WidthViolationError
from .svm import InfeasibleInputError


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=1e-4)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--cap-iterations", type=int, default=None)


def _config(args, problem: str = "") -> RunConfig:
    return RunConfig(problem=problem, eps=args.eps, delta=args.delta,
                     patience=args.patience, seed=args.seed,
                     threads=args.threads,
                     iteration_cap_override=args.cap_iterations)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="symcone")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g1 = sub.add_parser("gen-ses", help="generate a sphere instance file")
    g1.add_argument("--n", type=int, required=True)
    g1.add_argument("--d", type=int, required=True)
    g1.add_argument("--seed", type=int, default=0)
    g1.add_argument("--dist", choices=SES_DISTS, default="gaussian")
    g1.add_argument("--out", required=True)

    g2 = sub.add_parser("gen-svm", help="generate a two-cluster instance file")
    g2.add_argument("--n1", type=int, required=True)
    g2.add_argument("--n2", type=int, required=True)
    g2.add_argument("--d", type=int, required=True)
    g2.add_argument("--seed", type=int, default=0)
    g2.add_argument("--gap", type=float, default=1.0)
    g2.add_argument("--out", required=True)

    r = sub.add_parser("run", help="solve an instance and emit a report")
    r.add_argument("instance")
    _add_run_flags(r)
    r.add_argument("--out", default=None, help="report path (default stdout)")
    r.add_argument("--format", choices=("json", "csv"), default="json")

    v = sub.add_parser("verify", help="check a report against the baselines")
    v.add_argument("instance")
    v.add_argument("report")
    v.add_argument("--bound", type=float, default=0.01)
    v.add_argument("--eps-base", type=float, default=1e-3)
    v.add_argument("--gap-tol", type=float, default=1e-6)

    s = sub.add_parser("sweep", help="run a size/dimension grid to CSV")
    s.add_argument("--problem", choices=("ses", "svm"), required=True)
    s.add_argument("--sizes", required=True,
                   help="comma separated instance sizes")
    s.add_argument("--dims", required=True, help="comma separated dimensions")
    s.add_argument("--reps", type=int, default=1)
    s.add_argument("--gap", type=float, default=1.0)
    s.add_argument("--no-baseline", action="store_true")
    _add_run_flags(s)
    s.add_argument("--out", required=True)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "gen-ses":
            save(args.out, gen_ses_text(args.n, args.d, args.seed, args.dist))
            return 0
        if args.cmd == "gen-svm":
            save(args.out, gen_svm_text(args.n1, args.n2, args.d, args.seed,
                                        args.gap))
            return 0
        if args.cmd == "run":
            report = run_file(args.instance, _config(args))
            text = format_report(report, args.format)
            if args.out:
                save(args.out, text)
            else:
                sys.stdout.write(text)
            return 0
        if args.cmd == "verify":
            inst = load(args.instance)
            with open(args.report, "r", encoding="utf-8") as fh:
                report = json.load(fh)
            missing = [k for k in REPORT_FIELDS if k not in report]
            if missing:
                raise InstanceFormatError(f"report missing fields: {missing}")
            error, ok = verify_report(inst, report, bound=args.bound,
                                      eps_base=args.eps_base,
                                      gap_tol=args.gap_tol)
            print(f"error {error:.6g} bound {args.bound:g} "
                  f"{'PASS' if ok else 'FAIL'}")
            return 0 if ok else 1
        if args.cmd == "sweep":
            sizes = [int(x) for x in args.sizes.split(",") if x]
            dims = [int(x) for x in args.dims.split(",") if x]
            rows = sweep(args.problem, sizes, dims, args.reps,
                         _config(args, args.problem), gap=args.gap,
                         with_baseline=not args.no_baseline)
            save(args.out, sweep_csv(rows))
            return 0
        raise AssertionError(f"unhandled command {args.cmd}")
    except (InstanceFormatError, FileNotFoundError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleInputError as exc:
        print(f"infeasible input: {exc}", file=sys.stderr)
        return 3
    except WidthViolationError as exc:
        print(f"width assertion: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
