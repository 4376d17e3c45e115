"""Command-line driver: ``qpenta verify`` and ``qpenta export``."""

from __future__ import annotations

import argparse
import sys

from .cocycles import make_cocycle
from .export import export_object
from .groups import parse_backend
from .report import emit_report
from .suites import DEFAULT_TOL_3LEG, SUITES, SuiteConfig, SuiteConfigError, run_suites


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qpenta", description="Check dual 2-cocycle and pentagon identities.")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--backend", required=True, help="e.g. finite-affine:p=5, finite-product-affine:p=3, real-affine")
    v.add_argument("--cocycle", default="trivial",
                   help="trivial | coboundary:u=<dlog|dlogsq|random>[:seed=n] | heisenberg[:...] | table:<csv>")
    v.add_argument("--suites", default="all", help=f"comma list or 'all'; known: {', '.join(sorted(SUITES))}")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=float, default=None,
                   help="tolerance for single-step checks (default 1e-12 finite, 1e-9 real)")
    v.add_argument("--tol3", type=float, default=DEFAULT_TOL_3LEG, help="tolerance for composed three-leg checks")
    v.add_argument("--samples", type=int, default=None,
                   help="sample count (0 = exhaustive on finite backends; default 10000 on real backends)")
    v.add_argument("--theta", default=None, help="Theta table CSV replacing Theta_omega in theta-pentagon")
    v.add_argument("--report", default=None, help="write reports to this path")
    v.add_argument("--format", choices=["json", "csv"], default="json")
    v.add_argument("--jobs", type=int, default=1, help="worker processes")
    v.add_argument("--timing", action="store_true",
                   help="record wall-clock elapsed_ms (reports are then no longer byte-reproducible)")
    v.add_argument("--quiet", action="store_true")

    e = sub.add_parser("export", help="write CSV dumps of operators, kernels and tables")
    e.add_argument("--backend", default="finite-affine:p=5")
    e.add_argument("--cocycle", default="trivial")
    e.add_argument("--object", required=True,
                   help="operator:<op> | heatmap:<op> | kernel:q=..,xi=.. | theta-table | cocycle-table")
    e.add_argument("--out", required=True)
    return ap


def cmd_verify(args) -> int:
    config = SuiteConfig(backend=args.backend, cocycle=args.cocycle, suites=[args.suites], seed=args.seed,
                         tol=args.tol, tol3=args.tol3, samples=args.samples, theta_table=args.theta,
                         timing=args.timing)
    try:
        reports = run_suites(config, jobs=args.jobs)
    except (SuiteConfigError, ValueError, OSError) as exc:
        print(f"qpenta: error: {exc}", file=sys.stderr)
        return 2
    if not args.quiet:
        for r in reports:
            print(r.summary())
    if args.report:
        emit_report(reports, args.report, args.format)
    return 0 if all(r.passed for r in reports) else 1


def cmd_export(args) -> int:
    try:
        b = parse_backend(args.backend)
        om = make_cocycle(args.cocycle, b)
        msg = export_object(b, om, args.object, args.out)
    except (ValueError, TypeError, KeyError, OSError) as exc:
        print(f"qpenta: error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}: {msg}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return cmd_verify(args)
    return cmd_export(args)


if __name__ == "__main__":
    raise SystemExit(main())
