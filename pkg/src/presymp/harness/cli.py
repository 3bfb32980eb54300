"""Command line entry point: check, converge, list, convert."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..elliptic import SolverConfig
from ..fieldio import FieldFormatError, convert
from .checks import REGISTRY, CheckConfig, list_checks, run_check
from .report import reports_to_csv, reports_to_json


def _grids(s: str) -> tuple:
    try:
        return tuple(int(x) for x in s.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid list {s!r}")


def _add_run_args(p):
    p.add_argument("names", nargs="+", help="check names, or 'all'")
    p.add_argument("--grids", type=_grids, default=None, help="comma-separated counts, e.g. 8,16,32")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--fd-step", type=float, default=1e-3)
    p.add_argument("--tol", type=float, default=None,
                   help="tolerance for exact-class checks (default: per check)")
    p.add_argument("--solver-tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=20_000)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="presymp", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)
    _add_run_args(sub.add_parser("check", help="run named checks on their default or given grids"))
    _add_run_args(sub.add_parser("converge", help="run convergence studies (grids default 8,16,32)"))
    sub.add_parser("list", help="list registered checks")
    c = sub.add_parser("convert", help="convert a field file between binary and JSON")
    c.add_argument("src")
    c.add_argument("dst")
    c.add_argument("--to", choices=("json", "binary"), default=None)
    return ap


def _configs(args, converge: bool):
    names = list(REGISTRY) if args.names == ["all"] else args.names
    unknown = [n for n in names if n not in REGISTRY]
    if unknown:
        raise ValueError(f"unknown check(s): {', '.join(unknown)}")
    grids = args.grids
    if converge and grids is None:
        grids = (8, 16, 32)
    solver = SolverConfig(tol=args.solver_tol, max_iter=args.max_iter)
    return [CheckConfig(name=n, grids=grids, n=args.n, seed=args.seed, fd_step=args.fd_step,
                        solver=solver, tol=args.tol, out=args.out) for n in names]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.cmd == "list":
        for c in list_checks():
            print(f"{c['name']:26s} {c['class']:10s} {c['description']}")
            print(f"{'':26s} {'':10s} anchor: {c['anchor']}")
        return 0
    if args.cmd == "convert":
        try:
            convert(args.src, args.dst, args.to)
        except (OSError, FieldFormatError, ValueError) as exc:
            print(f"convert failed: {exc}", file=sys.stderr)
            return 2
        return 0
    try:
        cfgs = _configs(args, args.cmd == "converge")
    except ValueError as exc:
        print(f"bad configuration: {exc}", file=sys.stderr)
        return 2
    reports = []
    for cfg in cfgs:
        rep = run_check(cfg)
        print(rep.summary(), file=sys.stderr)
        reports.append(rep)
    text = reports_to_csv(reports) if args.format == "csv" else (
        reports[0].to_json() if len(reports) == 1 else reports_to_json(reports))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return 0 if all(r.passed for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
