"""Command line front end.

    infoenv analyze  <scenario.yaml>  [--out DIR] [--tolerance REL]
    infoenv simulate <scenario.yaml>  [--out DIR] [--seed N]
    infoenv reproduce <target>        [--out DIR] [--tolerance REL]

Exit status: 0 on success, 2 for invalid input, 3 for numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import __version__
from ._accel import backend
from .errors import ConvergenceError
from .figures import REPRODUCE, Options, analyze
from .optimize import RTOL
from .scenario import ScenarioError, Table, load_document, parse_scenario

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3

log = logging.getLogger("infoenv")


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _rel(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("tolerance must lie in (0, 1)")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="infoenv", description=__doc__.splitlines()[0] or None)
    p.add_argument("--version", action="version", version=f"infoenv {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help="output directory for CSV files")
    common.add_argument("--seed", type=_u64, default=None, help="override the scenario seed")
    common.add_argument("--tolerance", type=_rel, default=RTOL,
                        help=f"relative optimizer tolerance (default {RTOL:g})")
    common.add_argument("-q", "--quiet", action="store_true", help="suppress the summary")
    sub = p.add_subparsers(dest="verb", required=True)
    a = sub.add_parser("analyze", parents=[common], help="run the analysis of a scenario file")
    a.add_argument("scenario", type=Path)
    s = sub.add_parser("simulate", parents=[common],
                       help="simulate a scenario and check its bounds")
    s.add_argument("scenario", type=Path)
    r = sub.add_parser("reproduce", parents=[common], help="reproduce a figure or table")
    r.add_argument("target", choices=sorted(REPRODUCE))
    return p


def _numeric_failure(tables: list[Table]) -> list[str]:
    """Tables in which no bound column has a single finite value."""
    bad = []
    for t in tables:
        cols = [c for c in t.columns if c == "d" or c.startswith("d_")]
        if not cols or not t.rows:
            continue
        vals = [v for c in cols for v in t.column(c)]
        if not any(isinstance(v, float) and math.isfinite(v) for v in vals):
            bad.append(t.name)
    return bad


def _emit(tables: list[Table], out: Path | None, quiet: bool) -> None:
    for t in tables:
        if out is not None:
            path = t.write_csv(out)
            t.meta.setdefault("csv", str(path))
        if not quiet:
            print(t.summary())


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    opt = Options(rtol=args.tolerance, seed=args.seed)
    try:
        if args.verb == "reproduce":
            tables = REPRODUCE[args.target](opt)
        else:
            sc = parse_scenario(load_document(args.scenario))
            if args.verb == "simulate" and sc.analysis["kind"] != "simulate":
                raise ScenarioError("analysis.kind", "the simulate verb needs a simulate analysis")
            if args.verb == "analyze" and sc.analysis["kind"] == "simulate":
                log.info("analysis kind is simulate; running the simulation")
            out = args.out if args.out is not None else sc.output
            args.out = out
            tables = analyze(sc, opt, out_dir=out)
    except ScenarioError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConvergenceError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for t in tables:
        t.meta.setdefault("backend", backend())
        t.meta.setdefault("tolerance", opt.rtol)
    _emit(tables, args.out, args.quiet)
    bad = _numeric_failure(tables)
    if bad:
        print(f"numeric failure: every bound is infinite in {', '.join(bad)}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
