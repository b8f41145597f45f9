"""Command line entry point.

Exit codes: 0 success, 2 verification still failing after all retries,
3 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .bench import CSV_FIELDS, run_bench
from .expr import Det, ExpressionError, PrecisionBudgetExceeded, from_json, loads, parse_infix
from .interp import Grid, InterpolationFailed, ShapeError, format_poly, interpolate_exact
from .rational import RationalParseError, RecoveryError, format_rational, parse_rational, recover_signed
from .symcomb import SingularSystemError

EXIT_OK = 0
EXIT_UNVERIFIED = 2
EXIT_INPUT = 3

REPORT_MARKER = "# report"


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"expected comma-separated integers, got {text!r}") from None


def _parse_nodes(text: str, nvars: int) -> list[list]:
    groups = [g for g in text.split(";")]
    if len(groups) != nvars:
        raise InputError(f"--nodes has {len(groups)} groups for {nvars} variables (separate with ';')")
    return [[parse_rational(t) for t in g.split(",") if t.strip()] for g in groups]


def _vars(text: str) -> list[str]:
    names = [v.strip() for v in text.split(",") if v.strip()]
    if not names:
        raise InputError("--vars must name at least one variable")
    return names


def _load_expr(args):
    if args.expr is not None:
        return parse_infix(args.expr)
    if args.file is None:
        raise InputError("give an expression file or --expr")
    try:
        text = Path(args.file).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {args.file}: {exc}") from exc
    return loads(text)


def _load_matrix(path: str) -> Det:
    try:
        obj = json.loads(Path(path).read_text(), parse_float=str)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {path}: {exc}") from exc
    rows = obj.get("rows") if isinstance(obj, dict) else obj
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise InputError("matrix file must hold a list of rows (or {\"rows\": [...]})")

    def entry(e):
        if isinstance(e, str):
            return parse_infix(e)
        if isinstance(e, int) and not isinstance(e, bool):
            return parse_infix(str(e))
        return from_json(e)

    return Det(tuple(tuple(entry(e) for e in r) for r in rows))


def _print_document(poly, report, stream) -> None:
    print(format_poly(poly) if poly is not None else "unrecovered", file=stream)
    print(REPORT_MARKER, file=stream)
    print(json.dumps(report.to_dict(), indent=2), file=stream)


def _run_pipeline(expr, args) -> int:
    variables = _vars(args.vars)
    degrees = _int_list(args.deg) if args.deg else None
    grid = Grid.create(variables, _parse_nodes(args.nodes, len(variables))) if args.nodes else None
    try:
        poly, report = interpolate_exact(
            expr, variables, degrees=degrees, N=args.den_bound, grid=grid,
            retry_limit=args.retries, precision_cap=args.max_precision_bits, workers=args.workers)
    except InterpolationFailed as exc:
        _print_document(None, exc.report, sys.stdout)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNVERIFIED
    _print_document(poly, report, sys.stdout)
    return EXIT_OK


def cmd_recover(args) -> int:
    value = parse_rational(args.value)
    print(format_rational(recover_signed(value, args.den_bound)))
    return EXIT_OK


def cmd_interp(args) -> int:
    return _run_pipeline(_load_expr(args), args)


def cmd_detpoly(args) -> int:
    return _run_pipeline(_load_matrix(args.file), args)


def cmd_bench(args) -> int:
    sizes = _int_list(args.sizes)
    if not sizes or any(s < 1 for s in sizes):
        raise InputError("--sizes must be positive integers")
    writer = csv.DictWriter(sys.stdout, fieldnames=CSV_FIELDS)
    writer.writeheader()
    for row in run_bench(sizes, args.vars, args.trials, compare_exact=args.compare_exact,
                         seed=args.seed, degree=args.entry_degree, max_den=args.max_den,
                         precision_cap=args.max_precision_bits, workers=args.workers):
        writer.writerow(row.as_csv())
        sys.stdout.flush()
    return EXIT_OK


def _pipeline_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--vars", required=True, help="comma-separated variable order, e.g. x,y")
    p.add_argument("--deg", help="degree bound per variable, e.g. 3,3 (default: estimated)")
    p.add_argument("--den-bound", type=int, help="coefficient denominator bound N (default: estimated)")
    p.add_argument("--nodes", help="nodes per variable, groups separated by ';', e.g. '0.1,0.5;0.2,0.8'")
    p.add_argument("--retries", type=int, default=3, help="verification retries (default 3)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="exactinterp", description="Exact rational polynomials from approximate evaluation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--max-precision-bits", type=int, default=None,
                        help="cap on working precision (default: $EXACTINTERP_MAX_PRECISION_BITS or 16384)")
    parser.add_argument("--workers", type=int, default=None, help="processes for grid evaluation")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("recover", help="recover a fraction from a decimal approximation")
    p.add_argument("--value", required=True)
    p.add_argument("--den-bound", type=int, required=True)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("interp", help="recover the exact polynomial behind an expression")
    p.add_argument("file", nargs="?", help="JSON expression file")
    p.add_argument("-e", "--expr", help="infix expression instead of a file, e.g. 'x^2*y - 1/3'")
    _pipeline_options(p)
    p.set_defaults(func=cmd_interp)

    p = sub.add_parser("detpoly", help="determinant of a matrix of polynomial entries")
    p.add_argument("file", help="JSON matrix: list of rows of expression nodes or infix strings")
    _pipeline_options(p)
    p.set_defaults(func=cmd_detpoly)

    p = sub.add_parser("bench", help="approximate path vs exact interpolation on random determinants")
    p.add_argument("--sizes", default="1,2,3")
    p.add_argument("--vars", type=int, default=3)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--compare-exact", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--entry-degree", type=int, default=1)
    p.add_argument("--max-den", type=int, default=1, help="largest denominator in entry coefficients")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, RationalParseError, RecoveryError, ExpressionError, ShapeError,
            SingularSystemError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PrecisionBudgetExceeded as exc:
        print(f"error: precision cap reached ({exc}); raise --max-precision-bits", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
