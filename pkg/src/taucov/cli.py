"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data/domain error, 3 numerical failure.
"""

import argparse
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .basis import BasisSpec
from .dataio import load_fixture, parse_reference_csv, parse_wide_csv, resolve_label
from .errors import DataError, DomainError, TaucovError
from .fit import DomainMap, fit_all, fit_series
from .report import (EXP_DEMO_TOL, compare, exp_demo, render_comparison, render_exp_demo,
                     render_fit, render_matrices)
from .similarity import Method, similarity_matrix

EXIT_USAGE = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _precision(text):
    if text == "auto":
        return "auto"
    if text == "float64":
        return None
    try:
        digits = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'auto', 'float64' or a digit count") from None
    if digits < 16:
        raise argparse.ArgumentTypeError("digit count must be at least 16")
    return digits


def _add_input(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--fixture", choices=["table1"], help="use the bundled indicator table")
    src.add_argument("--input", metavar="PATH", help="wide-format CSV file, '-' for stdin")
    p.add_argument("--decimal-comma", action="store_true",
                   help="input uses ',' as decimal separator (';' or tab field separator)")


def _add_fit_options(p):
    p.add_argument("--basis", choices=["hermite", "monomial"], default="hermite")
    p.add_argument("--degree", type=int, help="highest basis index (default: points - 1)")
    p.add_argument("--least-squares", action="store_true",
                   help="allow degree < points - 1 via an orthogonal least-squares fit")
    p.add_argument("--precision", type=_precision, default="auto",
                   help="working precision: auto (default), digits, or float64")


def _add_output(p, formats, default):
    p.add_argument("--format", choices=formats, default=default)
    p.add_argument("-o", "--output", metavar="PATH", help="write to a file instead of stdout")
    p.add_argument("--no-banner", action="store_true", help="omit the timestamped header line")


def build_parser():
    parser = _Parser(prog="taucov", description="Hermite collocation fits and "
                     "tau-covariance / Pearson similarity for indicator series.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit one series and print its coefficients")
    _add_input(p)
    p.add_argument("--series", help="series label (exact or unique prefix)")
    _add_fit_options(p)
    _add_output(p, ["json", "csv", "md"], "json")

    p = sub.add_parser("matrix", help="pairwise similarity matrix")
    _add_input(p)
    p.add_argument("--method", choices=["tau", "pearson", "both"], default="tau")
    p.add_argument("--exclude-k0", action="store_true",
                   help="leave the constant-term coefficient out of tau sums")
    _add_fit_options(p)
    _add_output(p, ["md", "csv", "json"], "md")

    p = sub.add_parser("compare", help="diff a computed matrix against a reference table")
    _add_input(p)
    p.add_argument("--method", choices=["tau", "pearson"], default="tau")
    p.add_argument("--reference", required=True,
                   help="table2, table3, or a path to a reference matrix CSV")
    p.add_argument("--force", action="store_true", help="allow a method/reference mismatch")
    _add_fit_options(p)
    _add_output(p, ["md", "csv", "json"], "md")

    p = sub.add_parser("demo-exp", help="Pearson of 0..n-1 against exp(0..n-1)")
    p.add_argument("--points", type=int, default=10,
                   help="sequence length (default 10, the length that yields the printed value)")
    p.add_argument("--json", action="store_true")
    p.add_argument("-o", "--output", metavar="PATH")
    return parser


def _read_dataset(args):
    if args.fixture:
        return load_fixture(args.fixture)
    try:
        data = sys.stdin.buffer.read() if args.input == "-" else Path(args.input).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {args.input}: {exc.strerror}") from None
    return parse_wide_csv(data, decimal_comma=args.decimal_comma)


def _spec(args, points):
    degree = points - 1 if args.degree is None else args.degree
    return BasisSpec("hermite_physicists" if args.basis == "hermite" else "monomial", degree)


def _banner():
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return f"# taucov {__version__} generated {stamp}\n"


def _emit(args, text, fmt):
    if not getattr(args, "no_banner", True):
        if fmt == "json":
            sys.stderr.write(_banner())
        else:
            text = _banner() + text
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _listing_for(label):
    try:
        listings = load_fixture("listings")
    except FileNotFoundError:
        # an overridden fixture directory need not carry the printed listings
        return None
    for listing in listings:
        if listing.label == label:
            return listing
    return None


def cmd_fit(args):
    dataset = _read_dataset(args)
    if not dataset:
        raise DataError("input contains no series")
    labels = [s.label for s in dataset]
    if args.series is None:
        if len(dataset) != 1:
            raise DomainError(f"--series is required; available: {labels}")
        series = dataset[0]
    else:
        series = dataset[labels.index(resolve_label(args.series, labels))]
    domain = DomainMap.from_series(series)
    fit = fit_series(series, _spec(args, len(series)), domain, args.precision,
                     args.least_squares)
    listing = _listing_for(series.label) if args.fixture else None
    if listing is not None and len(listing.coefficients) != fit.basis.dimension:
        listing = None
    _emit(args, render_fit(fit, domain, args.format, listing), args.format)
    return 0


def _tau_matrices(dataset, args, variants):
    spec = _spec(args, len(dataset[0]))
    fits = fit_all(dataset, spec, None, args.precision, args.least_squares)
    return [similarity_matrix(dataset, Method.TAU, spec, k0_included=k0, fits=fits)
            for k0 in variants]


def cmd_matrix(args):
    dataset = _read_dataset(args)
    matrices = []
    if args.method in ("pearson", "both"):
        matrices.append(similarity_matrix(dataset, Method.PEARSON))
    if args.method in ("tau", "both"):
        matrices += _tau_matrices(dataset, args, [not args.exclude_k0])
    _emit(args, render_matrices(matrices, args.format), args.format)
    return 0


def _read_reference(args):
    if args.reference in ("table2", "table3"):
        return load_fixture(args.reference)
    try:
        data = Path(args.reference).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {args.reference}: {exc.strerror}") from None
    return parse_reference_csv(data, decimal_comma=args.decimal_comma)


def cmd_compare(args):
    reference = _read_reference(args)
    dataset = _read_dataset(args)
    if args.method == "pearson":
        computed = [similarity_matrix(dataset, Method.PEARSON)]
    else:
        computed = _tau_matrices(dataset, args, [True, False])
    claims = load_fixture("discussion") if reference.source.startswith("paper_") else ()
    report = compare(computed, reference, claims, force=args.force)
    _emit(args, render_comparison(report, args.format), args.format)
    return 0


def cmd_demo_exp(args):
    result = exp_demo(args.points)
    text = render_exp_demo(result, args.json)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0 if abs(result["delta"]) <= EXP_DEMO_TOL else 3


COMMANDS = {"fit": cmd_fit, "matrix": cmd_matrix, "compare": cmd_compare,
            "demo-exp": cmd_demo_exp}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except TaucovError as exc:
        print(f"taucov: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
