"""
Command line for subtree distance reconstruction.

Usage:
    subtree-distance reconstruct MATRIX [--out json|dot] [--output FILE] [--report-path FILE]
    subtree-distance check MATRIX [--method ext4pc|pipeline|both]
    subtree-distance gen --seed S --vertices V --objects N --out-prefix PREFIX
    subtree-distance verify MATRIX REPRESENTATION [--no-minimality]
    subtree-distance bench [--sizes 500,1000,2000] [--seeds 3] [--csv FILE]

Exit codes: 0 success, 1 usage or I/O error, 2 rejected or failed verification,
3 the two recognition methods disagree.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional

import pydantic

from subtree_distance.config import settings
from subtree_distance.exceptions import (
    ConfigurationError,
    InfeasibleParameters,
    InvalidRange,
    MissingObject,
    ParseError,
    SizeOutOfRange,
    UnknownVertex,
    ValidationError,
)
from subtree_distance.schemas.instance import WeightRange
from subtree_distance.schemas.matrix import Tolerance
from subtree_distance.services.bench import format_bench_csv, run_bench, write_bench_csv
from subtree_distance.services.conditions import check_extended_four_point
from subtree_distance.services.dissim import read_matrix, serialize_matrix
from subtree_distance.services.gen import generate_instance
from subtree_distance.services.reconstruct import reconstruct_subtree_distance
from subtree_distance.services.verify import audit_minimality, verify_distances
from subtree_distance.services.wtree import dumps_representation, loads_representation, to_dot

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_REJECTED = 2
EXIT_DISAGREEMENT = 3

FORMAT_SUFFIX = {"csv": ".csv", "tsv": ".tsv", "phylip-square": ".phy"}

# Bad input or parameters; reported with exit code 1
INPUT_ERRORS = (
    OSError,
    ParseError,
    ValidationError,
    ConfigurationError,
    InvalidRange,
    SizeOutOfRange,
    InfeasibleParameters,
    UnknownVertex,
    UnicodeDecodeError,
    pydantic.ValidationError,
)


def _error(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _write_output(text: str, path: Optional[str]) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _tolerance(args: argparse.Namespace) -> Tolerance:
    return settings.tolerance(args.tol)


def cmd_reconstruct(args: argparse.Namespace) -> int:
    tol = _tolerance(args)
    d = read_matrix(args.matrix, args.format, tol)
    rep, report = reconstruct_subtree_distance(d, tol)

    report_json = report.model_dump_json(indent=2) + "\n"
    if args.report_path:
        Path(args.report_path).write_text(report_json, encoding="utf-8")

    if rep is None:
        _error(f"not a subtree distance (rejected at {report.stage})")
        if not args.report_path:
            sys.stdout.write(report_json)
        return EXIT_REJECTED

    text = to_dot(rep) if args.out == "dot" else dumps_representation(rep) + "\n"
    _write_output(text, args.output)
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    tol = _tolerance(args)
    d = read_matrix(args.matrix, args.format, tol)
    verdicts: dict[str, bool] = {}

    if args.method in ("ext4pc", "both"):
        violation = check_extended_four_point(d, tol.bind(d))
        verdicts["ext4pc"] = violation is None
        print("ext4pc: accept" if violation is None else f"ext4pc: reject ({violation.render()})")

    if args.method in ("pipeline", "both"):
        _, report = reconstruct_subtree_distance(d, tol)
        verdicts["pipeline"] = report.accepted
        print("pipeline: accept" if report.accepted else f"pipeline: reject at {report.stage}")

    if len(set(verdicts.values())) > 1:
        _error(f"recognition methods disagree: {verdicts}")
        return EXIT_DISAGREEMENT
    return EXIT_OK if all(verdicts.values()) else EXIT_REJECTED


def cmd_gen(args: argparse.Namespace) -> int:
    weights = WeightRange.parse(args.weights)
    d, rep = generate_instance(args.seed, args.vertices, args.objects, args.singleton_fraction, weights)

    prefix = Path(args.out_prefix)
    matrix_path = prefix.with_name(prefix.name + FORMAT_SUFFIX[args.format])
    rep_path = prefix.with_name(prefix.name + ".json")
    matrix_path.write_text(serialize_matrix(d, args.format), encoding="utf-8")
    rep_path.write_text(dumps_representation(rep) + "\n", encoding="utf-8")
    logger.info(f"Wrote {matrix_path} and {rep_path}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    tol = _tolerance(args)
    d = read_matrix(args.matrix, args.format, tol)
    rep = loads_representation(Path(args.representation).read_text(encoding="utf-8"))

    try:
        mismatches = verify_distances(rep, d, tol.bind(d))
    except MissingObject as e:
        _error(str(e))
        return EXIT_REJECTED
    for mismatch in mismatches:
        print(mismatch.render())

    defects = [] if args.no_minimality else audit_minimality(rep, tol.bind(d))
    for defect in defects:
        print(defect.render())

    if mismatches or defects:
        _error(f"{len(mismatches)} distance mismatches, {len(defects)} minimality defects")
        return EXIT_REJECTED
    print("ok")
    return EXIT_OK


def _parse_sizes(text: str) -> list[int]:
    try:
        sizes = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigurationError(f"Invalid size list {text!r}") from None
    if not sizes or min(sizes) < 2:
        raise ConfigurationError(f"Benchmark sizes must be integers >= 2, got {text!r}")
    return sizes


def cmd_bench(args: argparse.Namespace) -> int:
    sizes = _parse_sizes(args.sizes) if args.sizes else settings.bench_sizes
    seeds = args.seeds if args.seeds is not None else settings.bench_seeds
    fraction = args.nonleaf_fraction if args.nonleaf_fraction is not None else settings.bench_nonleaf_fraction
    rows = run_bench(sizes, seeds, fraction)
    if args.csv:
        write_bench_csv(rows, args.csv)
    else:
        sys.stdout.write(format_bench_csv(rows))
    return EXIT_OK


def _add_matrix_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("matrix", help="Dissimilarity matrix file")
    parser.add_argument(
        "--format",
        choices=["csv", "tsv", "phylip-square"],
        default=None,
        help="Matrix format (default: from the file suffix)",
    )
    parser.add_argument("--tol", default=None, help="Tolerance as REL or REL:ABS (overrides SUBTREE_TOL)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subtree-distance",
        description="Reconstruct and recognize subtree distances",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="INFO logging; twice for DEBUG")
    commands = parser.add_subparsers(dest="command", required=True)

    reconstruct = commands.add_parser("reconstruct", help="Minimal representation of a subtree distance")
    _add_matrix_options(reconstruct)
    reconstruct.add_argument("--out", choices=["json", "dot"], default="json", help="Representation format")
    reconstruct.add_argument("--output", default=None, help="Representation file (default: stdout)")
    reconstruct.add_argument("--report-path", default=None, help="Write the recognition report here")
    reconstruct.set_defaults(handler=cmd_reconstruct)

    check = commands.add_parser("check", help="Decide whether a matrix is a subtree distance")
    _add_matrix_options(check)
    check.add_argument("--method", choices=["ext4pc", "pipeline", "both"], default="both")
    check.set_defaults(handler=cmd_check)

    gen = commands.add_parser("gen", help="Random instance with its ground-truth representation")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--vertices", type=int, default=20)
    gen.add_argument("--objects", type=int, default=10)
    gen.add_argument("--singleton-fraction", type=float, default=0.5)
    gen.add_argument("--weights", default="1:10", help="lo:hi for uniform reals or int:hi for integers 1..hi")
    gen.add_argument("--out-prefix", required=True, help="Writes PREFIX.<format suffix> and PREFIX.json")
    gen.add_argument("--format", choices=["csv", "tsv", "phylip-square"], default=settings.default_format)
    gen.set_defaults(handler=cmd_gen)

    verify = commands.add_parser("verify", help="Check a representation against a matrix")
    _add_matrix_options(verify)
    verify.add_argument("representation", help="Representation JSON file")
    verify.add_argument("--no-minimality", action="store_true", help="Skip the minimality audit")
    verify.set_defaults(handler=cmd_verify)

    bench = commands.add_parser("bench", help="Time reconstruction against instance size")
    bench.add_argument("--sizes", default=None, help="Comma-separated object counts")
    bench.add_argument("--seeds", type=int, default=None, help="Instances per size")
    bench.add_argument("--nonleaf-fraction", type=float, default=None)
    bench.add_argument("--csv", default=None, help="Output CSV (default: stdout)")
    bench.set_defaults(handler=cmd_bench)

    return parser


def configure_logging(verbose: int) -> None:
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, settings.log_level.upper(), logging.WARNING)
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    configure_logging(args.verbose)

    try:
        return args.handler(args)
    except INPUT_ERRORS as e:
        _error(str(e))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
