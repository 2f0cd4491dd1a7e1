#!/usr/bin/env python3
"""
hermq - command-line front end

Subcommands:
  witt       Witt group of a ring and flavor
  gw         Grothendieck-Witt group
  classify   invariant table row of a form
  normalize  surgery of a 0-dimensional Poincare complex down to a form
  qcat       hermitian (or split-exact) Q-construction and its components
  check      validate a form, chain complex or quadratic complex
"""

import argparse
import csv
import json
import logging
import os
import sys
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import ValidationError as PydanticValidationError
from rich.console import Console
from rich.table import Table

import config
from errors import HermqError, UnsupportedError, ValidationError
from exactalg import RingSpec
from formcore import FormParameter, UnimodularForm, discriminant_class, parity, signature
from qcat import build_hermitian_Q, export_category, quillen_Q
from qsurgery import QuadraticComplex, check_poincare, normalize_to_heart
from schemas import (
    CheckReport,
    GroupReport,
    InvariantRow,
    NormalizeReport,
    load_document,
)
from witt import gw0, witt_group

logger = logging.getLogger("hermq")
console = Console()
_handlers: List[logging.Handler] = []

FLAVORS = ("symmetric", "quadratic", "even")


def setup_logging(no_log: bool = False, verbose: bool = False):
    """
    Set up logging with a timestamped file handler and an error-only console handler
    """
    root = logging.getLogger()
    root.setLevel(logging.DEBUG)
    for handler in _handlers:
        root.removeHandler(handler)
        handler.close()
    _handlers.clear()

    log_file = None
    if not no_log:
        log_dir = Path(config.LOG_DIR)
        log_dir.mkdir(parents=True, exist_ok=True)
        timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
        log_file = log_dir / f'hermq_{timestamp}.log'
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        ))
        _handlers.append(file_handler)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.INFO if verbose else logging.ERROR)
    console_handler.setFormatter(logging.Formatter('%(levelname)s: %(message)s'))
    _handlers.append(console_handler)
    for handler in _handlers:
        root.addHandler(handler)
    return logger, log_file


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hermq",
        description="Hermitian forms, Witt groups, algebraic surgery and Q-constructions.",
        epilog="Rings: Z, F<p>, Z/<n>. Exit status: 0 ok, 2 invalid input or unsupported, 3 cap or obstruction.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out', help='Write the JSON report to this path')
    common.add_argument('--seed', type=int, default=config.DEFAULT_SEED, help='Seed for randomized steps')
    common.add_argument('--jobs', type=int, default=config.DEFAULT_JOBS, help='Worker processes (default: 1)')
    common.add_argument('--verbose', action='store_true', help='Echo progress to stderr')
    common.add_argument('--no-log', action='store_true', help='Disable logging to file')

    ring = argparse.ArgumentParser(add_help=False)
    ring.add_argument('--ring', default='Z', help='Ground ring (default: Z)')
    ring.add_argument('--flavor', default='symmetric', choices=FLAVORS, help='Form parameter flavor')
    ring.add_argument('--epsilon', type=int, default=1, choices=[1, -1], help='Symmetry sign')
    ring.add_argument('--cap', type=int, help='Rank cap for enumerations')

    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('witt', parents=[common, ring], help='Witt group')
    sub.add_parser('gw', parents=[common, ring], help='Grothendieck-Witt group')

    classify = sub.add_parser('classify', parents=[common], help='Invariants of a form')
    classify.add_argument('--in', dest='input', required=True, help='Form JSON')
    classify.add_argument('--csv', help='Append the invariant row to this CSV file')
    classify.add_argument('--cap', type=int, help='Rank cap for the Witt class over finite fields')

    normalize = sub.add_parser('normalize', parents=[common], help='Surgery down to a unimodular form')
    normalize.add_argument('--in', dest='input', required=True, help='Quadratic complex (or form) JSON')
    normalize.add_argument('--cap', type=int, help='Surgery step cap')
    normalize.add_argument('--steps-out', help='Step log path (JSON lines)')
    normalize.add_argument('--csv', help='Append the invariant row to this CSV file')

    qcat = sub.add_parser('qcat', parents=[common, ring], help='Q-construction over a prime field')
    qcat.add_argument('--components', action='store_true', help='Print the component partition')
    qcat.add_argument('--dot', help='Write the component quiver as DOT')
    qcat.add_argument('--split-exact', action='store_true', help='Q-construction of free modules instead of forms')
    qcat.add_argument('--skip-laws', action='store_true', help='Do not verify the category laws')

    check = sub.add_parser('check', parents=[common], help='Validate an input document')
    check.add_argument('--in', dest='input', required=True, help='Form, complex or quadratic complex JSON')
    return parser


def parameter_from_args(args) -> FormParameter:
    ring = RingSpec.parse(args.ring)
    return FormParameter(ring, args.epsilon, args.flavor)


def write_json(path: Optional[str], payload: Dict) -> None:
    if not path:
        return
    with open(path, 'w') as f:
        json.dump(payload, f, indent=2, sort_keys=True)
    logger.info(f"Wrote report: {path}")


def append_csv(path: Optional[str], row: InvariantRow) -> None:
    if not path:
        return
    new_file = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, 'a', newline='') as f:
        writer = csv.writer(f)
        if new_file:
            writer.writerow(InvariantRow.csv_header())
        writer.writerow(row.csv_row())
    logger.info(f"Wrote CSV row: {path}")


def _format_coords(coords) -> str:
    return ",".join(str(c) for c in coords) if coords else "0"


def witt_class(F: UnimodularForm, cap: Optional[int] = None) -> str:
    """Coordinates of [F] in the computed Witt group"""
    if F.rank == 0:
        return "0"
    if F.ring.is_integers:
        result = witt_group(F.param, generators=[("input", F)])
    else:
        limit = config.ENUM_RANK_CAP
        rank_cap = cap if cap is not None else min(max(F.rank, 4), limit)
        result = witt_group(F.param, rank_cap, generators=[("input", F)])
    return _format_coords(dict(result.images)["input"])


def invariant_row(F: UnimodularForm, cap: Optional[int] = None) -> InvariantRow:
    row = InvariantRow(rank=F.rank)
    if F.ring.is_integers:
        if F.param.epsilon == 1:
            row.signature = signature(F)
            row.parity = parity(F)
        row.det_class = str(F.gram.determinant()) if F.rank else "1"
    elif F.ring.is_field:
        row.det_class = discriminant_class(F)
    else:
        raise UnsupportedError(f"classify supports Z and prime fields, got {F.ring.name}")
    row.witt_class = witt_class(F, cap)
    return row


def print_invariants(row: InvariantRow, title: str) -> None:
    table = Table(title=title)
    for name in InvariantRow.csv_header():
        table.add_column(name)
    table.add_row(*row.csv_row())
    console.print(table)


# Commands


def cmd_group(args, which: str) -> int:
    param = parameter_from_args(args)
    logger.info(f"Computing {which} for {param.name}")
    if which == "witt":
        result = witt_group(param, args.cap, jobs=args.jobs)
    else:
        result = gw0(param, rank_cap=args.cap, jobs=args.jobs)
    description = result.describe()
    print(f"{which.upper()}({param.name}) = {description}")
    if result.images and args.verbose:
        table = Table(title="Generator images")
        table.add_column("label")
        table.add_column("coordinates")
        for label, coords in result.images:
            table.add_row(label, _format_coords(coords))
        console.print(table)
    report = GroupReport(command=which, ring=param.ring.name, flavor=param.flavor,
                         epsilon=param.epsilon, description=description, group=result.to_json())
    write_json(args.out, report.model_dump())
    logger.info(f"Result: {description}")
    return 0


def cmd_classify(args) -> int:
    kind, F = load_document(args.input)
    if kind != "form":
        raise ValidationError(f"classify needs a form, got a {kind}")
    row = invariant_row(F, args.cap)
    print_invariants(row, f"{F.param.name} form of rank {F.rank}")
    append_csv(args.csv, row)
    write_json(args.out, row.model_dump())
    return 0


def _default_steps_path(log_file) -> Optional[str]:
    if log_file is None:
        return None
    return str(Path(log_file).with_name(Path(log_file).stem + "_steps.jsonl"))


def cmd_normalize(args, log_file) -> int:
    kind, obj = load_document(args.input)
    if kind == "form":
        X = QuadraticComplex.from_form(obj)
    elif kind == "quadratic_complex":
        X = obj
    else:
        raise ValidationError(f"normalize needs a quadratic complex or a form, got a {kind}")

    def on_step(record: Dict) -> None:
        logger.info(f"Surgery step {record['step']}: degree {record['k']}, rank {record['rank_T']}")
        if args.verbose:
            print(f"step {record['step']}: killed H_{record['k']} with rank {record['rank_T']}", file=sys.stderr)

    result = normalize_to_heart(X, step_cap=args.cap, on_step=on_step)
    steps_path = args.steps_out or _default_steps_path(log_file)
    if steps_path:
        with open(steps_path, 'w') as f:
            f.write(result.steps_jsonl() + ("\n" if result.steps else ""))
        logger.info(f"Step log: {steps_path}")
    F = result.form
    print(f"Recovered form: rank {F.rank} over {F.param.name}")
    print(f"gram = {F.gram.tolist()}")
    print(f"q = {list(F.qvals)}")
    row = invariant_row(F) if (F.ring.is_integers or F.ring.is_field) else InvariantRow(rank=F.rank)
    print_invariants(row, f"{len(result.steps)} surgery steps")
    append_csv(args.csv, row)
    report = NormalizeReport(form=F.to_json(), invariants=row, steps=len(result.steps),
                             cobordisms=len(result.cobordisms), step_log=steps_path)
    write_json(args.out, report.model_dump())
    return 0


def cmd_qcat(args) -> int:
    ring = RingSpec.parse(args.ring)
    if args.split_exact:
        C = quillen_Q(ring, args.cap, jobs=args.jobs, check_laws=not args.skip_laws, seed=args.seed)
    else:
        C = build_hermitian_Q(parameter_from_args(args), args.cap, jobs=args.jobs,
                              check_laws=not args.skip_laws, seed=args.seed)
    parts = C.components()
    table = Table(title=C.name)
    table.add_column("object")
    table.add_column("rank")
    table.add_column("component")
    table.add_column("|End|")
    where = {label: n for n, part in enumerate(parts) for label in part}
    for a, label in enumerate(C.labels):
        table.add_row(label, str(C.ranks[a]), str(where[label]), str(len(C.hom(a, a))))
    console.print(table)
    print(f"{len(C.labels)} objects, {C.morphism_count()} morphisms, {len(parts)} components")
    if args.components:
        for n, part in enumerate(parts):
            print(f"component {n}: {{{', '.join(part)}}}")
    export_category(C, args.out, args.dot)
    return 0


def cmd_check(args) -> int:
    kind, obj = load_document(args.input)
    details: Dict = {}
    ok = True
    if kind == "form":
        details = {"rank": obj.rank, "parameter": obj.param.name}
    elif kind == "complex":
        details = {"lo": obj.lo, "hi": obj.hi, "dims": list(obj.dims)}
    elif kind == "quadratic_complex":
        poincare, witness = check_poincare(obj)
        details = {"n": obj.n, "dims": list(obj.C.dims), "poincare": poincare,
                   "cone_homology": {str(k): v for k, v in witness.items()}}
        ok = poincare
    else:
        details = {"shape": list(obj.shape)}
    report = CheckReport(kind=kind, ok=ok, details=details)
    print(f"{'OK' if ok else 'NOT POINCARE'}: {kind} {json.dumps(details, sort_keys=True)}")
    write_json(args.out, report.model_dump())
    return 0 if ok else 2


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _, log_file = setup_logging(args.no_log, args.verbose)

    logger.info("=" * 60)
    logger.info(f"hermq {args.command} started")
    logger.info(f"Log file: {log_file}")
    logger.info(f"Command line arguments: {vars(args)}")
    try:
        if args.command in ("witt", "gw"):
            status = cmd_group(args, args.command)
        elif args.command == "classify":
            status = cmd_classify(args)
        elif args.command == "normalize":
            status = cmd_normalize(args, log_file)
        elif args.command == "qcat":
            status = cmd_qcat(args)
        else:
            status = cmd_check(args)
    except HermqError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"Error: {e}", file=sys.stderr)
        status = e.exit_status
    except PydanticValidationError as e:
        logger.error(f"Invalid input: {e}")
        print(f"Error: {e}", file=sys.stderr)
        status = 2
    logger.info(f"hermq {args.command} finished with status {status}")
    logger.info("=" * 60)
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
