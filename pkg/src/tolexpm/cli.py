"""Command-line entry point: ``tolexpm {exp,table,bench,structure}``.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure,
3 method-data validation failure or table mismatch.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import backward_error as be
from .experiments import (BENCH_HEADER, STRUCTURE_HEADER, STRUCTURE_TOLS, ExperimentConfig,
                          bench_error_cost, normalized_error, structure_test, to_csv)
from .linalg import NonFiniteError, SingularMatrixError
from .methods import (DataFileError, ExpmMode, build_method_data, dumps, read_method_data,
                      shipped_data_path)
from .mmio import MatrixFileError, format_matrix, read_matrix
from .reference import reference_expm
from .selector import expm

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_DATA = 0, 1, 2, 3
TABLE_RTOL = 1e-8


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0 or not np.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tolexpm", description="Tolerance-adaptive matrix exponential.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    modes = [m.value for m in ExpmMode]

    e = sub.add_parser("exp", help="exponentiate a Matrix Market array file")
    e.add_argument("input", type=Path)
    e.add_argument("--tol", type=_positive, default=2.0 ** -53)
    e.add_argument("--mode", choices=modes, default=ExpmMode.GENERAL.value)
    e.add_argument("--out", type=Path, help="output file (default: stdout)")
    e.add_argument("--check", action="store_true", help="report the error against the reference")

    t = sub.add_parser("table", help="regenerate the method-data file and diff it against the shipped one")
    t.add_argument("--precision", type=int, default=be.WORK_DPS, help="working digits")
    t.add_argument("--out", type=Path, help="write the regenerated file here")
    t.add_argument("--against", type=Path, help="file to diff against (default: shipped)")

    b = sub.add_parser("bench", help="error/cost sweep over the norm and tolerance grids")
    b.add_argument("--mode", choices=modes, default=ExpmMode.GENERAL.value)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--tol", type=_positive, action="append", help="restrict the tolerance grid (repeatable)")
    b.add_argument("--matrix", type=Path, help="use this matrix instead of the generator")
    b.add_argument("--out", type=Path)

    s = sub.add_parser("structure", help="symplectic or unitary structure test")
    s.add_argument("--kind", choices=("symplectic", "unitary"), default="symplectic")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=_positive, action="append")
    s.add_argument("--out", type=Path)
    return p


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _cmd_exp(args) -> int:
    a = read_matrix(args.input)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise MatrixFileError(args.input, None, f"matrix must be square, got {a.shape[0]}x{a.shape[1]}")
    x, sel, ledger = expm(a, args.tol, args.mode)
    report = sys.stdout if args.out else sys.stderr
    print(f"method {sel.method.id}  s {sel.s}  cost {sel.predicted_cost} ({float(sel.predicted_cost):.4f})"
          f"  products {ledger.products}  solves {ledger.solves}  grid tol {sel.grid_tol}", file=report)
    if args.check:
        ref = reference_expm(a)
        norm = np.abs(a).sum(axis=0).max() if a.size else 0.0
        err = normalized_error(x, ref, a) if norm > 0 else float(np.abs(x - ref).max(initial=0.0))
        print(f"normalized error vs reference {err:.3e}", file=report)
    _emit(format_matrix(x, comment=f"expm by {sel.method.id}, s={sel.s}"), args.out)
    return EXIT_OK


def diff_method_data(new: dict, old: dict, rtol: float = TABLE_RTOL) -> list[str]:
    """Cells of `new` that differ from `old` beyond `rtol` (costs must match exactly)."""
    problems = []
    old_by_id = {m["id"]: m for m in old["methods"]}
    new_by_id = {m["id"]: m for m in new["methods"]}
    for ident in sorted(set(old_by_id) ^ set(new_by_id)):
        problems.append(f"{ident}: present in only one file")
    for ident, m in new_by_id.items():
        o = old_by_id.get(ident)
        if o is None:
            continue
        if m["cost"] != o["cost"]:
            problems.append(f"{ident}: cost {m['cost']} vs {o['cost']}")
        for label, v in m["theta"].items():
            w = o["theta"].get(label)
            if w is None:
                problems.append(f"{ident} {label}: missing in reference file")
            elif abs(float(v) - float(w)) > rtol * abs(float(w)):
                problems.append(f"{ident} {label}: {float(v):.10g} vs {float(w):.10g}")
        problems += [f"{ident} payload: {p}" for p in _diff_payload(m["payload"], o["payload"], rtol)]
    return problems


def _diff_payload(a, b, rtol, path="") -> list[str]:
    if isinstance(a, dict) and isinstance(b, dict):
        if a.keys() != b.keys():
            return [f"{path or '.'} keys differ"]
        return [p for k in sorted(a) for p in _diff_payload(a[k], b[k], rtol, f"{path}.{k}")]
    if isinstance(a, list) and isinstance(b, list):
        if len(a) != len(b):
            return [f"{path} length {len(a)} vs {len(b)}"]
        return [p for i, (x, y) in enumerate(zip(a, b)) for p in _diff_payload(x, y, rtol, f"{path}[{i}]")]
    try:
        x, y = Fraction(a), Fraction(b)
    except (TypeError, ValueError):
        return [] if a == b else [f"{path}: {a!r} vs {b!r}"]
    if abs(x - y) > Fraction(rtol) * abs(y):
        return [f"{path}: {a} vs {b}"]
    return []


def _cmd_table(args) -> int:
    if args.precision < 50:
        print("tolexpm table: --precision must be at least 50 digits", file=sys.stderr)
        return EXIT_USAGE
    ref_path = args.against or shipped_data_path()
    old = read_method_data(ref_path)
    new = build_method_data(args.precision, tuple(old["grid"]),
                            progress=lambda ident: print(f"  {ident}", file=sys.stderr))
    text = dumps(new)
    if args.out:
        args.out.write_text(text, encoding="utf-8")
    if text == Path(ref_path).read_text(encoding="utf-8"):
        print(f"regenerated table is byte-identical to {ref_path}")
        return EXIT_OK
    problems = diff_method_data(new, old)
    if problems:
        print(f"{len(problems)} cell(s) differ from {ref_path} beyond {TABLE_RTOL:g}:")
        for p in problems:
            print(f"  {p}")
        return EXIT_DATA
    print(f"regenerated table matches {ref_path} to {TABLE_RTOL:g} relative")
    return EXIT_OK


def _cmd_bench(args) -> int:
    cfg = ExperimentConfig(mode=args.mode, seed=args.seed)
    if args.tol:
        cfg.tols = tuple(args.tol)
    matrix = None
    if args.matrix:
        matrix = read_matrix(args.matrix)
        if matrix.shape[0] != matrix.shape[1]:
            raise MatrixFileError(args.matrix, None, "matrix must be square")
        matrix = matrix / np.abs(matrix).sum(axis=0).max()
    _emit(to_csv(BENCH_HEADER, bench_error_cost(cfg, matrix)), args.out)
    return EXIT_OK


def _cmd_structure(args) -> int:
    cfg = ExperimentConfig(tols=tuple(args.tol) if args.tol else STRUCTURE_TOLS, seed=args.seed)
    _emit(to_csv(STRUCTURE_HEADER, structure_test(cfg, args.kind)), args.out)
    return EXIT_OK


_COMMANDS = {"exp": _cmd_exp, "table": _cmd_table, "bench": _cmd_bench, "structure": _cmd_structure}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (MatrixFileError, NonFiniteError) as exc:
        print(f"tolexpm: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataFileError as exc:
        print(f"tolexpm: method data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (SingularMatrixError, FloatingPointError, ArithmeticError) as exc:
        print(f"tolexpm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
