"""``entop`` command line: decompose, generate, qpt, multiparty.

Exit codes: 0 success, 2 config/parse error, 3 numerical failure,
4 post-selection never fires.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import logging
import sys
from pathlib import Path

from . import io as eio
from . import scenarios
from .errors import Annihilated, ConfigError, EntopError, ZeroSuccess
from .opspec import parse_operator

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ZERO_SUCCESS = 0, 2, 3, 4


def _flatten(prefix: str, obj, row: dict) -> None:
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, row)
    elif not isinstance(obj, list):
        row[prefix] = obj


def report_csv(report: dict) -> str:
    """One row per phi point with dotted column names."""
    rows = []
    for point in report.get("results", []):
        row: dict = {}
        _flatten("", {k: v for k, v in point.items() if k not in ("outcomeBreakdown", "files")}, row)
        rows.append(row)
    cols: list[str] = []
    for r in rows:
        cols.extend(c for c in r if c not in cols)
    buf = _io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: eio._round(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def _emit(report: dict, name: str, out: Path | None, fmt: str) -> None:
    text = eio.dumps_report(report) if fmt == "json" else report_csv(report)
    if out is not None:
        (out / f"{name}_report.{fmt}").write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def _print_decomposition(rep: dict) -> None:
    coeffs = ", ".join(f"{c:.6g}" for c in rep["schmidtCoefficients"])
    print(f"operator      : {rep['operatorSpec']}", file=sys.stderr)
    print(f"bipartition   : {rep['bipartition'][0]} | {rep['bipartition'][1]} qubits", file=sys.stderr)
    print(f"coefficients  : {coeffs}", file=sys.stderr)
    print(f"Schmidt number: {rep['schmidtNumber']}", file=sys.stderr)
    print(f"unitary       : {rep['unitary']}", file=sys.stderr)


def cmd_decompose(args) -> tuple[dict, str]:
    if args.spec:
        op = parse_operator(args.spec)
        rep = scenarios.run_decompose(op, text=args.spec)
        name = "decompose"
    else:
        cfg = scenarios.load_config(args.config, seed=args.seed, require_seed=False)
        rep = scenarios.run_decompose(cfg.operator, cfg.bipartition, cfg.operator_text)
        name = cfg.name
    _print_decomposition(rep)
    return rep, name


def _run(kind: str, args):
    cfg = scenarios.load_config(args.config, seed=args.seed)
    out = Path(args.out) if args.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    if kind == "generate":
        rep = scenarios.run_state_tomography(cfg, out)
    elif kind == "qpt":
        rep = scenarios.run_process_tomography(cfg, out)
    else:
        if cfg.parties != 3:
            raise ConfigError(f"multiparty expects a 3-party operator, got {cfg.parties}")
        rep = scenarios.run_multiparty(cfg, out)
    return rep, cfg.name


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="entop", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("decompose", "operator-Schmidt decomposition of an operator spec"),
        ("generate", "post-selected state generation with QST and Monte-Carlo error bars"),
        ("qpt", "process tomography of the realized operation"),
        ("multiparty", "three-party operations (GHZ, W, CCU/Toffoli)"),
    ):
        sp = sub.add_parser(name, help=help_)
        if name == "decompose":
            g = sp.add_mutually_exclusive_group(required=True)
            g.add_argument("--config", help="scenario JSON")
            g.add_argument("--spec", help="operator spec, e.g. '1*[Z,Z] + 1*[X,X]'")
        else:
            sp.add_argument("--config", required=True, help="scenario JSON")
        sp.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        sp.add_argument("--out", default=None, help="output directory for reports and matrices")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "decompose":
            rep, name = cmd_decompose(args)
            out = Path(args.out) if args.out else None
            if out is not None:
                out.mkdir(parents=True, exist_ok=True)
            if args.format == "json":
                _emit(rep, name, out, "json")
            else:
                text = "schmidt_number,unitary,coefficients\n{},{},{}\n".format(
                    rep["schmidtNumber"], rep["unitary"], " ".join(repr(c) for c in rep["schmidtCoefficients"])
                )
                if out is not None:
                    (out / f"{name}_report.csv").write_text(text)
                sys.stdout.write(text)
        else:
            rep, name = _run(args.command, args)
            _emit(rep, name, Path(args.out) if args.out else None, args.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ZeroSuccess, Annihilated) as exc:
        print(f"post-selection failure: {exc}", file=sys.stderr)
        return EXIT_ZERO_SUCCESS
    except (EntopError, ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
