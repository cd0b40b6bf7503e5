"""Command-line surface.

Subcommands wrap exactly one library operation each: validate, lambda-c,
rho, cps, arbitrage, sweep.  Exit codes: 0 success, 2 domain violation,
3 no CPS for the requested measure/lambda, 64 usage or I/O error.  All floats
print with 12 significant digits so reruns diff cleanly.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional, Sequence

import numpy as np

from . import arbitrage as arb
from . import bounds, cps, measures, rho, solver, tree
from .errors import CpsConstructionError, DomainError, GridCapError, LpSizeError, ShapeError

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_NO_CPS = 3
EXIT_USAGE = 64


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _round_floats(obj):
    if isinstance(obj, float):
        return float(format(obj, ".12g"))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def _load_market(path: str) -> tree.MarketTree:
    return tree.market_from_config(_load_json(path))


def _load_measure(path: str, n_steps: int) -> measures.Measure:
    data = _load_json(path)
    levels = data["q"] if isinstance(data, dict) else data
    return measures.Measure(n_steps, tuple(tuple(level) for level in levels))


def _write(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buffer.getvalue()


def _solver_config(args) -> solver.SolverConfig:
    kwargs = {"seed": args.seed}
    if getattr(args, "grid", None) is not None:
        kwargs["grid_step"] = args.grid
    if getattr(args, "no_closed_form", False):
        kwargs["use_closed_form"] = False
        kwargs["use_sandwich"] = False
    return solver.SolverConfig(**kwargs)


def _require_valid(market: tree.MarketTree) -> Optional[int]:
    violations = tree.validate_market(market)
    if violations:
        for v in violations:
            sys.stderr.write(f"level {v.level} node {v.node_index}: {v.reason}\n")
        return EXIT_DOMAIN
    return None


def cmd_validate(args) -> int:
    market = _load_market(args.input)
    status = _require_valid(market)
    if status is not None:
        return status
    sys.stdout.write("valid\n")
    return EXIT_OK


def cmd_lambda_c(args) -> int:
    market = _load_market(args.input)
    status = _require_valid(market)
    if status is not None:
        return status
    report = solver.solve_lambda_c(market, _solver_config(args))
    payload = _round_floats(report.to_json_dict())
    _write(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.output)
    return EXIT_OK


def cmd_rho(args) -> int:
    market = _load_market(args.input)
    status = _require_valid(market)
    if status is not None:
        return status
    if args.measure:
        q = _load_measure(args.measure, market.n_steps)
    else:
        q = bounds.one_step_greedy_measure(market)
    tables = rho.compute_rho(market, q)
    rows = rho.tables_to_csv_rows(tables)
    _write(
        _csv_text(["level", "node_index", "rho_plus", "rho_minus", "r_plus", "r_minus"], rows),
        args.output,
    )
    return EXIT_OK


def cmd_cps(args) -> int:
    market = _load_market(args.input)
    status = _require_valid(market)
    if status is not None:
        return status
    if args.measure:
        q = _load_measure(args.measure, market.n_steps)
    else:
        report = solver.solve_lambda_c(market, _solver_config(args))
        q = report.argmax_measure.clamped(1e-6)
    process = cps.construct_cps(market, q, args.lam, selection=args.selection, tol=args.tol)
    problems = cps.verify_cps(market, q, process, args.lam)
    if problems:
        for p in problems:
            sys.stderr.write(f"{p.kind} at level {p.level} node {p.node_index}: {p.amount}\n")
        return EXIT_DOMAIN
    _write(
        _csv_text(["level", "node_index", "spot", "s_tilde", "ratio"], cps.cps_to_csv_rows(market, process)),
        args.output,
    )
    return EXIT_OK


def cmd_arbitrage(args) -> int:
    market = _load_market(args.input)
    status = _require_valid(market)
    if status is not None:
        return status
    witness = arb.find_arbitrage(market, args.lam)
    if witness is None:
        sys.stdout.write(f"no arbitrage at lambda={fmt(args.lam)}\n")
        return EXIT_OK
    _write(
        _csv_text(
            ["level", "node_index", "buy", "sell", "holding", "cash"],
            arb.strategy_to_csv_rows(market, witness, args.lam),
        ),
        args.output,
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    market = _load_market(args.input)
    status = _require_valid(market)
    if status is not None:
        return status
    try:
        start, stop, count = args.sweep.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError:
        raise UsageError(f"--sweep expects start:stop:count, got {args.sweep!r}")
    if count < 2:
        raise UsageError("sweep count must be >= 2")
    if not (0 <= start <= stop < 1):
        raise UsageError(f"sweep range must satisfy 0 <= start <= stop < 1, got {args.sweep!r}")
    greedy = bounds.one_step_greedy_measure(market)
    rows = []
    for lam in np.linspace(start, stop, count):
        lam = float(lam)
        exists = arb.find_arbitrage(market, lam) is not None
        membership = solver.m_lambda_membership(market, greedy, lam)
        rows.append((lam, exists, membership.status, membership.score - (1 - lam)))
    _write(
        _csv_text(["lambda", "arbitrage_exists", "membership_of_Qstar", "rho_gap"], rows),
        args.output,
    )
    return EXIT_OK


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="binarycps",
        description="Critical transaction costs and consistent price systems "
        "for binary market trees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_lambda=False):
        p.add_argument("--input", required=True, help="market config JSON")
        p.add_argument("--output", default=None, help="output path (default stdout)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--grid", type=int, default=None, help="grid subdivisions override")
        p.add_argument("--tol", type=float, default=1e-12)
        if needs_lambda:
            p.add_argument("--lambda", dest="lam", type=float, required=True)

    p = sub.add_parser("validate", help="check the market config")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("lambda-c", help="estimate the critical transaction cost")
    common(p)
    p.add_argument("--no-closed-form", action="store_true", help="force the numeric path")
    p.set_defaults(func=cmd_lambda_c)

    p = sub.add_parser("rho", help="dump the tightening tables for a measure")
    common(p)
    p.add_argument("--measure", default=None, help="measure JSON (default: greedy one-step)")
    p.set_defaults(func=cmd_rho)

    p = sub.add_parser("cps", help="construct and verify a consistent price system")
    common(p, needs_lambda=True)
    p.add_argument("--measure", default=None, help="measure JSON (default: solver argmax)")
    p.add_argument("--selection", choices=["midpoint", "left", "right"], default="midpoint")
    p.add_argument("--no-closed-form", action="store_true")
    p.set_defaults(func=cmd_cps)

    p = sub.add_parser("arbitrage", help="search for an arbitrage strategy")
    common(p, needs_lambda=True)
    p.set_defaults(func=cmd_arbitrage)

    p = sub.add_parser("sweep", help="tabulate arbitrage and membership over a lambda range")
    common(p)
    p.add_argument("--sweep", required=True, help="start:stop:count")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except CpsConstructionError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NO_CPS
    except (ShapeError, DomainError, GridCapError, LpSizeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DOMAIN
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
