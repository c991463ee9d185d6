"""Command-line front end.

Exit codes: 0 success, 1 bad config or arguments, 2 numerical failure
(oracle errors or a failed verify check), 3 infeasible problem under ``solve --strict``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import ParseError, RunConfig, example_config, format_config, parse_config
from .oracle import EmptyBand, InvalidBracket, NoSignChange
from .solver import Agreement, solve, tu_bounds
from .sweep import SHADE_MODES, EmptySelection, render_chart, rows_to_csv, rows_to_json, run_sweep
from .verify import FAIL, format_report, run_checks

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INFEASIBLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _g(v: float) -> str:
    return f"{v:.12g}"


def _problem_lines(cfg: RunConfig) -> list[str]:
    p = cfg.problem
    return [
        f"upstream:   a = {_g(p.upstream.a)}, b = {_g(p.upstream.b)}, beta = {_g(p.upstream.beta)}",
        f"downstream: a = {_g(p.downstream.a)}, b = {_g(p.downstream.b)}, beta = {_g(p.downstream.beta)}",
        f"endowments: e1 = {_g(p.e1)}, e2 = {_g(p.e2)}; penalty c1w = {_g(p.c1w)}",
    ]


def format_bounds(cfg: RunConfig) -> str:
    b = tu_bounds(cfg.problem)
    lines = _problem_lines(cfg) + [
        f"alpha_lower = {_g(b.alpha_lower)}",
        f"alpha_upper = {_g(b.alpha_upper)}",
        f"band_nonempty = {str(b.nonempty).lower()}",
        f"upstream_participates = {str(b.upstream_participates).lower()}",
        f"downstream_participates = {str(b.downstream_participates).lower()}",
    ]
    return "\n".join(lines) + "\n"


def format_agreement(cfg: RunConfig, ag: Agreement) -> str:
    a, d = ag.allocation, ag.disagreement
    lines = _problem_lines(cfg) + [
        f"regime = {ag.regime.value}",
        f"feasible = {str(ag.feasible).lower()}",
        f"alpha_lower = {_g(ag.bounds.alpha_lower)}",
        f"alpha_upper = {_g(ag.bounds.alpha_upper)}",
        f"alpha_star = {_g(ag.alpha_star)}",
        f"x1 = {_g(a.x1)}",
        f"x2 = {_g(a.x2)}",
        f"transfer_t1 = {_g(a.t1)}",
        f"utilities = {_g(ag.utilities[0])}, {_g(ag.utilities[1])}",
        f"disagreement = {_g(d.d1)}, {_g(d.d2)} at x1 = {_g(d.x1_ats)}, x2 = {_g(d.x2_ats)}",
        f"gains = {_g(ag.gains[0])}, {_g(ag.gains[1])}",
    ]
    if not ag.feasible:
        lines.append("no agreement: the clearing price is outside the acceptable band")
    return "\n".join(lines) + "\n"


def _read_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from exc
    return parse_config(text)


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_solve(args) -> int:
    cfg = _read_config(args.config)
    ag = solve(cfg.problem, cfg.oracle)
    sys.stdout.write(format_agreement(cfg, ag))
    return EXIT_INFEASIBLE if args.strict and not ag.feasible else EXIT_OK


def cmd_bounds(args) -> int:
    sys.stdout.write(format_bounds(_read_config(args.config)))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _read_config(args.config)
    if cfg.sweep is None:
        raise ParseError("the sweep subcommand needs a sweep block", key="sweep.delta_values")
    csv_path = args.csv or cfg.csv_path
    json_path = args.json or cfg.json_path
    svg_path = args.svg or cfg.svg_path
    if not (csv_path or json_path or svg_path):
        raise UsageError("name at least one output with --csv, --json or --svg")
    delta = args.delta if args.delta is not None else cfg.chart_delta
    if svg_path and delta is None:
        raise UsageError("--svg needs --delta (or output.delta in the config)")

    rows = run_sweep(cfg.sweep)
    if csv_path:
        _write(csv_path, rows_to_csv(rows, cfg.sweep.outputs))
    if json_path:
        _write(json_path, rows_to_json(rows, cfg.sweep.outputs))
    if svg_path:
        _write(svg_path, render_chart(rows, delta, shade=args.shade))
    n_feasible = sum(r.feasible for r in rows)
    print(f"{len(rows)} rows, {n_feasible} with agreement", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _read_config(args.config)
    checks = run_checks(cfg.problem, cfg.oracle)
    sys.stdout.write(format_report(checks))
    return EXIT_NUMERIC if any(c.status == FAIL for c in checks) else EXIT_OK


def cmd_example_config(args) -> int:
    sys.stdout.write(format_config(example_config()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riverbargain",
                                     description="Two-agent river bargaining with a pollution penalty.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="print the clearing-price agreement")
    p.add_argument("config")
    p.add_argument("--strict", action="store_true", help="exit 3 when no agreement exists")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bounds", help="print the acceptable price band and participation flags")
    p.add_argument("config")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="tabulate the e1 = delta * e2 grid")
    p.add_argument("config")
    p.add_argument("--csv", metavar="PATH", help="CSV table ('-' for stdout)")
    p.add_argument("--json", metavar="PATH", help="JSON records ('-' for stdout)")
    p.add_argument("--svg", metavar="PATH", help="SVG chart for one delta")
    p.add_argument("--delta", type=float, help="delta selected for the chart")
    p.add_argument("--shade", choices=SHADE_MODES, default="feasible",
                   help="shade rows with an agreement (default) or every row with a non-empty price band")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="compare every closed form against the numeric oracle")
    p.add_argument("config")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("example-config", help="print a commented configuration template")
    p.set_defaults(func=cmd_example_config)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except (ParseError, UsageError, EmptySelection) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvalidBracket, NoSignChange, EmptyBand, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
