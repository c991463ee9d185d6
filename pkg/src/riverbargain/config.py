"""Run configuration: a flat dotted-key TOML document, or the equivalent JSON object.

    upstream.a = 4
    upstream.b = 0.02
    endowments.e1 = 30
    penalty.c1w = 4

Every key is listed in :data:`KEYS`; anything else is rejected.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .model import InvalidProblem, Problem, validate
from .oracle import OracleConfig
from .sweep import COLUMNS, SweepSpec

REQUIRED = (
    "upstream.a", "upstream.b",
    "downstream.a", "downstream.b",
    "endowments.e1", "endowments.e2",
    "penalty.c1w",
)
OPTIONAL = (
    "upstream.beta", "downstream.beta",
    "sweep.delta_values", "sweep.delta_range",
    "sweep.e2_start", "sweep.e2_stop", "sweep.e2_step", "sweep.columns",
    "oracle.x_tolerance", "oracle.alpha_tolerance", "oracle.max_iterations", "oracle.grid_points",
    "output.csv", "output.json", "output.svg", "output.delta",
)
KEYS = REQUIRED + OPTIONAL

# Problem fields as core-model names them, mapped back to config keys for messages.
_FIELD_TO_KEY = {"e1": "endowments.e1", "e2": "endowments.e2", "c1w": "penalty.c1w"}


class ParseError(ValueError):
    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        self.key, self.line = key, line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class ValidationError(ParseError):
    def __init__(self, violations: list[tuple[str, str]], line: Optional[int] = None):
        self.violations = violations
        super().__init__("; ".join(f"{k}: {m}" for k, m in violations),
                         key=violations[0][0] if violations else None, line=line)


@dataclass(frozen=True)
class RunConfig:
    problem: Problem
    sweep: Optional[SweepSpec] = None
    oracle: OracleConfig = OracleConfig()
    csv_path: Optional[str] = None
    json_path: Optional[str] = None
    svg_path: Optional[str] = None
    chart_delta: Optional[float] = None


def _flatten(tree: dict, prefix: str = "") -> dict[str, Any]:
    flat = {}
    for key, value in tree.items():
        full = prefix + key
        if isinstance(value, dict):
            flat.update(_flatten(value, full + "."))
        else:
            flat[full] = value
    return flat


def _line_of(text: str, key: str) -> Optional[int]:
    # Dotted TOML line first, then the JSON spelling of the leaf key.
    patterns = (rf"\s*{re.escape(key)}\s*=", rf'.*"{re.escape(key.split(".")[-1])}"\s*:')
    for pattern in patterns:
        for n, line in enumerate(text.splitlines(), 1):
            if re.match(pattern, line):
                return n
    return None


def _load(text: str) -> dict:
    if text.lstrip().startswith("{"):
        try:
            tree = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=exc.lineno) from exc
        if not isinstance(tree, dict):
            raise ParseError("top level must be an object")
        return tree
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        match = re.search(r"line (\d+)", str(exc))
        raise ParseError(str(exc), line=int(match.group(1)) if match else None) from exc


def _num(flat: dict, key: str, text: str, kind=float):
    value = flat[key]
    ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind is int:
        ok = ok and float(value).is_integer()
    if not ok:
        raise ParseError(f"expected a {'integer' if kind is int else 'number'}, got {value!r}",
                         key=key, line=_line_of(text, key))
    return kind(value)


def _num_list(flat: dict, key: str, text: str, length: Optional[int] = None) -> tuple[float, ...]:
    value = flat[key]
    if not isinstance(value, list) or any(isinstance(v, bool) or not isinstance(v, (int, float))
                                          for v in value):
        raise ParseError(f"expected a list of numbers, got {value!r}", key=key, line=_line_of(text, key))
    if length is not None and len(value) != length:
        raise ParseError(f"expected {length} numbers, got {len(value)}", key=key, line=_line_of(text, key))
    return tuple(float(v) for v in value)


def parse_config(text: str) -> RunConfig:
    flat = _flatten(_load(text))
    for key in flat:
        if key not in KEYS:
            raise ParseError("unknown key", key=key, line=_line_of(text, key))
    for key in REQUIRED:
        if key not in flat:
            raise ParseError("required key is missing", key=key)

    raw = {
        "upstream": {k: _num(flat, f"upstream.{k}", text) for k in ("a", "b", "beta") if f"upstream.{k}" in flat},
        "downstream": {k: _num(flat, f"downstream.{k}", text) for k in ("a", "b", "beta")
                       if f"downstream.{k}" in flat},
        "e1": _num(flat, "endowments.e1", text),
        "e2": _num(flat, "endowments.e2", text),
        "c1w": _num(flat, "penalty.c1w", text),
    }
    try:
        problem = validate(raw)
    except InvalidProblem as exc:
        violations = [(_FIELD_TO_KEY.get(f, f), m) for f, m in exc.violations]
        raise ValidationError(violations, line=_line_of(text, violations[0][0])) from exc

    oracle_kw = {}
    for name, kind in (("x_tolerance", float), ("alpha_tolerance", float),
                       ("max_iterations", int), ("grid_points", int)):
        if f"oracle.{name}" in flat:
            oracle_kw[name] = _num(flat, f"oracle.{name}", text, kind)
    try:
        oracle = OracleConfig(**oracle_kw)
    except ValueError as exc:
        raise ValidationError([("oracle", str(exc))]) from exc

    return RunConfig(
        problem=problem,
        sweep=_parse_sweep(flat, text, problem),
        oracle=oracle,
        csv_path=_str(flat, "output.csv", text),
        json_path=_str(flat, "output.json", text),
        svg_path=_str(flat, "output.svg", text),
        chart_delta=_num(flat, "output.delta", text) if "output.delta" in flat else None,
    )


def _str(flat: dict, key: str, text: str) -> Optional[str]:
    if key not in flat:
        return None
    if not isinstance(flat[key], str):
        raise ParseError(f"expected a string, got {flat[key]!r}", key=key, line=_line_of(text, key))
    return flat[key]


def _parse_sweep(flat: dict, text: str, problem: Problem) -> Optional[SweepSpec]:
    keys = [k for k in flat if k.startswith("sweep.")]
    if not keys:
        return None
    has_values, has_range = "sweep.delta_values" in flat, "sweep.delta_range" in flat
    if has_values == has_range:
        raise ParseError("give exactly one of sweep.delta_values or sweep.delta_range", key="sweep.delta_values")
    if has_values:
        deltas = _num_list(flat, "sweep.delta_values", text)
    else:
        start, stop, step = _num_list(flat, "sweep.delta_range", text, 3)
        if not step > 0:
            raise ValidationError([("sweep.delta_range", f"step must be > 0, got {step!r}")])
        n = int((stop - start) / step + 1e-9) + 1
        deltas = tuple(start + i * step for i in range(max(n, 0)))
    for key in ("sweep.e2_start", "sweep.e2_stop", "sweep.e2_step"):
        if key not in flat:
            raise ParseError("required in a sweep block", key=key)
    grid = tuple(_num(flat, k, text) for k in ("sweep.e2_start", "sweep.e2_stop", "sweep.e2_step"))
    columns = COLUMNS
    if "sweep.columns" in flat:
        cols = flat["sweep.columns"]
        if not isinstance(cols, list) or not all(isinstance(c, str) for c in cols):
            raise ParseError("expected a list of column names", key="sweep.columns",
                             line=_line_of(text, "sweep.columns"))
        columns = tuple(cols)
    try:
        return SweepSpec(problem.upstream, problem.downstream, problem.c1w, deltas, grid, columns)
    except ValueError as exc:
        raise ValidationError([("sweep", str(exc))]) from exc


def _fmt(v: float) -> str:
    return repr(float(v))


def format_config(cfg: RunConfig) -> str:
    """Commented TOML that :func:`parse_config` reads back to ``cfg``."""
    p = cfg.problem
    lines = [
        "# River bargaining run configuration (TOML, dotted keys).",
        "# Benefit of agent i: a*x - (b/2)*x^2; beta values the pollution externality.",
        "# Agent 1 (upstream) pollutes; it owes c1w units of water downstream per unit consumed.",
        f"upstream.a = {_fmt(p.upstream.a)}",
        f"upstream.b = {_fmt(p.upstream.b)}",
        f"upstream.beta = {_fmt(p.upstream.beta)}",
        f"downstream.a = {_fmt(p.downstream.a)}",
        f"downstream.b = {_fmt(p.downstream.b)}",
        f"downstream.beta = {_fmt(p.downstream.beta)}",
        "# Water endowments (volume >= 0).",
        f"endowments.e1 = {_fmt(p.e1)}",
        f"endowments.e2 = {_fmt(p.e2)}",
        "# Negative-water penalty coefficient (>= 0).",
        f"penalty.c1w = {_fmt(p.c1w)}",
    ]
    if cfg.sweep is not None:
        s = cfg.sweep
        lines += [
            "",
            "# Sweep block, used by the `sweep` subcommand only. Every grid point sets e1 = delta * e2;",
            "# the endowments above are ignored there. sweep.delta_range = [start, stop, step] also works.",
            "sweep.delta_values = [" + ", ".join(_fmt(d) for d in s.delta_values) + "]",
            f"sweep.e2_start = {_fmt(s.e2_grid[0])}",
            f"sweep.e2_stop = {_fmt(s.e2_grid[1])}",
            f"sweep.e2_step = {_fmt(s.e2_grid[2])}",
        ]
        if tuple(s.outputs) != COLUMNS:
            lines.append("sweep.columns = [" + ", ".join(f'"{c}"' for c in s.outputs) + "]")
        else:
            lines.append("# sweep.columns = [" + ", ".join(f'"{c}"' for c in COLUMNS[:6]) + ", ...]")
    o = cfg.oracle
    lines += [
        "",
        "# Numeric oracle settings (verify subcommand and clamped-regime clearing).",
        f"oracle.x_tolerance = {_fmt(o.x_tolerance)}",
        f"oracle.alpha_tolerance = {_fmt(o.alpha_tolerance)}",
        f"oracle.max_iterations = {o.max_iterations}",
        f"oracle.grid_points = {o.grid_points}",
        "",
        "# Output paths; command-line flags take precedence. Nothing is written unless named.",
    ]
    for key, value in (("csv", cfg.csv_path), ("json", cfg.json_path), ("svg", cfg.svg_path)):
        lines.append(f'output.{key} = "{value}"' if value is not None else f'# output.{key} = "sweep.{key}"')
    lines.append(f"output.delta = {_fmt(cfg.chart_delta)}" if cfg.chart_delta is not None
                 else "# output.delta = 30.0")
    return "\n".join(lines) + "\n"


def example_config() -> RunConfig:
    """The base-case parameters at delta = 30, e2 = 1, with the full sweep grid."""
    from .model import AgentParams

    up, down = AgentParams(4.0, 0.02, 0.02), AgentParams(2.0, 0.04, 0.2)
    problem = Problem(up, down, 30.0, 1.0, 4.0)
    sweep = SweepSpec(up, down, 4.0, tuple(float(d) for d in range(31)), (0.0, 40.0, 1.0))
    return RunConfig(problem=problem, sweep=sweep, chart_delta=30.0)
