"""Endowment sweeps over ``e1 = delta * e2``: tables, feasibility boundaries, SVG charts."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .model import AgentParams, InvalidProblem, Problem
from .solver import Agreement, solve, tu_bounds

COLUMNS = ("delta", "e2", "e1", "alpha_lower", "alpha_upper", "alpha_star", "feasible",
           "x1", "x2", "transfer", "z1", "z2", "d1", "d2", "gain1", "gain2", "regime")


class EmptySelection(ValueError):
    pass


class SweepPointError(InvalidProblem):
    def __init__(self, delta: float, e2: float, cause: InvalidProblem):
        self.delta, self.e2 = delta, e2
        super().__init__([(f"sweep[delta={delta!r}, e2={e2!r}].{field}", msg)
                          for field, msg in cause.violations])


@dataclass(frozen=True)
class SweepSpec:
    upstream: AgentParams
    downstream: AgentParams
    c1w: float
    delta_values: tuple[float, ...]
    e2_grid: tuple[float, float, float]
    outputs: tuple[str, ...] = COLUMNS

    def __post_init__(self) -> None:
        start, stop, step = self.e2_grid
        if not step > 0:
            raise ValueError(f"sweep.e2_step must be > 0, got {step!r}")
        if not stop >= start:
            raise ValueError(f"sweep.e2_stop ({stop!r}) must be >= sweep.e2_start ({start!r})")
        if not self.delta_values:
            raise ValueError("sweep.delta_values must be non-empty")
        bad = [d for d in self.delta_values if not d >= 0]
        if bad:
            raise ValueError(f"sweep.delta_values must be >= 0, got {bad!r}")
        unknown = [c for c in self.outputs if c not in COLUMNS]
        if unknown:
            raise ValueError(f"unknown sweep output columns {unknown!r}")

    def e2_values(self) -> list[float]:
        start, stop, step = self.e2_grid
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(n)]

    def problem(self, delta: float, e2: float) -> Problem:
        try:
            return Problem(self.upstream, self.downstream, delta * e2, e2, self.c1w)
        except InvalidProblem as exc:
            raise SweepPointError(delta, e2, exc) from exc


@dataclass(frozen=True)
class SweepRow:
    delta: float
    e2: float
    e1: float
    alpha_lower: float
    alpha_upper: float
    alpha_star: float
    feasible: bool
    x1: float
    x2: float
    transfer: float
    z1: float
    z2: float
    d1: float
    d2: float
    gain1: float
    gain2: float
    regime: str

    @classmethod
    def from_agreement(cls, delta: float, problem: Problem, ag: Agreement) -> "SweepRow":
        return cls(
            delta=delta, e2=problem.e2, e1=problem.e1,
            alpha_lower=ag.bounds.alpha_lower, alpha_upper=ag.bounds.alpha_upper,
            alpha_star=ag.alpha_star, feasible=ag.feasible,
            x1=ag.allocation.x1, x2=ag.allocation.x2, transfer=ag.allocation.t1,
            z1=ag.utilities[0], z2=ag.utilities[1],
            d1=ag.disagreement.d1, d2=ag.disagreement.d2,
            gain1=ag.gains[0], gain2=ag.gains[1], regime=ag.regime.value,
        )


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    rows = []
    e2_values = spec.e2_values()
    for delta in spec.delta_values:
        for e2 in e2_values:
            p = spec.problem(delta, e2)
            rows.append(SweepRow.from_agreement(delta, p, solve(p)))
    return rows


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows: Iterable[SweepRow], columns: Sequence[str] = COLUMNS) -> str:
    out = io.StringIO()
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(format_value(getattr(row, c)) for c in columns) + "\n")
    return out.getvalue()


def rows_to_records(rows: Iterable[SweepRow], columns: Sequence[str] = COLUMNS) -> list[dict]:
    return [{c: getattr(row, c) for c in columns} for row in rows]


def rows_to_json(rows: Iterable[SweepRow], columns: Sequence[str] = COLUMNS) -> str:
    # NaN is not JSON; a missing clearing price is written as null.
    records = [{k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in r.items()}
               for r in rows_to_records(rows, columns)]
    return json.dumps(records, indent=1)


def parse_csv_value(column: str, text: str):
    if column == "feasible":
        return text == "true"
    if column == "regime":
        return text
    return float(text)


def feasible_predicate(problem: Problem) -> bool:
    return solve(problem).feasible


def band_predicate(problem: Problem) -> bool:
    """Whether the acceptable-price band is non-empty, ignoring where the clearing price falls."""
    return tu_bounds(problem).nonempty


def find_feasibility_threshold(
    base: Problem,
    delta: float,
    e2_range: tuple[float, float],
    predicate: Callable[[Problem], bool] = feasible_predicate,
    resolution: float = 1e-6,
    scan_points: int = 257,
) -> float | list[float] | None:
    """Boundary in ``e2`` of the region where ``predicate`` holds along ``e1 = delta * e2``.

    Returns the single boundary when the predicate switches once on the range, the
    range start if it holds everywhere, ``None`` if it never holds, and the list of all
    boundaries when it switches more than once.
    """
    lo, hi = e2_range

    def holds(e2: float) -> bool:
        return predicate(base.replace(e1=delta * e2, e2=e2))

    grid = np.linspace(lo, hi, scan_points)
    flags = [holds(float(x)) for x in grid]
    if not any(flags):
        return None
    if all(flags):
        return float(lo)

    edges = []
    for k in range(len(grid) - 1):
        if flags[k] == flags[k + 1]:
            continue
        a, b, fa = float(grid[k]), float(grid[k + 1]), flags[k]
        while b - a > resolution:
            mid = 0.5 * (a + b)
            if holds(mid) == fa:
                a = mid
            else:
                b = mid
        edges.append(0.5 * (a + b))
    return edges[0] if len(edges) == 1 else edges


SERIES = (
    ("alpha_lower", "lower bound (upstream)", "#1f77b4"),
    ("alpha_upper", "upper bound (downstream)", "#d62728"),
    ("alpha_star", "clearing price", "#2ca02c"),
)


SHADE_MODES = ("feasible", "band")


def _shaded(row: SweepRow, shade: str) -> bool:
    if shade == "feasible":
        return row.feasible
    if shade == "band":
        return row.alpha_lower <= row.alpha_upper
    raise ValueError(f"shade must be one of {SHADE_MODES!r}, got {shade!r}")


def _select(rows: Sequence[SweepRow], delta: float) -> list[SweepRow]:
    sel = sorted((r for r in rows if r.delta == delta), key=lambda r: r.e2)
    if not sel:
        raise EmptySelection(f"no sweep rows with delta={delta!r}")
    return sel


def render_chart(rows: Sequence[SweepRow], delta: float, width: int = 720, height: int = 440,
                 shade: str = "feasible") -> str:
    """SVG 1.1 chart of the three price series against ``e2`` for one ``delta``.

    With ``shade="feasible"`` the rows flagged feasible are shaded between the bounds.
    ``shade="band"`` shades wherever the lower bound does not exceed the upper one,
    whether or not the clearing price lands inside.
    """
    sel = _select(rows, delta)
    _shaded(sel[0], shade)

    left, right, top, bottom = 70, 210, 40, 50
    pw, ph = width - left - right, height - top - bottom
    xs = [r.e2 for r in sel]
    ys = [getattr(r, key) for r in sel for key, _, _ in SERIES]
    ys = [y for y in ys if math.isfinite(y)] or [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 1.0, x1 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 1.0, y1 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(x: float) -> str:
        return f"{left + (x - x0) / (x1 - x0) * pw:.2f}"

    def py(y: float) -> str:
        return f"{top + (y1 - y) / (y1 - y0) * ph:.2f}"

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        '<!DOCTYPE svg PUBLIC "-//W3C//DTD SVG 1.1//EN" "http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd">',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<title>{escape(f"Price bounds and clearing price, delta = {delta!r}")}</title>',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]

    # Shade each run of consecutive selected rows between the two bounds.
    out.append('<g id="agreement-region" fill="#2ca02c" fill-opacity="0.18" stroke="none">')
    run: list[SweepRow] = []
    for r in sel + [None]:
        if r is not None and _shaded(r, shade):
            run.append(r)
            continue
        if run:
            if len(run) == 1:
                r0 = run[0]
                out.append(f'<line x1="{px(r0.e2)}" y1="{py(r0.alpha_lower)}" x2="{px(r0.e2)}" '
                           f'y2="{py(r0.alpha_upper)}" stroke="#2ca02c" stroke-opacity="0.4"/>')
            else:
                pts = [f"{px(q.e2)},{py(q.alpha_upper)}" for q in run]
                pts += [f"{px(q.e2)},{py(q.alpha_lower)}" for q in reversed(run)]
                out.append(f'<polygon points="{" ".join(pts)}"/>')
            run = []
    out.append("</g>")

    out.append('<g id="axes" stroke="black" fill="none">')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}"/>')
    out.append("</g>")
    out.append('<g id="ticks" fill="black">')
    for v in _ticks(x0, x1):
        out.append(f'<line x1="{px(v)}" y1="{top + ph}" x2="{px(v)}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(v)}" y="{top + ph + 18}" text-anchor="middle">{_tick_label(v)}</text>')
    for v in _ticks(y0, y1):
        out.append(f'<line x1="{left - 5}" y1="{py(v)}" x2="{left}" y2="{py(v)}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{py(v)}" text-anchor="end" dominant-baseline="middle">'
                   f'{_tick_label(v)}</text>')
    out.append("</g>")
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 10}" text-anchor="middle">'
               f'downstream endowment e2 (e1 = {escape(repr(delta))} * e2)</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2:.2f})">price per unit water</text>')

    for key, label, color in SERIES:
        out.append(f'<g id="series-{key}" fill="none" stroke="{color}" stroke-width="2">')
        for seg in _segments([(r.e2, getattr(r, key)) for r in sel]):
            out.append(f'<polyline points="{" ".join(f"{px(x)},{py(y)}" for x, y in seg)}"/>')
        out.append("</g>")

    lx, ly = left + pw + 20, top + 10
    out.append('<g id="legend">')
    for k, (_, label, color) in enumerate(SERIES):
        y = ly + 22 * k
        out.append(f'<line x1="{lx}" y1="{y}" x2="{lx + 24}" y2="{y}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 30}" y="{y}" dominant-baseline="middle">{escape(label)}</text>')
    y = ly + 22 * len(SERIES)
    out.append(f'<rect x="{lx}" y="{y - 6}" width="24" height="12" fill="#2ca02c" fill-opacity="0.18"/>')
    region = "agreement region" if shade == "feasible" else "non-empty price band"
    out.append(f'<text x="{lx + 30}" y="{y}" dominant-baseline="middle">{region}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _segments(points: list[tuple[float, float]]) -> list[list[tuple[float, float]]]:
    segs, cur = [], []
    for x, y in points:
        if math.isfinite(y):
            cur.append((x, y))
        elif cur:
            segs.append(cur)
            cur = []
    if cur:
        segs.append(cur)
    return segs


def _ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step) * step
    n = int(math.floor((hi - first) / step + 1e-9)) + 1
    return [first + i * step for i in range(n)]


def _tick_label(v: float) -> str:
    text = f"{v:.6g}"
    return "0" if text == "-0" else text


def shaded_area(rows: Sequence[SweepRow], delta: float, shade: str = "feasible") -> float:
    """Area between the bounds over the shaded runs, in (e2, price) units."""
    sel = _select(rows, delta)
    area = 0.0
    for a, b in zip(sel, sel[1:]):
        if _shaded(a, shade) and _shaded(b, shade):
            area += 0.5 * ((a.alpha_upper - a.alpha_lower) + (b.alpha_upper - b.alpha_lower)) * (b.e2 - a.e2)
    return area

