"""Oracle-versus-closed-form report for one problem."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Problem
from .oracle import (
    DEFAULT,
    EmptyBand,
    OracleConfig,
    deliverable_range,
    excess_supply,
    oracle_best_response_downstream,
    oracle_best_response_upstream,
    oracle_clearing_alpha,
    oracle_ir_band,
    price_ceiling,
    upstream_ir_holds,
)
from .solver import (
    Regime,
    alpha_lower,
    alpha_upper,
    best_response_downstream,
    best_response_upstream,
    uncorrected_price_formula,
    solve,
)
from .sweep import band_predicate, feasible_predicate, find_feasibility_threshold

PASS, FAIL, WARN, INFO = "PASS", "FAIL", "WARN", "INFO"

# Ratios e1/e2 where an agreement region is expected.
REGION_DELTAS = tuple(range(20, 31))
DIAGNOSTIC_C1W = 0.4


@dataclass(frozen=True)
class Check:
    name: str
    status: str
    detail: str


def _g(v: float) -> str:
    return f"{v:.12g}"


def _close(a: float, b: float, rel: float) -> bool:
    return abs(a - b) <= rel * (1.0 + abs(b))


def sample_prices(problem: Problem) -> list[float]:
    top = price_ceiling(problem)
    ag = solve(problem)
    raw = [0.0, alpha_lower(problem), alpha_upper(problem), 0.25 * top, 0.5 * top, 0.75 * top, top]
    if math.isfinite(ag.alpha_star):
        raw.append(ag.alpha_star)
    return sorted({a for a in raw if a >= 0 and math.isfinite(a)})


def run_checks(problem: Problem, cfg: OracleConfig = DEFAULT) -> list[Check]:
    checks: list[Check] = []
    ag = solve(problem, cfg)
    prices = sample_prices(problem)

    worst, where = 0.0, None
    for a in prices:
        exact = best_response_upstream(problem, a)
        err = abs(oracle_best_response_upstream(problem, a, cfg) - exact) / (1.0 + abs(exact))
        if err > worst:
            worst, where = err, a
    checks.append(Check("best_response.upstream", PASS if worst <= 1e-6 else FAIL,
                        f"max rel err {worst:.3g} over {len(prices)} prices"
                        + (f" (worst at alpha={_g(where)})" if where is not None else "")))

    worst = 0.0
    for a in prices:
        x1 = best_response_upstream(problem, a)
        lo, hi = deliverable_range(problem, x1)
        exact = min(max(best_response_downstream(problem, a, x1), lo), hi)
        err = abs(oracle_best_response_downstream(problem, a, x1, cfg) - exact) / (1.0 + abs(exact))
        worst = max(worst, err)
    checks.append(Check("best_response.downstream", PASS if worst <= 1e-6 else FAIL,
                        f"max rel err {worst:.3g} over {len(prices)} prices (capped at deliverable water)"))

    if ag.regime is Regime.INTERIOR:
        numeric = oracle_clearing_alpha(problem, cfg)
        ok = _close(numeric, ag.alpha_star, 1e-8)
        checks.append(Check("clearing.price", PASS if ok else FAIL,
                            f"closed form {_g(ag.alpha_star)} vs bisection {_g(numeric)}"))
        e_tot = problem.e1 + problem.e2
        gap = abs(ag.allocation.x1 + ag.allocation.x2 - e_tot)
        checks.append(Check("clearing.identity", PASS if gap <= 1e-9 * (1 + e_tot) else FAIL,
                            f"|x1 + x2 - (e1 + e2)| = {gap:.3g}"))
        c = problem.c1w
        m1 = problem.upstream.a - problem.upstream.b * ag.allocation.x1 + problem.upstream.beta * c
        m2 = problem.downstream.a - problem.downstream.b * ag.allocation.x2 + problem.downstream.beta * c
        ok = _close(m1, m2, 1e-9) and _close(m1, ag.alpha_star * (1 + c), 1e-9)
        checks.append(Check("clearing.marginal", PASS if ok else FAIL,
                            f"marginal values {_g(m1)}, {_g(m2)}; price * (1 + c1w) = {_g(ag.alpha_star * (1 + c))}"))
    elif ag.regime is Regime.NO_TRADE:
        if math.isfinite(ag.alpha_star):
            detail = f"market clears at {_g(ag.alpha_star)} with no water traded; outcome is the disagreement point"
        else:
            detail = "no nonnegative price clears the market; outcome is the disagreement point"
        checks.append(Check("clearing.price", INFO, detail))
    else:
        resid = excess_supply(problem, ag.alpha_star)
        checks.append(Check("clearing.price", PASS if abs(resid) <= 1e-6 * (1 + problem.e1 + problem.e2) else FAIL,
                            f"{ag.regime.value}: numeric price {_g(ag.alpha_star)}, excess supply {resid:.3g}"))

    lower, upper = alpha_lower(problem), alpha_upper(problem)
    closed = (max(lower, 0.0), upper)
    try:
        band = oracle_ir_band(problem, cfg)
    except EmptyBand:
        band = None
    if band is None:
        if closed[0] < closed[1]:
            spacing = price_ceiling(problem) / (cfg.grid_points - 1)
            status = WARN if closed[1] - closed[0] < 2 * spacing else FAIL
            checks.append(Check("ir_band", status,
                                f"scan found no price where both gain; closed-form band [{_g(closed[0])}, {_g(closed[1])}]"))
        else:
            checks.append(Check("ir_band", PASS,
                                f"both empty: lower bound {_g(lower)} > upper bound {_g(upper)}"))
    else:
        ok = abs(band[0] - closed[0]) <= 1e-6 and abs(band[1] - closed[1]) <= 1e-6
        checks.append(Check("ir_band", PASS if ok else FAIL,
                            f"scanned [{_g(band[0])}, {_g(band[1])}] vs closed form [{_g(closed[0])}, {_g(closed[1])}]"))

    grid = np.linspace(0.0, price_ceiling(problem), 257)
    checks.append(Check("ir.upstream_everywhere",
                        PASS if upstream_ir_holds(problem, grid) else FAIL,
                        "upstream never loses by trading at its best response (257 prices)"))

    if ag.feasible:
        ok = min(ag.gains) >= -1e-9
        checks.append(Check("ir.agreement", PASS if ok else FAIL,
                            f"gains {_g(ag.gains[0])}, {_g(ag.gains[1])}"))

    checks.extend(_price_formula_checks(problem, ag, lower, upper))
    checks.extend(_region_checks(problem))
    return checks


def _in_band(a: float, lower: float, upper: float) -> bool:
    return a >= 0 and lower <= a <= upper


def _price_formula_checks(problem, ag, lower, upper) -> list[Check]:
    literal = uncorrected_price_formula(problem)
    out = []
    if math.isfinite(ag.alpha_star) and not _close(literal, ag.alpha_star, 1e-9):
        out.append(Check("price_formula.discrepancy", WARN,
                         f"uncorrected formula gives {_g(literal)} (in band: {_in_band(literal, lower, upper)}); "
                         f"clearing price is {_g(ag.alpha_star)} (in band: {_in_band(ag.alpha_star, lower, upper)})"))
    if _in_band(ag.alpha_star, lower, upper):
        out.append(Check("price_formula.clearing_price_in_band", PASS,
                         f"{_g(ag.alpha_star)} lies in [{_g(lower)}, {_g(upper)}]"))
    else:
        out.append(Check("price_formula.clearing_price_in_band", INFO,
                         f"clearing price {_g(ag.alpha_star)} outside [{_g(lower)}, {_g(upper)}]: no agreement"))
    return out


def _band_gap(problem: Problem, delta: float, e2: float) -> float:
    p = problem.replace(e1=delta * e2, e2=e2)
    return alpha_upper(p) - alpha_lower(p)


def _region_checks(problem: Problem) -> list[Check]:
    # upper - lower is affine in e2 along e1 = delta * e2, so its value at 0 and slope decide emptiness.
    empty = []
    for delta in REGION_DELTAS:
        g0 = _band_gap(problem, delta, 0.0)
        slope = _band_gap(problem, delta, 1.0) - g0
        if g0 < 0 and slope <= 0:
            empty.append(delta)
    out = []
    if len(empty) == len(REGION_DELTAS):
        out.append(Check("region.agreement_region", WARN,
                         f"price band is empty for every e2 >= 0 at delta = {REGION_DELTAS[0]}..{REGION_DELTAS[-1]}; "
                         "an agreement region is expected there"))
    elif empty:
        out.append(Check("region.agreement_region", WARN,
                         f"price band empty for every e2 >= 0 at delta in {empty}"))
    else:
        out.append(Check("region.agreement_region", PASS,
                         f"price band non-empty somewhere for every delta in {REGION_DELTAS[0]}..{REGION_DELTAS[-1]}"))

    diag = problem.replace(c1w=DIAGNOSTIC_C1W)
    band_edge = find_feasibility_threshold(diag, 30.0, (0.0, 100.0), band_predicate)
    agree_edge = find_feasibility_threshold(diag, 30.0, (0.0, 100.0), feasible_predicate)
    out.append(Check("region.c1w_0.4_diagnostic", INFO,
                     f"with c1w = {DIAGNOSTIC_C1W}, delta = 30: band non-empty from e2 = {_describe(band_edge)}; "
                     f"agreement from e2 = {_describe(agree_edge)}"))
    return out


def _describe(edge) -> str:
    if edge is None:
        return "never (e2 <= 100)"
    if isinstance(edge, list):
        return "boundaries at " + ", ".join(_g(e) for e in edge)
    return _g(edge)


def format_report(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"{c.status:<4}  {c.name:<{width}}  {c.detail}" for c in checks]
    n_fail = sum(c.status == FAIL for c in checks)
    n_warn = sum(c.status == WARN for c in checks)
    lines.append(f"summary: {len(checks)} checks, {n_fail} failed, {n_warn} warnings")
    return "\n".join(lines) + "\n"
