"""Brute-force numerics used to cross-check every closed form in :mod:`riverbargain.solver`.

Nothing here solves a first-order condition. Best responses come from a grid scan
refined by golden-section search, the clearing price from bisection on excess
supply, and the acceptable-price band from a scan of realised utility gains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .model import AgentParams, Problem, benefit_change, surplus_water, utility_downstream, utility_upstream
from .solver import best_response_downstream, best_response_upstream, clearing_price_formula, _interior

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class InvalidBracket(ValueError):
    pass


class NoSignChange(ArithmeticError):
    pass


class EmptyBand(ArithmeticError):
    pass


@dataclass(frozen=True)
class OracleConfig:
    x_tolerance: float = 1e-9
    alpha_tolerance: float = 1e-10
    max_iterations: int = 200
    grid_points: int = 1024

    def __post_init__(self) -> None:
        if not (self.x_tolerance > 0 and self.alpha_tolerance > 0):
            raise ValueError("oracle tolerances must be > 0")
        if self.max_iterations < 2 or self.grid_points < 2:
            raise ValueError("oracle iteration and grid counts must be >= 2")


DEFAULT = OracleConfig()


def maximize_scalar(objective: Callable[[float], float], lo: float, hi: float,
                    cfg: OracleConfig = DEFAULT) -> tuple[float, float]:
    """Global maximizer of a concave function on ``[lo, hi]``.

    A uniform grid picks the bracket, golden-section search narrows it, and a final
    three-point parabolic step recovers interior peaks below the resolution that
    value comparisons alone can reach (about sqrt(machine eps) relative).
    """
    if lo > hi:
        raise InvalidBracket(f"lo={lo!r} > hi={hi!r}")
    if lo == hi:
        return lo, objective(lo)

    grid = np.linspace(lo, hi, cfg.grid_points)
    values = [objective(float(x)) for x in grid]
    k = int(np.argmax(values))
    best_x, best_f = float(grid[k]), values[k]

    a = float(grid[max(k - 1, 0)])
    b = float(grid[min(k + 1, len(grid) - 1)])
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = objective(c), objective(d)
    for _ in range(cfg.max_iterations):
        if b - a <= cfg.x_tolerance:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = objective(d)
    for x, f in ((c, fc), (d, fd)):
        if f > best_f:
            best_x, best_f = x, f

    polished = _parabolic_step(objective, best_x, lo, hi)
    if polished is not None:
        f = objective(polished)
        if f >= best_f - 1e-12 * (1.0 + abs(best_f)):
            best_x, best_f = polished, f
    return best_x, best_f


def _parabolic_step(objective, x0: float, lo: float, hi: float) -> float | None:
    """Vertex of the parabola through three points around ``x0``, clipped to the bracket."""
    h = (hi - lo) / 8.0
    mid = min(max(x0, lo + h), hi - h)
    xs = (mid - h, mid, mid + h)
    f1, f2, f3 = (objective(x) for x in xs)
    curvature = f1 - 2.0 * f2 + f3
    if not curvature < 0:
        return None
    x = mid + 0.5 * h * (f1 - f3) / curvature
    return min(max(x, lo), hi)


def oracle_best_response_upstream(problem: Problem, alpha: float, cfg: OracleConfig = DEFAULT) -> float:
    return maximize_scalar(lambda x: utility_upstream(problem, x, alpha),
                           0.0, problem.ats_consumption, cfg)[0]


def deliverable_range(problem: Problem, x1: float) -> tuple[float, float]:
    """Downstream consumption interval given upstream consumption ``x1``."""
    floor = problem.e2 + problem.c1w * x1
    return floor, floor + max(0.0, problem.e1 - x1 * (1.0 + problem.c1w))


def oracle_best_response_downstream(problem: Problem, alpha: float, x1: float,
                                    cfg: OracleConfig = DEFAULT) -> float:
    # Upstream takes whatever downstream leaves: x1 = e1 + e2 - x2 inside the objective.
    total = problem.e1 + problem.e2

    def objective(x2: float) -> float:
        return utility_downstream(problem, max(total - x2, 0.0), x2, alpha)

    lo, hi = deliverable_range(problem, x1)
    return maximize_scalar(objective, lo, hi, cfg)[0]


def excess_supply(problem: Problem, alpha: float) -> float:
    c = problem.c1w
    x1 = best_response_upstream(problem, alpha)
    x2 = best_response_downstream(problem, alpha, x1)
    return surplus_water(problem, x1) - (x2 - problem.e2 - c * x1)


def price_ceiling(problem: Problem) -> float:
    """Price above which both agents' unconstrained consumption is nonpositive."""
    c = problem.c1w
    return max(problem.upstream.a + problem.upstream.beta * c,
               problem.downstream.a + problem.downstream.beta * c) / (1.0 + c)


def oracle_clearing_alpha(problem: Problem, cfg: OracleConfig = DEFAULT) -> float:
    """Smallest nonnegative price with nonnegative excess supply, by bisection."""
    lo, hi = 0.0, price_ceiling(problem)
    at_zero = excess_supply(problem, lo)
    if at_zero == 0.0:
        return 0.0
    if at_zero > 0.0:
        raise NoSignChange(f"excess supply {at_zero!r} > 0 already at zero price")
    if excess_supply(problem, hi) < 0.0:
        raise NoSignChange(f"excess supply still negative at price ceiling {hi!r}")
    for _ in range(cfg.max_iterations):
        if hi - lo <= cfg.alpha_tolerance:
            break
        mid = 0.5 * (lo + hi)
        if excess_supply(problem, mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return hi


def upstream_gain(problem: Problem, alpha: float) -> float:
    """Upstream utility at its best response minus its disagreement payoff."""
    s = problem.ats_consumption
    x = best_response_upstream(problem, alpha)
    c = problem.c1w
    return (benefit_change(problem.upstream, s, x)
            + alpha * (1.0 + c) * (s - x)
            + problem.upstream.beta * c * (x - s))


def downstream_gain(problem: Problem, alpha: float) -> float:
    """Downstream gain when upstream consumes whatever downstream leaves.

    Measured against the default point ``(e1/(1+c1w), e2 + c1w*e1/(1+c1w))``, which is
    exactly the point that substitution maps no purchase to.
    """
    c = problem.c1w
    s2 = problem.e2 + c * problem.ats_consumption
    x2 = best_response_downstream(problem, alpha, problem.ats_consumption)
    bought = x2 - s2
    return (benefit_change(problem.downstream, s2, x2)
            - alpha * (1.0 + c) * bought
            + problem.downstream.beta * c * bought)


def _both_gain(problem: Problem, alpha: float) -> bool:
    return upstream_gain(problem, alpha) > 0.0 and downstream_gain(problem, alpha) > 0.0


def _refine_edge(pred, outside: float, inside: float, cfg: OracleConfig) -> float:
    for _ in range(cfg.max_iterations):
        if abs(inside - outside) <= cfg.alpha_tolerance:
            break
        mid = 0.5 * (outside + inside)
        if pred(mid):
            inside = mid
        else:
            outside = mid
    return inside


def oracle_ir_band(problem: Problem, cfg: OracleConfig = DEFAULT) -> tuple[float, float]:
    """Longest price interval on which both agents strictly gain from trading.

    Gains are realised utilities at the clamped best responses minus disagreement
    payoffs. An agent whose best response is its no-trade point gains exactly zero,
    so the band's edges are the prices where trade switches on for each side.
    """
    top = price_ceiling(problem)
    grid = np.linspace(0.0, top, cfg.grid_points)
    mask = [_both_gain(problem, float(a)) for a in grid]

    best: tuple[int, int] | None = None
    i = 0
    while i < len(mask):
        if mask[i]:
            j = i
            while j + 1 < len(mask) and mask[j + 1]:
                j += 1
            if best is None or grid[j] - grid[i] > grid[best[1]] - grid[best[0]]:
                best = (i, j)
            i = j + 1
        else:
            i += 1
    if best is None:
        raise EmptyBand("no price at which both agents strictly gain")

    pred = lambda a: _both_gain(problem, a)  # noqa: E731
    i, j = best
    lower = 0.0 if i == 0 else _refine_edge(pred, float(grid[i - 1]), float(grid[i]), cfg)
    upper = top if j == len(grid) - 1 else _refine_edge(pred, float(grid[j + 1]), float(grid[j]), cfg)
    return lower, upper


def upstream_ir_holds(problem: Problem, alphas, tol: float = 1e-9) -> bool:
    """Whether upstream's realised utility is at least its disagreement payoff at every price."""
    s = problem.ats_consumption
    d1 = utility_upstream(problem, s, 0.0)
    return all(
        utility_upstream(problem, best_response_upstream(problem, a), a) >= d1 - tol * (1.0 + abs(d1))
        for a in alphas
    )


def random_problem(rng: np.random.Generator) -> Problem:
    def agent() -> AgentParams:
        return AgentParams(float(rng.uniform(1, 20)), float(rng.uniform(0.01, 2)), float(rng.uniform(0, 1)))

    up, down = agent(), agent()
    return Problem(up, down, float(rng.uniform(0, 30)), float(rng.uniform(0, 30)), float(rng.uniform(0, 2)))


def random_problems(seed: int, interior: bool = False) -> Iterator[Problem]:
    """Endless seeded stream of valid problems, optionally only those cleared in the interior."""
    rng = np.random.default_rng(seed)
    while True:
        p = random_problem(rng)
        if interior:
            alpha = clearing_price_formula(p)
            if not (alpha >= 0 and _interior(p, alpha)):
                continue
        yield p
