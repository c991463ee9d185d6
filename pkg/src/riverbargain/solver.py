"""Closed-form best responses, acceptable-price band and the market-clearing agreement."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .model import (
    Allocation,
    DisagreementPoint,
    Problem,
    _check_price,
    disagreement,
    surplus_water,
    utility_downstream,
    utility_upstream,
)


class NegativeClearingPrice(ArithmeticError):
    pass


class Regime(str, enum.Enum):
    INTERIOR = "Interior"
    UPSTREAM_BOUND = "UpstreamBound"
    DOWNSTREAM_BOUND = "DownstreamBound"
    NO_TRADE = "NoTrade"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class TuBounds:
    alpha_lower: float
    alpha_upper: float
    upstream_participates: bool
    downstream_participates: bool

    @property
    def nonempty(self) -> bool:
        return self.alpha_lower <= self.alpha_upper


@dataclass(frozen=True)
class Agreement:
    alpha_star: float
    allocation: Allocation
    utilities: tuple[float, float]
    disagreement: DisagreementPoint
    gains: tuple[float, float]
    feasible: bool
    regime: Regime
    bounds: TuBounds


def _effective(problem: Problem) -> tuple[float, float]:
    """Intercepts shifted by the externality valuation: ``a_i + beta_i * c1w``."""
    c = problem.c1w
    return problem.upstream.a + problem.upstream.beta * c, problem.downstream.a + problem.downstream.beta * c


def upstream_foc(problem: Problem, alpha: float) -> float:
    """Unconstrained stationary point of upstream utility at price ``alpha``."""
    a1, _ = _effective(problem)
    return (a1 - alpha * (1.0 + problem.c1w)) / problem.upstream.b


def downstream_foc(problem: Problem, alpha: float) -> float:
    _, a2 = _effective(problem)
    return (a2 - alpha * (1.0 + problem.c1w)) / problem.downstream.b


def best_response_upstream(problem: Problem, alpha: float) -> float:
    _check_price(alpha)
    return min(max(upstream_foc(problem, alpha), 0.0), problem.ats_consumption)


def best_response_downstream(problem: Problem, alpha: float, x1: float) -> float:
    _check_price(alpha)
    if x1 < 0:
        raise ValueError(f"x1 must be >= 0, got {x1!r}")
    return max(problem.e2 + problem.c1w * x1, downstream_foc(problem, alpha))


def alpha_lower(problem: Problem) -> float:
    """Lowest price at which upstream offers a nonnegative surplus."""
    p1, c, e1 = problem.upstream, problem.c1w, problem.e1
    return -p1.b * e1 / (1.0 + c) ** 2 + p1.beta * c / (1.0 + c) + p1.a / (1.0 + c)


def alpha_upper(problem: Problem) -> float:
    p2, c = problem.downstream, problem.c1w
    return (p2.a + p2.beta * c) / (1.0 + c) - (p2.b / (1.0 + c)) * (problem.e2 + problem.e1 * c / (1.0 + c))


def participation_upstream(problem: Problem) -> bool:
    a1, _ = _effective(problem)
    return a1 / problem.upstream.b >= problem.ats_consumption


def participation_downstream(problem: Problem) -> bool:
    _, a2 = _effective(problem)
    c = problem.c1w
    return a2 / problem.downstream.b >= problem.e2 + problem.e1 * c / (1.0 + c)


def tu_bounds(problem: Problem) -> TuBounds:
    return TuBounds(alpha_lower(problem), alpha_upper(problem),
                    participation_upstream(problem), participation_downstream(problem))


def clearing_price_formula(problem: Problem) -> float:
    """Price equating surplus supply and purchase demand with both FOCs interior (may be < 0)."""
    a1, a2 = _effective(problem)
    b1, b2 = problem.upstream.b, problem.downstream.b
    num = a1 / b1 + a2 / b2 - (problem.e1 + problem.e2)
    return num / ((1.0 + problem.c1w) * (1.0 / b1 + 1.0 / b2))


def alpha_star(problem: Problem) -> float:
    alpha = clearing_price_formula(problem)
    if alpha < 0:
        raise NegativeClearingPrice(
            f"clearing price {alpha!r} is negative: total effective satiation "
            f"is below total endowment {problem.e1 + problem.e2!r}")
    return alpha


def uncorrected_price_formula(problem: Problem) -> float:
    """Agreement price with the harmonic weighting applied to the endowments only; diagnostic.

    Kept for comparison with :func:`alpha_star`; it does not clear the market.
    """
    p1, p2, c = problem.upstream, problem.downstream, problem.c1w
    harmonic = 1.0 / p1.b + 1.0 / p2.b
    return (p1.a + p2.a - (problem.e1 + problem.e2) / harmonic + c * (p1.beta + p2.beta)) / (1.0 + c)


def _interior(problem: Problem, alpha: float) -> bool:
    x1 = upstream_foc(problem, alpha)
    if not 0.0 < x1 < problem.ats_consumption:
        return False
    return downstream_foc(problem, alpha) > problem.e2 + problem.c1w * x1


def _in_band(bounds: TuBounds, alpha: float) -> bool:
    return alpha >= 0 and bounds.alpha_lower <= alpha <= bounds.alpha_upper


def solve(problem: Problem, cfg=None) -> Agreement:
    """Clearing-price agreement with regime dispatch.

    With both first-order conditions interior the closed-form price is used. Otherwise
    the price is found numerically on the clamped responses; when no nonnegative price
    clears, or the cleared volume is zero, the outcome is the disagreement point.
    """
    from .oracle import NoSignChange, OracleConfig, oracle_clearing_alpha

    cfg = cfg or OracleConfig()
    bounds = tu_bounds(problem)
    dis = disagreement(problem)
    # Supply moves (1+c)^2/b1 per unit price, so a price known to alpha_tolerance
    # pins the traded volume only to that many units.
    vol_tol = (1e-9 * (1.0 + problem.e1 + problem.e2)
               + 4.0 * cfg.alpha_tolerance * (1.0 + problem.c1w) ** 2 / problem.upstream.b)

    alpha = clearing_price_formula(problem)
    numeric = not (alpha >= 0 and _interior(problem, alpha))
    if not numeric:
        regime = Regime.INTERIOR
    else:
        try:
            alpha = oracle_clearing_alpha(problem, cfg)
        except NoSignChange:
            return _no_trade(problem, math.nan, dis, bounds)
        x1 = best_response_upstream(problem, alpha)
        if surplus_water(problem, x1) <= vol_tol:
            return _no_trade(problem, alpha, dis, bounds)
        if upstream_foc(problem, alpha) <= 0.0:
            regime = Regime.UPSTREAM_BOUND
        elif downstream_foc(problem, alpha) <= problem.e2 + problem.c1w * x1:
            regime = Regime.DOWNSTREAM_BOUND
        else:
            regime = Regime.INTERIOR

    x1 = best_response_upstream(problem, alpha)
    if numeric:
        # Demand can be steep in the price, so a bisected price leaves a visible
        # quantity gap; hand downstream the cleared volume instead.
        x2 = problem.e1 + problem.e2 - x1
    else:
        x2 = best_response_downstream(problem, alpha, x1)
    t1 = alpha * surplus_water(problem, x1)
    z1 = utility_upstream(problem, x1, alpha)
    z2 = utility_downstream(problem, x1, x2, alpha)
    return Agreement(
        alpha_star=alpha,
        allocation=Allocation(x1, x2, t1),
        utilities=(z1, z2),
        disagreement=dis,
        gains=(z1 - dis.d1, z2 - dis.d2),
        feasible=_in_band(bounds, alpha),
        regime=regime,
        bounds=bounds,
    )


def _no_trade(problem: Problem, alpha: float, dis: DisagreementPoint, bounds: TuBounds) -> Agreement:
    return Agreement(
        alpha_star=alpha,
        allocation=Allocation(dis.x1_ats, dis.x2_ats, 0.0),
        utilities=(dis.d1, dis.d2),
        disagreement=dis,
        gains=(0.0, 0.0),
        feasible=_in_band(bounds, alpha),
        regime=Regime.NO_TRADE,
        bounds=bounds,
    )
