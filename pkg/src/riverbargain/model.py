"""Domain types and utility evaluation for the two-agent river with a pollution penalty.

Agent 1 sits upstream, agent 2 downstream. Upstream consumption ``x1`` pollutes the
river; the damage is compensated in "negative water" ``c1w * x1`` owed downstream,
so the most upstream can consume without trading is ``e1 / (1 + c1w)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping


class InvalidProblem(ValueError):
    """Raised when problem data violate the model's invariants.

    ``violations`` lists every ``(field, message)`` pair that failed, not just the first.
    """

    def __init__(self, violations: list[tuple[str, str]]):
        self.violations = violations
        super().__init__("; ".join(f"{field}: {msg}" for field, msg in violations))


class NonPositiveCurvature(InvalidProblem):
    pass


class NonPositiveIntercept(InvalidProblem):
    pass


class NegativeExternality(InvalidProblem):
    pass


class NegativeEndowment(InvalidProblem):
    pass


class NegativePenalty(InvalidProblem):
    pass


class NegativeConsumption(ValueError):
    pass


class NegativePrice(ValueError):
    pass


@dataclass(frozen=True)
class AgentParams:
    """Quadratic benefit ``a*x - (b/2)*x**2`` plus externality valuation ``beta``."""

    a: float
    b: float
    beta: float = 0.0

    def __post_init__(self) -> None:
        _raise_for(_agent_violations(self.a, self.b, self.beta, "agent"))

    @property
    def satiation(self) -> float:
        return self.a / self.b


@dataclass(frozen=True)
class Problem:
    upstream: AgentParams
    downstream: AgentParams
    e1: float
    e2: float
    c1w: float

    def __post_init__(self) -> None:
        _raise_for(_problem_violations(self.e1, self.e2, self.c1w))

    @property
    def ats_consumption(self) -> float:
        """Upstream consumption that exactly exhausts ``e1`` once the penalty is paid."""
        return self.e1 / (1.0 + self.c1w)

    def replace(self, **changes: Any) -> "Problem":
        """Copy with some fields swapped; ``a1``/``b1``/``beta1`` style keys reach the agents."""
        up = {"a": self.upstream.a, "b": self.upstream.b, "beta": self.upstream.beta}
        down = {"a": self.downstream.a, "b": self.downstream.b, "beta": self.downstream.beta}
        top = {"e1": self.e1, "e2": self.e2, "c1w": self.c1w}
        for key, value in changes.items():
            if key in top:
                top[key] = value
            elif key[:-1] in up and key[-1] in "12":
                (up if key[-1] == "1" else down)[key[:-1]] = value
            else:
                raise TypeError(f"unknown field {key!r}")
        return validate({"upstream": up, "downstream": down, **top})


@dataclass(frozen=True)
class Allocation:
    x1: float
    x2: float
    t1: float

    @property
    def t2(self) -> float:
        return -self.t1


@dataclass(frozen=True)
class DisagreementPoint:
    x1_ats: float
    x2_ats: float
    d1: float
    d2: float


def _agent_violations(a: float, b: float, beta: float, name: str) -> list[tuple[str, str, type]]:
    out = []
    if not (math.isfinite(a) and a > 0):
        out.append((f"{name}.a", f"intercept must be > 0, got {a!r}", NonPositiveIntercept))
    if not (math.isfinite(b) and b > 0):
        out.append((f"{name}.b", f"curvature must be > 0, got {b!r}", NonPositiveCurvature))
    if not (math.isfinite(beta) and beta >= 0):
        out.append((f"{name}.beta", f"externality coefficient must be >= 0, got {beta!r}",
                    NegativeExternality))
    return out


def _problem_violations(e1: float, e2: float, c1w: float) -> list[tuple[str, str, type]]:
    out = []
    for name, v in (("e1", e1), ("e2", e2)):
        if not (math.isfinite(v) and v >= 0):
            out.append((name, f"endowment must be >= 0, got {v!r}", NegativeEndowment))
    if not (math.isfinite(c1w) and c1w >= 0):
        out.append(("c1w", f"penalty coefficient must be >= 0, got {c1w!r}", NegativePenalty))
    return out


def _raise_for(violations: list[tuple[str, str, type]]) -> None:
    if violations:
        cls = violations[0][2]
        raise cls([(field, msg) for field, msg, _ in violations])


def _number(raw: Mapping[str, Any], key: str, prefix: str) -> float:
    if key not in raw:
        raise InvalidProblem([(prefix + key, "missing")])
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidProblem([(prefix + key, f"expected a number, got {value!r}")])
    return float(value)


def validate(raw: Mapping[str, Any]) -> Problem:
    """Build a :class:`Problem` from a nested mapping, reporting all violations at once.

    Expected shape::

        {"upstream": {"a": .., "b": .., "beta": ..},
         "downstream": {...}, "e1": .., "e2": .., "c1w": ..}

    ``beta`` defaults to 0 when absent.
    """
    violations: list[tuple[str, str, type]] = []
    agents = {}
    for name in ("upstream", "downstream"):
        block = raw.get(name)
        if not isinstance(block, Mapping):
            raise InvalidProblem([(name, "missing agent block")])
        a = _number(block, "a", name + ".")
        b = _number(block, "b", name + ".")
        beta = _number(block, "beta", name + ".") if "beta" in block else 0.0
        violations += _agent_violations(a, b, beta, name)
        agents[name] = (a, b, beta)
    top = {key: _number(raw, key, "") for key in ("e1", "e2", "c1w")}
    violations += _problem_violations(**top)
    _raise_for(violations)
    return Problem(AgentParams(*agents["upstream"]), AgentParams(*agents["downstream"]), **top)


def benefit(params: AgentParams, x: float) -> float:
    if x < 0:
        raise NegativeConsumption(f"consumption must be >= 0, got {x!r}")
    return params.a * x - 0.5 * params.b * x * x


def benefit_change(params: AgentParams, x_from: float, x_to: float) -> float:
    """``benefit(x_to) - benefit(x_from)`` in factored form, accurate when the points are close."""
    return (x_to - x_from) * (params.a - 0.5 * params.b * (x_to + x_from))


def penalty_water(problem: Problem, x1: float) -> float:
    if x1 < 0:
        raise NegativeConsumption(f"consumption must be >= 0, got {x1!r}")
    return problem.c1w * x1


def surplus_water(problem: Problem, x1: float) -> float:
    """Water upstream can sell after consuming ``x1`` and paying the penalty.

    Written as ``(1 + c1w) * (ats - x1)`` so it is exactly zero at the ATS point.
    """
    return (1.0 + problem.c1w) * (problem.ats_consumption - x1)


def _check_price(alpha: float) -> None:
    if alpha < 0:
        raise NegativePrice(f"price must be >= 0, got {alpha!r}")


def utility_upstream(problem: Problem, x1: float, alpha: float) -> float:
    """Benefit + revenue from surplus water + avoided clean-up cost."""
    _check_price(alpha)
    c = problem.c1w
    return (benefit(problem.upstream, x1)
            + alpha * (problem.e1 - x1 * (1.0 + c))
            + problem.upstream.beta * x1 * c)


def utility_downstream(problem: Problem, x1: float, x2: float, alpha: float) -> float:
    """Benefit - payment for purchased water - cost of treating polluted water."""
    _check_price(alpha)
    c = problem.c1w
    return (benefit(problem.downstream, x2)
            - alpha * (x2 - problem.e2 - penalty_water(problem, x1))
            - problem.downstream.beta * x1 * c)


def disagreement(problem: Problem) -> DisagreementPoint:
    # The TU term is identically zero at the ATS point, so it is left out of d1 and d2.
    x1 = problem.ats_consumption
    x2 = problem.e2 + problem.c1w * x1
    d1 = benefit(problem.upstream, x1) + problem.upstream.beta * problem.c1w * x1
    d2 = benefit(problem.downstream, x2) - problem.downstream.beta * problem.c1w * x1
    return DisagreementPoint(x1, x2, d1, d2)
