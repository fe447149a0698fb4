"""Model parameters, trend states and regime classification.

The price follows ``dY/dt = (mu + sigma * xi(t)) * Y`` where ``xi`` is a
symmetric two-state Markov chain on {-1, +1} switching at rate ``lam``.
Selling at time ``t`` pays ``exp(-rho * t) * (Y_t - a)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields

from .errors import DegenerateNoise, NonPositiveParameter, SubCriticalError

DOWN = -1
UP = +1
STATES = (DOWN, UP)


class Regime(str, enum.Enum):
    SUB_CRITICAL = "SubCritical"
    T10 = "T10"  # rho <= mu + sigma, mu < sigma
    T13 = "T13"  # rho >  mu + sigma, mu < sigma
    T14 = "T14"  # rho <= mu + sigma, mu > sigma
    T16 = "T16"  # rho >  mu + sigma, mu > sigma

    @property
    def solvable(self) -> bool:
        return self is not Regime.SUB_CRITICAL

    @property
    def up_boundary_finite(self) -> bool:
        return self in (Regime.T13, Regime.T16)

    @property
    def monotone_price(self) -> bool:
        """True when the price never decreases (mu > sigma)."""
        return self in (Regime.T14, Regime.T16)


@dataclass(frozen=True)
class ModelParams:
    """The five positive reals of the selling problem.

    Construction validates; an instance is always admissible input for
    :func:`classify`.
    """

    rho: float
    mu: float
    sigma: float
    lam: float
    a: float

    def __post_init__(self):
        validate(self)

    def speed(self, s: int) -> float:
        """Exponential growth rate of the price while the trend is ``s``."""
        return self.mu + s * self.sigma

    def with_cost(self, a: float) -> ModelParams:
        return ModelParams(self.rho, self.mu, self.sigma, self.lam, a)

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def validate(params: ModelParams) -> ModelParams:
    for name in ("rho", "mu", "sigma", "lam", "a"):
        value = getattr(params, name)
        # also rejects NaN
        if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
            raise NonPositiveParameter(name, value)
    if params.mu == params.sigma:
        raise DegenerateNoise(params.mu, params.sigma)
    return params


def check_state(s: int) -> int:
    if s not in STATES:
        raise ValueError(f"trend state must be -1 or +1, got {s!r}")
    return int(s)


def critical_rate(params: ModelParams) -> float:
    """Smallest discount rate for which the value function is finite."""
    return params.mu - params.lam + math.hypot(params.sigma, params.lam)


def classify(params: ModelParams) -> Regime:
    if params.rho <= critical_rate(params):
        return Regime.SUB_CRITICAL
    slow_discount = params.rho <= params.mu + params.sigma
    if params.mu < params.sigma:
        return Regime.T10 if slow_discount else Regime.T13
    return Regime.T14 if slow_discount else Regime.T16


def require_solvable(params: ModelParams) -> Regime:
    regime = classify(params)
    if regime is Regime.SUB_CRITICAL:
        raise SubCriticalError(params.rho, critical_rate(params))
    return regime


def payoff(y, a: float):
    return y - a


# Reference parameter sets, one per solvable regime.
REFERENCE_PARAMS = {
    Regime.T10: ModelParams(rho=0.5, mu=0.1, sigma=0.6, lam=1.0, a=1.0),
    Regime.T13: ModelParams(rho=1.0, mu=0.2, sigma=0.5, lam=1.0, a=1.0),
    Regime.T14: ModelParams(rho=0.7, mu=0.5, sigma=0.3, lam=1.0, a=1.0),
    Regime.T16: ModelParams(rho=1.2, mu=0.5, sigma=0.3, lam=1.0, a=1.0),
}
