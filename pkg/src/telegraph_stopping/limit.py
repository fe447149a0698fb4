"""White-noise limit: lam -> infinity with sigma = sigma0 * sqrt(lam).

The telegraph solution converges to the optimal selling rule for the
Stratonovich geometric Brownian motion ``dZ = Z (mu dt + sigma0 o dW)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .model import DOWN, UP, ModelParams, Regime, classify
from .thresholds import solve
from .value import value_array

DEFAULT_LAMBDAS = (1e2, 1e3, 1e4, 1e5, 1e6)
PROBE_FRACTIONS = (0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class BsSolution:
    Omega0: float
    u: float
    a: float

    @property
    def gain(self) -> float:
        return self.u - self.a

    def value(self, y):
        y = np.asarray(y, dtype=float)
        below = (self.u - self.a) * np.power(np.maximum(y, 0.0) / self.u, self.Omega0)
        return np.where(y <= self.u, below, y - self.a)

    def deriv(self, y):
        y = np.asarray(y, dtype=float)
        below = (self.u - self.a) * self.Omega0 / self.u * np.power(y / self.u, self.Omega0 - 1.0)
        return np.where(y < self.u, below, 1.0)


def bs_solve(rho: float, mu: float, sigma0: float, a: float) -> BsSolution:
    s2 = sigma0 * sigma0
    omega0 = (-mu + math.sqrt(mu * mu + 2.0 * rho * s2)) / s2
    if not omega0 > 1.0:
        raise DomainError(f"Omega0 = {omega0!r} <= 1: selling is never optimal in the diffusion limit")
    return BsSolution(omega0, a * omega0 / (omega0 - 1.0), a)


@dataclass(frozen=True)
class LimitRow:
    lam: float
    sigma: float
    u_minus: float
    u_minus_rewritten: float
    Omega_minus: float
    w_minus: float
    w_plus: float
    probes: tuple[float, ...]
    g_down: tuple[float, ...]
    g_up: tuple[float, ...]
    g_bs: tuple[float, ...]

    @property
    def value_error(self) -> tuple[float, float]:
        """Max probe error versus the diffusion value, for s = -1 and s = +1."""
        down = max(abs(x - z) for x, z in zip(self.g_down, self.g_bs))
        up = max(abs(x - z) for x, z in zip(self.g_up, self.g_bs))
        return down, up


@dataclass(frozen=True)
class LimitTable:
    bs: BsSolution
    rows: list[LimitRow] = field(default_factory=list)

    def u_errors(self) -> list[float]:
        return [abs(r.u_minus - self.bs.u) for r in self.rows]

    def decreasing(self) -> bool:
        errs = self.u_errors()
        down = [r.value_error[0] for r in self.rows]
        up = [r.value_error[1] for r in self.rows]
        return all(_strictly_decreasing(seq) for seq in (errs, down, up))

    def final_relative_error(self) -> float:
        return self.u_errors()[-1] / self.bs.u


def _strictly_decreasing(seq) -> bool:
    return all(b < a for a, b in zip(seq, seq[1:]))


def rewritten_u_minus(rho: float, mu: float, sigma0: float, a: float, lam: float, omega_minus: float) -> float:
    sig = sigma0 * math.sqrt(lam)
    return a * (lam + rho - mu - sig) / (lam + rho) * omega_minus / (omega_minus - 1.0)


def limit_sequence(rho: float, mu: float, sigma0: float, a: float, lambdas=DEFAULT_LAMBDAS) -> LimitTable:
    bs = bs_solve(rho, mu, sigma0, a)
    probes = tuple(f * bs.u for f in PROBE_FRACTIONS)
    g_bs = tuple(float(v) for v in bs.value(probes))
    rows = []
    for lam in lambdas:
        params = ModelParams(rho=rho, mu=mu, sigma=sigma0 * math.sqrt(lam), lam=float(lam), a=a)
        regime = classify(params)
        if regime is not Regime.T10:
            raise DomainError(f"lam={lam!r} gives regime {regime.value}; the limit needs T10")
        sol = solve(params)
        f = sol.forms
        rows.append(LimitRow(
            lam=float(lam),
            sigma=params.sigma,
            u_minus=sol.u_minus,
            u_minus_rewritten=rewritten_u_minus(rho, mu, sigma0, a, lam, f.omega_minus_exp),
            Omega_minus=f.omega_minus_exp,
            w_minus=f.w_minus,
            w_plus=f.w_plus,
            probes=probes,
            g_down=tuple(float(v) for v in value_array(sol, np.array(probes), DOWN)),
            g_up=tuple(float(v) for v in value_array(sol, np.array(probes), UP)),
            g_bs=g_bs,
        ))
    return LimitTable(bs, rows)
