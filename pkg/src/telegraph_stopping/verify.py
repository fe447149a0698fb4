"""Invariant battery for a solved parameter set.

Each check returns a :class:`Check` carrying the measured quantity and the
tolerance it was compared with, so reports are self-describing.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import DOWN, STATES, UP, ModelParams
from .simulate import StoppingRule, mc_reward
from .thresholds import RESIDUAL_RTOL, Solution, boundary_residuals
from .value import deriv_array, generator, value_array

ODE_RTOL = 1e-8
GENERATOR_TOL = 1e-10
CHORD_TOL = 1e-10
SMOOTH_FIT_TOL = 1e-9
MC_SIGMAS = 3.0
PERTURBATIONS = (0.8, 1.25)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def generator_scale(sol: Solution, y, s: int):
    """Magnitude of the individual terms of the generator, for relative residuals."""
    p = sol.params
    y = np.asarray(y, dtype=float)
    g_s = np.abs(value_array(sol, y, s))
    g_o = np.abs(value_array(sol, y, -s))
    slope = np.abs(deriv_array(sol, y, s, "left"))
    return np.maximum.reduce([p.rho * g_s, abs(p.speed(s)) * y * slope, p.lam * g_o, p.lam * g_s,
                              np.full_like(y, p.a * 1e-12)])


def continuation_grid(sol: Solution, s: int, n: int = 1000) -> np.ndarray:
    top = sol.threshold(s)
    if not math.isfinite(top):
        top = 4.0 * max(sol.u_minus, sol.params.a)
    return np.linspace(0.0, top, n + 2)[1:-1]


def stopping_grid(sol: Solution, s: int, n: int = 1000) -> np.ndarray:
    """Grid on the stopping region of state ``s``; empty if that region is empty."""
    lo = sol.threshold(s)
    if not math.isfinite(lo):
        return np.empty(0)
    return np.linspace(lo, lo + 4.0 * max(lo, sol.params.a), n)


def check_boundaries(sol: Solution) -> list[Check]:
    return [Check(f"boundary:{k}", v <= RESIDUAL_RTOL, v, RESIDUAL_RTOL) for k, v in boundary_residuals(sol).items()]


def check_ode(sol: Solution, n: int = 1000) -> list[Check]:
    out = []
    for s in STATES:
        y = continuation_grid(sol, s, n)
        rel = np.abs(generator(sol, y, s, "left")) / generator_scale(sol, y, s)
        worst = float(rel.max())
        out.append(Check(f"ode_residual:s={s:+d}", worst <= ODE_RTOL, worst, ODE_RTOL))
    return out


def check_generator_inequality(sol: Solution, n: int = 1000) -> list[Check]:
    out = []
    for s in STATES:
        y = stopping_grid(sol, s, n)
        if y.size == 0:
            continue
        rel = generator(sol, y, s, "right") / generator_scale(sol, y, s)
        worst = float(rel.max())
        out.append(Check(f"generator_inequality:s={s:+d}", worst <= GENERATOR_TOL, worst, GENERATOR_TOL))
    return out


def check_shape(sol: Solution, n_triples: int = 10_000, seed: int = 0) -> list[Check]:
    """Convexity (chords), monotonicity and ``g >= max(y - a, 0)`` on random triples."""
    rng = np.random.default_rng(seed)
    top = 2.0 * (sol.u_plus if sol.u_plus_finite else 2.0 * sol.u_minus)
    out = []
    for s in STATES:
        y = np.sort(rng.uniform(0.0, top, size=(n_triples, 3)), axis=1)
        g = value_array(sol, y, s)
        scale = np.maximum(1.0, np.abs(g).max(axis=1))
        w = (y[:, 1] - y[:, 0]) / np.where(y[:, 2] > y[:, 0], y[:, 2] - y[:, 0], 1.0)
        chord = g[:, 0] + w * (g[:, 2] - g[:, 0])
        convex_gap = float(((g[:, 1] - chord) / scale).max())
        mono_gap = float((np.maximum(g[:, 0] - g[:, 1], g[:, 1] - g[:, 2]) / scale).max())
        floor = np.maximum(y - sol.params.a, 0.0)
        floor_gap = float(((floor - g) / np.maximum(1.0, np.abs(g))).max())
        out += [
            Check(f"convexity:s={s:+d}", convex_gap <= CHORD_TOL, convex_gap, CHORD_TOL),
            Check(f"monotone:s={s:+d}", mono_gap <= CHORD_TOL, mono_gap, CHORD_TOL),
            Check(f"lower_bound:s={s:+d}", floor_gap <= CHORD_TOL, floor_gap, CHORD_TOL),
        ]
    return out


def smooth_fit_slopes(sol: Solution) -> dict[str, float]:
    """Analytic left derivatives at the free boundaries."""
    out = {"down_at_u_minus": float(deriv_array(sol, sol.u_minus, DOWN, "left"))}
    if sol.u_plus_finite:
        out["up_at_u_plus"] = float(deriv_array(sol, sol.u_plus, UP, "left"))
    return out


def check_smooth_fit(sol: Solution) -> list[Check]:
    slopes = smooth_fit_slopes(sol)
    out = []
    down = slopes["down_at_u_minus"]
    if sol.regime.monotone_price:
        out.append(Check("smooth_fit:down_at_u_minus", abs(down - 1.0) <= SMOOTH_FIT_TOL, abs(down - 1.0),
                         SMOOTH_FIT_TOL))
    else:
        # boundary reached only by a jump: the slope stays strictly below 1
        out.append(Check("no_smooth_fit:down_at_u_minus", 1.0 - down > 0.0, 1.0 - down, 0.0,
                         detail=f"left slope {down!r}"))
    if "up_at_u_plus" in slopes:
        up = slopes["up_at_u_plus"]
        out.append(Check("smooth_fit:up_at_u_plus", abs(up - 1.0) <= SMOOTH_FIT_TOL, abs(up - 1.0),
                         SMOOTH_FIT_TOL))
    return out


def check_monte_carlo(sol: Solution, y0: float, n: int, seed: int, horizon: Optional[float] = None,
                      workers: int = 1) -> list[Check]:
    params: ModelParams = sol.params
    rule = StoppingRule.from_solution(sol)
    out = []
    for s0 in STATES:
        g = float(value_array(sol, y0, s0))
        est = mc_reward(params, y0, s0, rule, n, seed, horizon=horizon, workers=workers)
        allowed = MC_SIGMAS * est.std_err + est.bias_bound
        out.append(Check(f"mc_value:s0={s0:+d}", abs(est.mean - g) <= allowed, abs(est.mean - g), allowed,
                         detail=f"g={g!r} mean={est.mean!r} se={est.std_err!r}"))
        for factor in PERTURBATIONS:
            pert = mc_reward(params, y0, s0, rule.scaled(factor), n, seed, horizon=horizon, workers=workers)
            excess = pert.mean - g
            allowed = MC_SIGMAS * pert.std_err + pert.bias_bound
            out.append(Check(f"mc_perturbed_x{factor}:s0={s0:+d}", excess <= allowed, excess, allowed,
                             detail=f"g={g!r} mean={pert.mean!r} se={pert.std_err!r}"))
    return out


def run_battery(sol: Solution, y0: float, n: int, seed: int, horizon: Optional[float] = None,
                workers: int = 1, include_mc: bool = True) -> list[Check]:
    checks = (check_boundaries(sol) + check_ode(sol) + check_generator_inequality(sol) + check_shape(sol, seed=seed)
              + check_smooth_fit(sol))
    if include_mc:
        checks += check_monte_carlo(sol, y0, n, seed, horizon, workers)
    return checks
