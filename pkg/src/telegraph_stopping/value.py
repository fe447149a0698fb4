"""Evaluation of the value function g(y, s), its slopes and generator residuals."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import DOWN, UP, check_state
from .thresholds import Solution


class Region(str, enum.Enum):
    CONTINUE = "Continue"
    STOP = "Stop"


@dataclass(frozen=True)
class ValuePoint:
    y: float
    s: int
    g: float
    region: Region


def _anchored(amp: float, y: np.ndarray, u: float, exponent: float) -> np.ndarray:
    """``amp * (y / u)**exponent`` for ``0 <= y <= u``, with the term 0 at ``y == 0``.

    Prices above ``u`` are clipped to ``u``: those entries belong to another
    branch and are discarded by the caller, clipping only keeps them finite.
    Only called with ``amp == 0`` or ``exponent > 0`` when ``y`` may be 0,
    so the convention never hides a blow-up.
    """
    out = np.zeros_like(y)
    if amp == 0.0:
        return out
    pos = y > 0.0
    ratio = np.minimum(y[pos], u) / u
    out[pos] = amp * np.exp(exponent * np.log(ratio))
    return out


def _branches(sol: Solution, y: np.ndarray, s: int):
    """Values and slopes of every closed-form branch for state ``s``."""
    p, f = sol.params, sol.forms
    om_m, om_p = f.omega_minus_exp, f.omega_plus_exp
    u_m, u_p = sol.u_minus, sol.u_plus
    ratio_m, ratio_p = (f.w_minus, f.w_plus) if s == DOWN else (1.0, 1.0)
    amp_m, amp_p = sol.A_minus * ratio_m, sol.A_plus * ratio_p
    low = _anchored(amp_m, y, u_m, om_m) + _anchored(amp_p, y, u_m, om_p)
    low_slope = (_anchored(amp_m * om_m / u_m, y, u_m, om_m - 1.0)
                 + _anchored(amp_p * om_p / u_m, y, u_m, om_p - 1.0))
    mid = f.b * y - p.a * p.lam / (p.lam + p.rho)
    mid_slope = np.full_like(y, f.b)
    if sol.A_cont != 0.0:
        mid = mid + _anchored(sol.A_cont, y, u_p, f.Omega)
        mid_slope = mid_slope + _anchored(sol.A_cont * f.Omega / u_p, y, u_p, f.Omega - 1.0)
    return (low, low_slope), (mid, mid_slope)


def _masks(sol: Solution, y: np.ndarray, s: int, side: str):
    """Boolean masks selecting the lower, middle and stopping branches.

    ``side='right'`` (the default for values) puts branch points in the
    upper branch, matching closed stopping intervals.
    """
    u_m, u_p = sol.u_minus, sol.u_plus
    if side == "left":
        low = y <= u_m
        stop = y > (u_m if s == DOWN else u_p)
    else:
        low = y < u_m
        stop = y >= (u_m if s == DOWN else u_p)
    mid = ~low & ~stop
    return low, mid, stop


def value_array(sol: Solution, y, s: int) -> np.ndarray:
    """Vectorized ``g(y, s)``."""
    s = check_state(s)
    y = np.asarray(y, dtype=float)
    flat = np.atleast_1d(y).astype(float)
    if np.any(flat < 0.0):
        raise DomainError("price must be >= 0")
    (low, _), (mid, _) = _branches(sol, flat, s)
    lo_mask, mid_mask, stop_mask = _masks(sol, flat, s, "right")
    out = np.where(lo_mask, low, np.where(mid_mask, mid, flat - sol.params.a))
    return out.reshape(y.shape) if y.ndim else out[0]


def deriv_array(sol: Solution, y, s: int, side: str = "left") -> np.ndarray:
    """Vectorized one-sided derivative of ``g(., s)`` (analytic)."""
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    s = check_state(s)
    y = np.asarray(y, dtype=float)
    flat = np.atleast_1d(y).astype(float)
    if np.any(flat <= 0.0):
        raise DomainError("derivative requires price > 0")
    (_, low_slope), (_, mid_slope) = _branches(sol, flat, s)
    lo_mask, mid_mask, _ = _masks(sol, flat, s, side)
    out = np.where(lo_mask, low_slope, np.where(mid_mask, mid_slope, 1.0))
    return out.reshape(y.shape) if y.ndim else out[0]


def in_stopping_region(sol: Solution, y, s: int):
    return np.asarray(y) >= sol.threshold(check_state(s))


def eval(sol: Solution, y: float, s: int) -> ValuePoint:  # noqa: A001 - public name
    if y < 0:
        raise DomainError(f"price must be >= 0, got {y!r}")
    g = float(value_array(sol, float(y), s))
    region = Region.STOP if y >= sol.threshold(s) else Region.CONTINUE
    return ValuePoint(float(y), int(s), g, region)


def deriv(sol: Solution, y: float, s: int, side: str = "left") -> float:
    if y <= 0:
        raise DomainError(f"derivative requires price > 0, got {y!r}")
    return float(deriv_array(sol, float(y), s, side))


def generator(sol: Solution, y, s: int, side: str = "left"):
    """``-rho g + (mu + s sigma) y g' + lam (g(., -s) - g(., s))`` at ``y``.

    Zero in the continuation region, non-positive in the stopping region.
    """
    p = sol.params
    g_s = value_array(sol, y, s)
    g_other = value_array(sol, y, -s)
    slope = deriv_array(sol, y, s, side)
    return -p.rho * g_s + p.speed(s) * np.asarray(y) * slope + p.lam * (g_other - g_s)


def ode_residuals(sol: Solution, y: float, side: str = "left") -> tuple[float, float]:
    """Generator residuals ``(r_down, r_up)`` at price ``y > 0``."""
    return float(generator(sol, y, DOWN, side)), float(generator(sol, y, UP, side))


def growth_bound_up(sol: Solution, y):
    """Upper bound on ``g(y, +1)`` implied by the generator inequality in the down stopping region."""
    p = sol.params
    return (p.lam + p.rho + p.sigma - p.mu) / p.lam * np.asarray(y) - p.a * (p.lam + p.rho) / p.lam
