"""Closed-form facts about the price process used as independent cross-checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import moment_eigs, sup_exponent
from .errors import DomainError, RegimeError
from .model import UP, ModelParams, check_state, require_solvable


@dataclass(frozen=True)
class MomentCurve:
    """``E[Y_t 1{xi(t) = s}]`` for both states along a time grid."""

    t: np.ndarray
    m_minus: np.ndarray
    m_plus: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.m_minus + self.m_plus


def transition_prob(lam: float, t, from_state: int, to_state: int):
    """P(xi(t) = to_state | xi(0) = from_state) for the symmetric chain."""
    check_state(from_state)
    check_state(to_state)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("time must be >= 0")
    decay = np.exp(-2.0 * lam * t)
    sign = 1.0 if from_state == to_state else -1.0
    out = 0.5 * (1.0 + sign * decay)
    return float(out) if out.ndim == 0 else out


def transition_matrix(lam: float, t: float) -> np.ndarray:
    """2x2 matrix indexed by (from, to) with row/column order (-1, +1)."""
    same = transition_prob(lam, t, UP, UP)
    return np.array([[same, 1.0 - same], [1.0 - same, same]])


def moment_matrix(params: ModelParams) -> np.ndarray:
    """Generator of the first-moment ODE, state order (-1, +1)."""
    mu, sigma, lam = params.mu, params.sigma, params.lam
    return np.array([[mu - sigma - lam, lam], [lam, mu + sigma - lam]])


def expected_price(params: ModelParams, y0: float, s0: int, t) -> MomentCurve:
    """Exact ``E[Y_t 1{xi(t)=s}]`` from the spectral decomposition of the moment ODE.

    ``exp(A t) = exp(k1 t) P1 + exp(k2 t) P2`` with the spectral projectors
    ``P1 = (A - k2 I) / (k1 - k2)`` and ``P2 = (k1 I - A) / (k1 - k2)``.
    """
    s0 = check_state(s0)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise DomainError("time must be >= 0")
    k1, k2 = moment_eigs(params)
    A = moment_matrix(params)
    eye = np.eye(2)
    P1 = (A - k2 * eye) / (k1 - k2)
    P2 = (k1 * eye - A) / (k1 - k2)
    col = 0 if s0 < 0 else 1
    e1, e2 = np.exp(k1 * t), np.exp(k2 * t)
    m_minus = y0 * (e1 * P1[0, col] + e2 * P2[0, col])
    m_plus = y0 * (e1 * P1[1, col] + e2 * P2[1, col])
    return MomentCurve(t, m_minus, m_plus)


def discounted_mean(params: ModelParams, y0: float, s0: int, t) -> np.ndarray:
    """``E[exp(-rho t) Y_t]``."""
    curve = expected_price(params, y0, s0, t)
    return np.exp(-params.rho * curve.t) * curve.total


def sup_weights(params: ModelParams) -> tuple[float, float]:
    """State weights ``(v(-1), v(+1))`` of the martingale ``v(xi) M^Omega_tilde``.

    ``v(s) = sigma + s (rho - mu)``; the weight is larger in the up state.
    """
    return params.sigma + params.mu - params.rho, params.sigma + params.rho - params.mu


def sup_martingale(params: ModelParams, m, s):
    """``v(s) * m ** Omega_tilde`` for the discounted price ``m``; a martingale along paths."""
    om = checked_sup_exponent(params)
    v_down, v_up = sup_weights(params)
    weight = np.where(np.asarray(s) > 0, v_up, v_down)
    return weight * np.power(np.asarray(m, dtype=float), om)


def checked_sup_exponent(params: ModelParams) -> float:
    require_solvable(params)
    om = sup_exponent(params)
    if om is None:
        raise RegimeError("supremum law needs rho < mu + sigma")
    return om


def sup_law(params: ModelParams, y: float, s: int, level: float) -> float:
    """P(sup_t exp(-rho t) Y_t >= level | Y_0 = y, xi(0) = s) for ``level > y``."""
    s = check_state(s)
    om = checked_sup_exponent(params)
    if not level > y > 0:
        raise DomainError(f"need level > y > 0, got y={y!r}, level={level!r}")
    v_down, v_up = sup_weights(params)
    weight = (v_up if s > 0 else v_down) / v_up
    return weight * math.exp(om * math.log(y / level))
