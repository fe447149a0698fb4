"""Free boundaries ``u_minus``, ``u_plus`` and the value-function constants.

Each solvable regime has its own solver. The two regimes with
``rho <= mu + sigma`` are fully algebraic; the other two reduce to the
smallest crossing of a strictly concave scalar function with a constant
level, located by bisection on a bracket whose sign change is guaranteed
by concavity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .constants import ClosedForms, closed_forms
from .errors import BracketError, RootFindingError
from .model import ModelParams, Regime, require_solvable

ROOT_RTOL = 1e-12
RESIDUAL_RTOL = 1e-9
BRACKET_PAD = 1e-12


@dataclass(frozen=True)
class Solution:
    """Complete description of the value function for one parameter set.

    ``u_plus`` is ``math.inf`` when it is never optimal to sell during an
    up trend.

    The power-law terms are stored by their value at the threshold where
    they are anchored, which stays finite even when an exponent is in the
    hundreds (``mu`` close to ``sigma``):

    * ``A_minus``, ``A_plus``: up-state values at ``u_minus`` of the two
      modes, ``C_minus * u_minus**Omega_minus`` and
      ``C_plus * u_minus**Omega_plus``;
    * ``A_cont``: ``C * u_plus**Omega`` (0 when ``u_plus`` is infinite).

    The classical constants ``C_minus``, ``C_plus`` and ``C_cont`` are
    derived from these (and may be ``+-inf`` or 0 when not representable).
    """

    params: ModelParams
    regime: Regime
    u_minus: float
    u_plus: float
    A_minus: float
    A_plus: float
    A_cont: float
    forms: ClosedForms

    @property
    def u_plus_finite(self) -> bool:
        return math.isfinite(self.u_plus)

    def threshold(self, s: int) -> float:
        return self.u_minus if s < 0 else self.u_plus

    @property
    def C_minus(self) -> float:
        return _unanchor(self.A_minus, self.u_minus, self.forms.omega_minus_exp)

    @property
    def C_plus(self) -> float:
        return _unanchor(self.A_plus, self.u_minus, self.forms.omega_plus_exp)

    @property
    def C_cont(self) -> float:
        return _unanchor(self.A_cont, self.u_plus, self.forms.Omega)


def _unanchor(amp: float, u: float, exponent: float) -> float:
    """``amp * u**(-exponent)`` computed in logs; overflow gives a signed infinity."""
    if amp == 0.0:
        return 0.0
    log_mag = math.log(abs(amp)) - exponent * math.log(u)
    mag = math.inf if log_mag > 709.0 else math.exp(log_mag)
    return math.copysign(mag, amp)


def power(y: float, exponent: float) -> float:
    """``y ** exponent`` through logs; ``y`` must be > 0."""
    return math.exp(exponent * math.log(y))


def find_smallest_root(f: Callable[[float], float], lo: float, hi: float, tol: float = ROOT_RTOL) -> float:
    """Bisection for the sign change of ``f`` on ``[lo, hi]``.

    Requires ``f(lo) < 0 < f(hi)``. With ``f`` strictly concave (up to a
    constant shift) the crossing inside the bracket is unique, hence it is
    the smallest one. Deterministic; terminates when the bracket width is
    at most ``tol * |x|`` (relative, so the result scales with the bracket)
    or cannot shrink further in floating point.
    """
    f_lo, f_hi = f(lo), f(hi)
    if not (f_lo < 0.0 < f_hi):
        raise BracketError(f"no sign change on [{lo!r}, {hi!r}]: f(lo)={f_lo!r}, f(hi)={f_hi!r}")
    while True:
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * abs(mid) or mid <= lo or mid >= hi:
            return mid
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if f_mid < 0.0:
            lo = mid
        else:
            hi = mid


def _up_boundary(params: ModelParams, forms: ClosedForms) -> tuple[float, float]:
    """``(u_plus, A_cont)`` from continuity and smooth fit of ``g(., +1)`` at ``u_plus``."""
    u_plus = params.a * params.rho / (params.rho - params.mu - params.sigma)
    return u_plus, (1.0 - forms.b) / forms.Omega * u_plus


def _pair_modes(params: ModelParams, forms: ClosedForms, u: float) -> tuple[float, float]:
    """``(A_minus, A_plus)`` from continuity and smooth fit of ``g(., -1)`` at ``u``."""
    a = params.a
    om_m, om_p = forms.omega_minus_exp, forms.omega_plus_exp
    A_plus = (u * (om_m - 1.0) - a * om_m) / (forms.w_plus * (om_m - om_p))
    A_minus = (u * (om_p - 1.0) - a * om_p) / (forms.w_minus * (om_p - om_m))
    return A_minus, A_plus


def solve_T10(params: ModelParams, forms: ClosedForms) -> Solution:
    a, lam, rho = params.a, params.lam, params.rho
    w_m, b = forms.w_minus, forms.b
    u_minus = a * (1.0 - lam / (lam + rho) * w_m) / (1.0 - b * w_m)
    A_minus = (u_minus - a) / w_m
    assert u_minus > a and A_minus > 0.0, (u_minus, A_minus)
    return Solution(params, Regime.T10, u_minus, math.inf, A_minus, 0.0, 0.0, forms)


def psi(params: ModelParams, forms: ClosedForms, u: float) -> float:
    """Left-hand side of the lower-threshold equation when mu < sigma and rho > mu + sigma."""
    if u == 0.0:
        return 0.0
    u_plus, A_cont = _up_boundary(params, forms)
    w_m = forms.w_minus
    return u - A_cont * w_m / (1.0 - forms.b * w_m) * power(u / u_plus, forms.Omega)


def solve_T13(params: ModelParams, forms: ClosedForms) -> Solution:
    a = params.a
    u_plus, A_cont = _up_boundary(params, forms)
    target = forms.a_hat
    lo, hi = a * (1.0 + BRACKET_PAD), u_plus * (1.0 - BRACKET_PAD)
    try:
        u_minus = find_smallest_root(lambda u: psi(params, forms, u) - target, lo, hi)
    except BracketError as exc:
        raise RootFindingError(f"lower threshold not bracketed in (a, u_plus): {exc}") from exc
    A_minus = (u_minus - a) / forms.w_minus
    return Solution(params, Regime.T13, u_minus, u_plus, A_minus, 0.0, A_cont, forms)


def solve_T14(params: ModelParams, forms: ClosedForms) -> Solution:
    assert forms.D < 0.0, forms.D
    u_minus = params.a * forms.N / forms.D
    A_minus, A_plus = _pair_modes(params, forms, u_minus)
    return Solution(params, Regime.T14, u_minus, math.inf, A_minus, A_plus, 0.0, forms)


def phi(params: ModelParams, forms: ClosedForms, u: float) -> float:
    """Left-hand side of the lower-threshold equation when mu > sigma and rho > mu + sigma."""
    if u == 0.0:
        return 0.0
    u_plus, A_cont = _up_boundary(params, forms)
    coef = forms.w_plus * forms.w_minus * (forms.omega_plus_exp - forms.omega_minus_exp) / forms.D
    return u - A_cont * coef * power(u / u_plus, forms.Omega)


def solve_T16(params: ModelParams, forms: ClosedForms) -> Solution:
    a = params.a
    u_plus, A_cont = _up_boundary(params, forms)
    target = a * forms.N / forms.D
    lo, hi = BRACKET_PAD * a, u_plus * (1.0 - BRACKET_PAD)
    try:
        u_minus = find_smallest_root(lambda u: phi(params, forms, u) - target, lo, hi)
    except BracketError as exc:
        raise RootFindingError(f"lower threshold not bracketed in (0, u_plus): {exc}") from exc
    A_minus, A_plus = _pair_modes(params, forms, u_minus)
    return Solution(params, Regime.T16, u_minus, u_plus, A_minus, A_plus, A_cont, forms)


_SOLVERS = {
    Regime.T10: solve_T10,
    Regime.T13: solve_T13,
    Regime.T14: solve_T14,
    Regime.T16: solve_T16,
}


def solve(params: ModelParams, check: bool = True) -> Solution:
    """Solve the selling problem for ``params``.

    Raises
    ------
    SubCriticalError
        If the discount rate does not exceed the critical rate.
    RootFindingError
        If a transcendental threshold equation is not bracketed as the
        concavity argument guarantees, or if the boundary equations fail
        the post-hoc residual check.
    """
    regime = require_solvable(params)
    sol = _SOLVERS[regime](params, closed_forms(params))
    if check:
        worst = max(boundary_residuals(sol).values())
        if not worst <= RESIDUAL_RTOL:
            raise RootFindingError(f"boundary equations violated: worst relative residual {worst!r}")
    return sol


def boundary_residuals(sol: Solution) -> dict[str, float]:
    """Relative residuals of every continuity / smooth-fit equation active in the regime.

    Keys name the equation by what it states. Each residual is
    ``|lhs - rhs| / max(1, |lhs|, |rhs|)``.
    """
    p, f = sol.params, sol.forms
    a, lam, rho = p.a, p.lam, p.rho
    u = sol.u_minus
    om_m, om_p = f.omega_minus_exp, f.omega_plus_exp

    def rel(lhs, rhs):
        return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))

    def middle(y):
        cont = sol.A_cont * power(y / sol.u_plus, f.Omega) if sol.A_cont != 0.0 else 0.0
        return f.b * y - a * lam / (lam + rho) + cont

    m, q = sol.A_minus, sol.A_plus
    out = {
        "continuity_down_at_u_minus": rel(f.w_minus * m + f.w_plus * q, u - a),
        "continuity_up_at_u_minus": rel(m + q, middle(u)),
    }
    if sol.regime.monotone_price:
        slope = (f.w_minus * om_m * m + f.w_plus * om_p * q) / u
        out["smooth_fit_down_at_u_minus"] = rel(slope, 1.0)
    if sol.u_plus_finite:
        up = sol.u_plus
        out["continuity_up_at_u_plus"] = rel(middle(up), up - a)
        out["smooth_fit_up_at_u_plus"] = rel(f.b + sol.A_cont * f.Omega / up, 1.0)
    return out
