"""Closed-form scalars derived from the model parameters."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

from .model import ModelParams, require_solvable


@dataclass(frozen=True)
class ClosedForms:
    """Exponents, eigenvector ratios and aggregates of the solved problem.

    Attributes
    ----------
    omega_minus_exp, omega_plus_exp : float
        Roots of :func:`char_poly`; the power-law exponents of the value
        function below the lower threshold.
    w_minus, w_plus : float
        Ratio ``g(y, -1) / g(y, +1)`` carried by each power-law mode.
    b, Omega : float
        Slope and exponent of the up-state value between the two thresholds.
    kappa1, kappa2 : float
        Eigenvalues of the first-moment ODE (growth rates of ``E[Y_t]``).
    Omega_tilde : float or None
        Exponent of the power law for the supremum of the discounted price;
        only defined when ``rho < mu + sigma``.
    N, D, a_hat : float
        Aggregates entering the lower-threshold equations of the
        ``mu > sigma`` regimes (``N``, ``D``) and ``mu < sigma`` regimes
        (``a_hat``).
    """

    omega_minus_exp: float
    omega_plus_exp: float
    w_minus: float
    w_plus: float
    b: float
    Omega: float
    kappa1: float
    kappa2: float
    Omega_tilde: Optional[float]
    N: float
    D: float
    a_hat: float

    def as_dict(self) -> dict:
        return asdict(self)


def char_poly(params: ModelParams, w):
    """p(w) = (mu^2 - sigma^2) w^2 - 2 mu (lam + rho) w + (rho^2 + 2 rho lam)."""
    mu, sigma, lam, rho = params.mu, params.sigma, params.lam, params.rho
    return (mu * mu - sigma * sigma) * w * w - 2.0 * mu * (lam + rho) * w + (rho * rho + 2.0 * rho * lam)


def char_poly_scale(params: ModelParams, w: float) -> float:
    """Magnitude scale for residuals of :func:`char_poly` at ``w``."""
    mu, sigma, lam, rho = params.mu, params.sigma, params.lam, params.rho
    return max(
        1.0,
        abs(mu * mu - sigma * sigma) * w * w,
        abs(2.0 * mu * (lam + rho) * w),
        rho * rho + 2.0 * rho * lam,
    )


def exponents(params: ModelParams) -> tuple[float, float]:
    """Return ``(Omega_minus, Omega_plus)``, the two roots of :func:`char_poly`."""
    mu, sigma, lam, rho = params.mu, params.sigma, params.lam, params.rho
    lead = (mu - sigma) * (mu + sigma)
    const = rho * rho + 2.0 * rho * lam
    root_disc = math.sqrt((lam * mu) ** 2 + sigma * sigma * const)
    q = mu * (lam + rho) + root_disc  # strictly positive: no cancellation
    return const / q, q / lead


def eigen_ratio(params: ModelParams, exponent: float) -> float:
    return 1.0 + params.rho / params.lam - (params.mu + params.sigma) * exponent / params.lam


def moment_eigs(params: ModelParams) -> tuple[float, float]:
    root = math.hypot(params.sigma, params.lam)
    base = params.mu - params.lam
    return base + root, base - root


def sup_exponent(params: ModelParams) -> Optional[float]:
    """Exponent of the supremum law of ``exp(-rho t) Y_t``; None if rho >= mu + sigma."""
    rho, mu, sigma, lam = params.rho, params.mu, params.sigma, params.lam
    if rho >= mu + sigma:
        return None
    return 2.0 * lam * (rho - mu) / (sigma * sigma - (mu - rho) ** 2)


def closed_forms(params: ModelParams) -> ClosedForms:
    require_solvable(params)
    rho, mu, sigma, lam, a = params.rho, params.mu, params.sigma, params.lam, params.a

    om_m, om_p = exponents(params)
    w_m, w_p = eigen_ratio(params, om_m), eigen_ratio(params, om_p)
    b = lam / (lam + rho - mu - sigma)
    Omega = (lam + rho) / (mu + sigma)
    k1, k2 = moment_eigs(params)

    cross = lam * w_p * w_m * (om_p - om_m)
    N = w_p * om_p - w_m * om_m - cross / (lam + rho)
    D = w_p * (om_p - 1.0) - w_m * (om_m - 1.0) - cross / (lam + rho - mu - sigma)
    a_hat = a * (1.0 - lam / (lam + rho) * w_m) / (1.0 - b * w_m)

    return ClosedForms(
        omega_minus_exp=om_m,
        omega_plus_exp=om_p,
        w_minus=w_m,
        w_plus=w_p,
        b=b,
        Omega=Omega,
        kappa1=k1,
        kappa2=k2,
        Omega_tilde=sup_exponent(params),
        N=N,
        D=D,
        a_hat=a_hat,
    )
