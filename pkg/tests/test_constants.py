import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import poly_roots_by_bisection, sample_params
from telegraph_stopping.constants import (
    char_poly,
    char_poly_scale,
    closed_forms,
    eigen_ratio,
    exponents,
    moment_eigs,
    sup_exponent,
)
from telegraph_stopping.errors import SubCriticalError
from telegraph_stopping.model import REFERENCE_PARAMS, ModelParams, Regime

SWEEP = 1000
SEEDS = {Regime.T10: 10, Regime.T13: 13, Regime.T14: 14, Regime.T16: 16}


def _sweep(regime, seed):
    rng = np.random.default_rng(seed)
    return [sample_params(regime, rng) for _ in range(SWEEP)]


def test_t10_frozen_values():
    f = closed_forms(REFERENCE_PARAMS[Regime.T10])
    assert f.omega_minus_exp == pytest.approx(1.509237138035791, rel=1e-13)
    assert f.omega_plus_exp == pytest.approx(-2.366379995178648, rel=1e-12)
    assert f.w_minus == pytest.approx(0.4435340033749464, rel=1e-13)
    assert f.b == pytest.approx(1.0 / 0.8)
    assert f.Omega == pytest.approx(1.5 / 0.7)


def test_t16_frozen_values():
    f = closed_forms(REFERENCE_PARAMS[Regime.T16])
    assert f.b == pytest.approx(1.0 / 1.4, rel=1e-15)
    assert f.Omega == pytest.approx(2.75, rel=1e-15)
    assert f.Omega_tilde is None


def test_t14_eigen_product():
    f = closed_forms(REFERENCE_PARAMS[Regime.T14])
    assert f.w_plus * f.w_minus == pytest.approx(-4.0, rel=1e-12)


def test_subcritical_rejected():
    with pytest.raises(SubCriticalError):
        closed_forms(ModelParams(rho=0.2, mu=0.1, sigma=0.6, lam=1.0, a=1.0))


@pytest.mark.parametrize("regime", [Regime.T10, Regime.T13, Regime.T14, Regime.T16])
def test_exponents_match_bisection_oracle(regime):
    p = REFERENCE_PARAMS[regime]
    om_m, om_p = exponents(p)
    assert sorted([om_m, om_p]) == pytest.approx(poly_roots_by_bisection(p), rel=1e-12)


@pytest.mark.parametrize("regime", [Regime.T10, Regime.T13, Regime.T14, Regime.T16])
def test_sign_table_sweep(regime):
    for p in _sweep(regime, seed=SEEDS[regime]):
        f = closed_forms(p)
        om_m, om_p = f.omega_minus_exp, f.omega_plus_exp
        for om in (om_m, om_p):
            assert abs(char_poly(p, om)) <= 1e-12 * char_poly_scale(p, om)
        assert 1.0 < om_m  # the down-state exponent always exceeds 1 above the critical rate
        if p.mu < p.sigma:
            assert om_p < 0.0
            assert 0.0 < f.w_minus < 1.0
        else:
            assert om_m < om_p
        assert f.Omega > 1.0 or regime in (Regime.T10, Regime.T14)
        if regime in (Regime.T14, Regime.T16):
            assert f.N < 0.0 and f.D < 0.0
        assert f.kappa1 + f.kappa2 == pytest.approx(2 * (p.mu - p.lam), abs=1e-12)
        assert f.kappa1 < p.rho


@pytest.mark.parametrize("regime", [Regime.T10, Regime.T13, Regime.T14, Regime.T16])
def test_eigen_product_identity(regime):
    # w+ w- expanded with Vieta's formulas for the roots of the polynomial
    for p in _sweep(regime, seed=7)[:200]:
        f = closed_forms(p)
        lhs = f.w_plus * f.w_minus
        r, lam, v = p.rho, p.lam, p.mu + p.sigma
        s_sum = 2 * p.mu * (lam + r) / (p.mu ** 2 - p.sigma ** 2)
        s_prod = (r * r + 2 * r * lam) / (p.mu ** 2 - p.sigma ** 2)
        c = 1 + r / lam
        rhs = c * c - c * v / lam * s_sum + (v / lam) ** 2 * s_prod
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)


def test_polynomial_at_up_exponent():
    # p((lam + rho) / (mu + sigma)) = -lam^2 for every parameter set
    for regime in (Regime.T10, Regime.T13, Regime.T14, Regime.T16):
        for p in _sweep(regime, seed=3)[:250]:
            w = (p.lam + p.rho) / (p.mu + p.sigma)
            assert char_poly(p, w) == pytest.approx(-p.lam ** 2, rel=1e-9, abs=1e-12 * char_poly_scale(p, w))


@settings(max_examples=300)
@given(mu=st.floats(0.05, 2.0), sigma=st.floats(0.05, 2.0), lam=st.floats(0.05, 10.0), extra=st.floats(1e-3, 3.0))
def test_polynomial_positive_at_one_above_critical(mu, sigma, lam, extra):
    if abs(mu - sigma) < 1e-6:
        return
    rho = mu - lam + math.hypot(sigma, lam) + extra
    p = ModelParams(rho, mu, sigma, lam, 1.0)
    assert char_poly(p, 1.0) > 0.0
    assert exponents(p)[0] > 1.0


def test_polynomial_negative_at_one_below_critical():
    p = ModelParams(rho=0.2, mu=0.1, sigma=0.6, lam=1.0, a=1.0)
    assert char_poly(p, 1.0) < 0.0


def test_eigen_ratio_makes_modes_solve_the_ode_pair():
    # for y^w modes, (g_-, g_+) = (w_ratio, 1) y^w must solve the coupled linear system
    for regime in (Regime.T10, Regime.T14):
        p = REFERENCE_PARAMS[regime]
        for om in exponents(p):
            ratio = eigen_ratio(p, om)
            up = -(p.rho + p.lam) + (p.mu + p.sigma) * om + p.lam * ratio
            down = -(p.rho + p.lam) * ratio + (p.mu - p.sigma) * om * ratio + p.lam
            assert abs(up) < 1e-12 and abs(down) < 1e-12


def test_moment_eigs():
    k1, k2 = moment_eigs(REFERENCE_PARAMS[Regime.T14])
    assert k1 == pytest.approx(-0.5 + math.sqrt(1.09))
    assert k2 == pytest.approx(-0.5 - math.sqrt(1.09))


def test_sup_exponent_only_below_drift_ceiling():
    assert sup_exponent(REFERENCE_PARAMS[Regime.T13]) is None
    om = sup_exponent(REFERENCE_PARAMS[Regime.T10])
    assert om == pytest.approx(2 * 0.4 / (0.36 - 0.16))
    assert om == pytest.approx(4.0)


@pytest.mark.parametrize("regime", [Regime.T10, Regime.T14])
def test_sup_exponent_exceeds_one(regime):
    for p in _sweep(regime, seed=11)[:300]:
        assert sup_exponent(p) > 1.0


def test_small_noise_limit_of_exponent():
    # as sigma -> 0 with mu fixed, Omega_minus -> rho / mu (deterministic growth)
    p = ModelParams(rho=0.9, mu=0.5, sigma=1e-7, lam=1.0, a=1.0)
    om_m, _ = exponents(p)
    assert om_m == pytest.approx(0.9 / 0.5, rel=1e-6)
