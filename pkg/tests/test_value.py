import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import finite_difference, sample_params
from telegraph_stopping.errors import DomainError
from telegraph_stopping.model import DOWN, STATES, UP, REFERENCE_PARAMS, Regime
from telegraph_stopping.thresholds import solve
from telegraph_stopping.value import (
    Region,
    deriv,
    deriv_array,
    eval as value_at,
    generator,
    growth_bound_up,
    in_stopping_region,
    ode_residuals,
    value_array,
)
from telegraph_stopping.verify import generator_scale


def _grid(sol, n=4001):
    top = 3.0 * (sol.u_plus if sol.u_plus_finite else sol.u_minus)
    return np.linspace(0.0, top, n)


@pytest.mark.parametrize("s", STATES)
def test_zero_at_origin(sol, s):
    assert value_array(sol, 0.0, s) == 0.0


def test_continuity_at_thresholds(sol):
    eps = 1e-9
    for s in STATES:
        for u in (sol.u_minus, sol.u_plus):
            if not math.isfinite(u):
                continue
            left = value_array(sol, u * (1 - eps), s)
            assert left == pytest.approx(value_array(sol, u, s), rel=1e-7)


def test_stopping_region_equals_payoff(sol):
    y = np.linspace(sol.u_minus, 5 * sol.u_minus, 50)
    assert value_array(sol, y, DOWN) == pytest.approx(y - sol.params.a, rel=1e-15)
    if sol.u_plus_finite:
        y = np.linspace(sol.u_plus, 5 * sol.u_plus, 50)
        assert value_array(sol, y, UP) == pytest.approx(y - sol.params.a, rel=1e-15)


@pytest.mark.parametrize("s", STATES)
def test_derivative_matches_finite_differences(sol, s):
    kinks = [sol.u_minus, sol.u_plus]
    rng = np.random.default_rng(5)
    for y in rng.uniform(0.05, 2.5 * sol.u_minus, 200):
        if min(abs(y - k) for k in kinks) < 1e-3:
            continue
        fd = finite_difference(lambda x: float(value_array(sol, x, s)), y)
        assert deriv(sol, y, s) == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_generator_vanishes_in_continuation(sol):
    for s in STATES:
        top = sol.threshold(s) if math.isfinite(sol.threshold(s)) else 5 * sol.u_minus
        y = np.linspace(top / 2000, top, 2000, endpoint=False)
        rel = np.abs(generator(sol, y, s)) / generator_scale(sol, y, s)
        assert rel.max() <= 1e-10


def test_generator_nonpositive_in_stopping_region(sol):
    for s in STATES:
        lo = sol.threshold(s)
        if not math.isfinite(lo):
            continue
        y = np.linspace(lo, 10 * lo, 2000)
        assert (generator(sol, y, s, "right") <= 1e-10 * generator_scale(sol, y, s)).all()


def test_convex_monotone_and_above_payoff(sol):
    y = _grid(sol)
    for s in STATES:
        g = value_array(sol, y, s)
        assert (np.diff(g) >= -1e-13).all()
        assert (np.diff(g, 2) >= -1e-12).all()
        assert (g >= np.maximum(y - sol.params.a, 0.0) - 1e-13).all()


def test_up_trend_worth_more(sol):
    y = _grid(sol)
    assert (value_array(sol, y, DOWN) <= value_array(sol, y, UP) + 1e-13).all()


def test_growth_bound_above_lower_threshold(sol):
    y = np.linspace(sol.u_minus, 10 * sol.u_minus, 500)
    assert (value_array(sol, y, UP) <= growth_bound_up(sol, y) + 1e-12 * y).all()


@pytest.mark.parametrize(
    "regime, slope",
    [
        (Regime.T10, (1.5806515540555799 - 1.0) * 1.509237138035791 / 1.5806515540555799),
        (Regime.T13, 0.29685606692365185),
    ],
)
def test_no_smooth_fit_below_unit_slope(regime, slope):
    sol = solve(REFERENCE_PARAMS[regime])
    left = deriv(sol, sol.u_minus, DOWN, "left")
    assert left == pytest.approx(slope, rel=1e-10)
    assert left < 1.0
    assert deriv(sol, sol.u_minus, DOWN, "right") == 1.0


@pytest.mark.parametrize("regime", [Regime.T14, Regime.T16])
def test_smooth_fit_when_price_is_monotone(regime):
    sol = solve(REFERENCE_PARAMS[regime])
    assert deriv(sol, sol.u_minus, DOWN, "left") == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("regime", [Regime.T13, Regime.T16])
def test_smooth_fit_at_upper_threshold(regime):
    sol = solve(REFERENCE_PARAMS[regime])
    assert deriv(sol, sol.u_plus, UP, "left") == pytest.approx(1.0, abs=1e-9)


def test_eval_regions(sol):
    a = sol.params.a
    below = value_at(sol, 0.5 * sol.u_minus, DOWN)
    assert below.region is Region.CONTINUE and below.s == DOWN
    at = value_at(sol, sol.u_minus, DOWN)
    assert at.region is Region.STOP and at.g == pytest.approx(sol.u_minus - a)
    assert value_at(sol, sol.u_minus, UP).region is (Region.STOP if sol.u_plus == sol.u_minus else Region.CONTINUE)
    assert bool(in_stopping_region(sol, sol.u_minus, DOWN))


def test_domain_errors(sol):
    with pytest.raises(DomainError):
        value_at(sol, -1.0, DOWN)
    with pytest.raises(DomainError):
        deriv(sol, 0.0, UP)
    with pytest.raises(ValueError):
        deriv(sol, 1.0, UP, side="middle")
    with pytest.raises(ValueError):
        value_array(sol, 1.0, 0)


def test_array_shapes(sol):
    y = np.linspace(0.1, 3.0, 12).reshape(3, 4)
    assert value_array(sol, y, DOWN).shape == (3, 4)
    assert deriv_array(sol, y, UP).shape == (3, 4)
    assert np.ndim(value_array(sol, 1.0, DOWN)) == 0


def test_ode_residuals_pair(sol):
    r_down, r_up = ode_residuals(sol, 0.5 * sol.u_minus)
    assert abs(r_down) < 1e-12 and abs(r_up) < 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), regime=st.sampled_from(["T10", "T13", "T14", "T16"]),
       frac=st.floats(0.01, 0.999))
def test_random_parameters_satisfy_generator_equations(seed, regime, frac):
    sol = solve(sample_params(regime, np.random.default_rng(seed)))
    for s in STATES:
        y = np.array([frac * sol.u_minus])
        rel = abs(generator(sol, y, s)) / generator_scale(sol, y, s)
        assert rel.max() <= 1e-8
        y_stop = np.array([sol.threshold(s) * (1 + frac)]) if math.isfinite(sol.threshold(s)) else None
        if y_stop is not None:
            assert generator(sol, y_stop, s, "right")[0] <= 1e-10 * generator_scale(sol, y_stop, s)[0]
