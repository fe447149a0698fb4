import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bs_oracle
from telegraph_stopping.errors import DomainError
from telegraph_stopping.limit import bs_solve, limit_sequence

RHO, MU, SIGMA0, A = 0.5, 0.1, 0.6, 1.0


@pytest.fixture(scope="module")
def table():
    return limit_sequence(RHO, MU, SIGMA0, A)


def test_diffusion_threshold_matches_oracle():
    om0, u = bs_oracle(RHO, MU, SIGMA0, A)
    bs = bs_solve(RHO, MU, SIGMA0, A)
    assert bs.Omega0 == pytest.approx(om0, rel=1e-13)
    assert bs.u == pytest.approx(u, rel=1e-12)
    assert bs.u == pytest.approx(3.427900575067777, rel=1e-13)


@settings(max_examples=100)
@given(rho=st.floats(0.05, 3.0), mu=st.floats(-1.0, 1.0), sigma0=st.floats(0.1, 2.0), a=st.floats(0.1, 10.0))
def test_diffusion_value_shape(rho, mu, sigma0, a):
    s2 = sigma0 ** 2
    om0 = (-mu + math.sqrt(mu * mu + 2 * rho * s2)) / s2
    if om0 <= 1.0 + 1e-6:
        with pytest.raises(DomainError):
            bs_solve(rho, mu, sigma0, a)
        return
    bs = bs_solve(rho, mu, sigma0, a)
    # root of the Stratonovich characteristic equation
    assert 0.5 * s2 * om0 ** 2 + mu * om0 - rho == pytest.approx(0.0, abs=1e-9 * max(1.0, rho))
    # value continuous with smooth fit at u
    assert float(bs.value(bs.u)) == pytest.approx(bs.gain, rel=1e-12)
    assert float(bs.deriv(bs.u * (1 - 1e-12))) == pytest.approx(1.0, rel=1e-6)
    y = np.linspace(0.0, 2 * bs.u, 101)
    assert (bs.value(y) >= np.maximum(y - a, 0.0) - 1e-12).all()


def test_errors_decrease(table):
    errs = table.u_errors()
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert table.decreasing()
    assert table.final_relative_error() < 1e-2


def test_frozen_error_sequence(table):
    assert table.u_errors() == pytest.approx([0.2139, 0.06596, 0.02066, 0.006514, 0.002058], rel=2e-3)


def test_rewritten_threshold_agrees(table):
    for row in table.rows:
        assert row.u_minus_rewritten == pytest.approx(row.u_minus, rel=1e-11)


def test_eigen_ratios_tend_to_one(table):
    last = table.rows[-1]
    assert abs(last.w_minus - 1) < 2e-3 and abs(last.w_plus - 1) < 2e-3
    assert last.Omega_minus == pytest.approx(table.bs.Omega0, rel=1e-3)


def test_value_errors_decrease(table):
    for k in (0, 1):
        errs = [row.value_error[k] for row in table.rows]
        assert all(b < a for a, b in zip(errs, errs[1:]))


def test_rejects_non_t10_rate():
    # a small lambda puts rho above mu + sigma
    with pytest.raises(DomainError):
        limit_sequence(RHO, MU, SIGMA0, A, lambdas=(0.1,))
