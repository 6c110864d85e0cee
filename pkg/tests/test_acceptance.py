"""
Full-resolution comparisons with published values. Run with: pytest -m published
"""
import math

import numpy as np
import pytest

from mms import convergence_study
from models import Domain, MaterialParams, TemperatureCase
from solver import ThermoelasticSolver, build_mesh

pytestmark = pytest.mark.published

PUBLISHED_ERRORS = (0.030660254881, 0.007495773956, 0.001858903095,
                    0.000463682925, 0.000115857772, 0.000028961325)
FULL_REFINEMENTS = 7


@pytest.fixture(scope="module")
def mms_table():
    return convergence_study(6)


def test_mms_errors(mms_table):
    errors = mms_table.errors
    assert len(errors) == len(PUBLISHED_ERRORS)
    for error, published in zip(errors, PUBLISHED_ERRORS):
        assert error == pytest.approx(published, rel=0.15)
    assert all(b < a for a, b in zip(errors, errors[1:]))


def test_mms_rates(mms_table):
    rates = mms_table.rates
    expected = [math.log2(a / b) for a, b in zip(PUBLISHED_ERRORS, PUBLISHED_ERRORS[1:])]
    assert len(rates) == len(expected)
    for rate, published in zip(rates, expected):
        assert rate == pytest.approx(published, abs=0.05)
    assert rates[-1] >= 1.95


@pytest.mark.parametrize("domain", list(Domain))
@pytest.mark.parametrize("case", list(TemperatureCase))
def test_newton_at_full_resolution(domain, case):
    params = MaterialParams()
    mesh = build_mesh(domain, FULL_REFINEMENTS)
    solver = ThermoelasticSolver(params)
    theta = solver.solve_heat(mesh, case)

    linear = solver.solve_mechanics(mesh, theta, params.linearized())
    assert linear.iterations == 1 and linear.final_residual < 1e-10

    state = solver.solve_mechanics(mesh, theta)
    assert state.converged
    assert state.iterations <= 50
    assert state.final_residual <= 1e-8
    history = state.newton_history
    assert all(later < earlier for earlier, later in zip(history[1:], history[2:]))


@pytest.mark.parametrize("case", list(TemperatureCase))
def test_crack_tip_contrast(case):
    pair = ThermoelasticSolver(MaterialParams()).run_pair(Domain.EXAMPLE2, case, FULL_REFINEMENTS)

    def profile(result, quantity):
        return next(p for p in result.profiles if p.quantity == quantity)

    lin_eps = profile(pair.linear, "eps_yy").values
    lin_stress = profile(pair.linear, "T_yy").values
    eps = profile(pair.nonlinear, "eps_yy").values
    stress = profile(pair.nonlinear, "T_yy").values

    assert eps[-1] < lin_eps[-1]
    assert 0.5 <= stress[-1] / lin_stress[-1] <= 2.0
    ratio = stress[-5:] / eps[-5:]
    assert np.all(np.diff(ratio) > 0)
    assert pair.nonlinear.state.certificate < 1.0
