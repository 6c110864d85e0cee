import math
from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose

import solver as solver_module
from errors import ConvergenceError, StrainLimitViolation
from fem_core import DirichletCondition, l2_norm
from mesh import build_slit_square, build_unit_square
from models import BoundaryTag, Domain, ModelKind, NewtonConfig, TemperatureCase
from solver import (ThermoelasticSolver, beta_continuation, build_mesh, run_experiment, solve_heat,
                    solve_mechanics, strain_limit_certificate)


def theta_exact(x, y):
    return 0.25 * y ** 2 - 0.5 * y + 100.0


class TestHeat:
    def test_case1_matches_one_dimensional_solution(self, params):
        mesh = build_unit_square(3)
        theta = solve_heat(mesh, params, TemperatureCase.CASE1)
        assert_allclose(theta, theta_exact(mesh.points[:, 0], mesh.points[:, 1]), atol=1e-6)
        top_mid = int(np.flatnonzero(np.all(np.isclose(mesh.points, [0.5, 1.0]), axis=1))[0])
        assert theta[top_mid] == pytest.approx(99.75, abs=1e-6)

    def test_case1_l2_rate(self, params):
        errors = []
        for r in (3, 4, 5):
            mesh = build_unit_square(r)
            theta = solve_heat(mesh, params, TemperatureCase.CASE1)
            errors.append(l2_norm(mesh, theta, exact=theta_exact))
        rates = [math.log2(errors[i] / errors[i + 1]) for i in range(2)]
        for rate in rates:
            assert rate == pytest.approx(2.0, abs=0.1)

    def test_no_source_gives_constant(self, params):
        mesh = build_unit_square(3)
        theta = solve_heat(mesh, replace(params, g=0.0), TemperatureCase.CASE1)
        assert_allclose(theta, 100.0, atol=1e-8)

    def test_case2_bottom_profile(self, params):
        mesh = build_unit_square(3)
        theta = solve_heat(mesh, params, TemperatureCase.CASE2)
        bottom = mesh.nodes_on_line(0.0)
        assert_allclose(theta[bottom], 500.0 * mesh.points[bottom, 0] * (1 - mesh.points[bottom, 0]))
        assert mesh.points[bottom[np.argmax(theta[bottom])], 0] == pytest.approx(0.5)
        assert theta[bottom].max() == pytest.approx(125.0)

    def test_slit_blocks_vertical_flux(self, params):
        mesh = build_slit_square(3)
        theta = solve_heat(mesh, params, TemperatureCase.CASE1)
        assert_allclose(theta[mesh.nodes_on_line(0.0)], 100.0)
        # negative source: the bottom edge holds the maximum
        assert theta.max() <= 100.0 + 1e-9
        above = mesh.nodes_on_line(0.5 + mesh.h)
        assert np.ptp(theta[above]) > 1e-6
        corner = int(np.flatnonzero(np.all(np.isclose(mesh.points, [1.0, 1.0]), axis=1))[0])
        assert theta[corner] < theta_exact(1.0, 1.0) - 1e-6
        for lower, upper in mesh.duplicate_pairs:
            assert theta[upper] < theta[lower]

    def test_heat_non_convergence_raises(self, params, monkeypatch):
        monkeypatch.setattr(solver_module, "HEAT_CG_MAX_ITER", 1)
        solver = ThermoelasticSolver(params)
        with pytest.raises(ConvergenceError) as info:
            solver.solve_heat(build_unit_square(3), TemperatureCase.CASE1)
        assert info.value.iterations == 1
        assert info.value.residual > solver_module.HEAT_CG_TOL
        assert not solver.last_heat.converged

    def test_heat_cg_result_kept(self, params):
        solver = ThermoelasticSolver(params)
        solver.solve_heat(build_unit_square(2), TemperatureCase.CASE1)
        assert solver.last_heat.converged


class TestMechanics:
    @pytest.mark.parametrize("domain", list(Domain))
    @pytest.mark.parametrize("case", list(TemperatureCase))
    def test_linear_converges_in_one_iteration(self, params, domain, case):
        mesh = build_mesh(domain, 3)
        solver = ThermoelasticSolver(params)
        theta = solver.solve_heat(mesh, case)
        state = solver.solve_mechanics(mesh, theta, params.linearized())
        assert state.converged
        assert state.iterations == 1
        assert state.final_residual < 1e-10
        assert state.certificate == 0.0

    def test_boundary_values_hold(self, params):
        mesh = build_unit_square(3)
        state = solve_mechanics(mesh, params, solve_heat(mesh, params, TemperatureCase.CASE1))
        disp = state.displacement()
        top = mesh.boundary_nodes(BoundaryTag.GAMMA3)
        bottom = mesh.boundary_nodes(BoundaryTag.GAMMA1)
        assert_allclose(disp[top], np.broadcast_to([0.0, 1.0], disp[top].shape))
        assert_allclose(disp[bottom, 1], 0.0)

    @pytest.mark.parametrize("domain", list(Domain))
    def test_nonlinear_converges(self, params, domain):
        mesh = build_mesh(domain, 3)
        solver = ThermoelasticSolver(params)
        state = solver.solve_mechanics(mesh, solver.solve_heat(mesh, TemperatureCase.CASE1))
        assert state.converged
        assert state.iterations <= 50
        assert state.final_residual <= 1e-8
        assert 0.0 < state.certificate < 1.0
        history = state.newton_history
        assert all(later < earlier for earlier, later in zip(history[1:], history[2:]))

    def test_history_is_deterministic(self, params):
        mesh = build_slit_square(2)
        theta = solve_heat(mesh, params, TemperatureCase.CASE2)
        first = solve_mechanics(mesh, params, theta)
        second = solve_mechanics(mesh, params, theta)
        assert first.newton_history == second.newton_history
        assert np.array_equal(first.u, second.u)

    def test_iteration_cap_flags_state(self, params):
        mesh = build_unit_square(2)
        theta = solve_heat(mesh, params, TemperatureCase.CASE1)
        state = solve_mechanics(mesh, params, theta, NewtonConfig(tol=1e-8, max_iter=1))
        assert not state.converged
        assert state.iterations == 1
        assert "not converged" in state.message

    def test_violation_reports_iteration(self, params):
        mesh = build_unit_square(1)
        pull = [DirichletCondition(BoundaryTag.GAMMA3, 1, 100.0), DirichletCondition(BoundaryTag.GAMMA1, 1, 0.0),
                DirichletCondition(BoundaryTag.GAMMA1, 0, 0.0)]
        with pytest.raises(StrainLimitViolation) as info:
            solve_mechanics(mesh, params, None, dirichlet=pull)
        assert info.value.iteration == 1

    def test_iterative_mechanics_solver_agrees(self, params):
        mesh = build_unit_square(2)
        theta = solve_heat(mesh, params, TemperatureCase.CASE1)
        direct = ThermoelasticSolver(params).solve_mechanics(mesh, theta)
        iterative = ThermoelasticSolver(params, mechanics_solver="cg").solve_mechanics(mesh, theta)
        assert iterative.converged
        assert_allclose(iterative.u, direct.u, atol=1e-7)

    def test_iterative_mechanics_failure_raises(self, params, monkeypatch):
        mesh = build_unit_square(2)
        theta = solve_heat(mesh, params, TemperatureCase.CASE1)
        monkeypatch.setattr(solver_module, "MECHANICS_CG_ITER_PER_DOF", 0)
        with pytest.raises(ConvergenceError):
            ThermoelasticSolver(params, mechanics_solver="cg").solve_mechanics(mesh, theta)

    def test_unknown_mechanics_solver(self):
        with pytest.raises(ValueError):
            ThermoelasticSolver(mechanics_solver="gmres")

    def test_certificate_zero_displacement(self, params, unit_mesh):
        assert strain_limit_certificate(unit_mesh, params, np.zeros(2 * unit_mesh.n_nodes)) == 0.0


class TestExperiments:
    def test_example1_linear_smoke(self, params):
        result = run_experiment(Domain.EXAMPLE1, TemperatureCase.CASE1, ModelKind.LINEAR, 3, params)
        assert result.state.converged
        assert result.profiles == []
        assert "T_yy" in result.fields
        assert result.label == "example1_case1_linear"
        summary = result.summary()
        assert summary["iterations"] == 1 and summary["dofs"] == 2 * 81

    def test_example2_uses_slit_mesh(self, params):
        result = run_experiment(Domain.EXAMPLE2, TemperatureCase.CASE1, ModelKind.NONLINEAR, 3, params)
        assert result.mesh.has_slit
        assert_allclose(result.mesh.points[result.mesh.tip_node], [0.5, 0.5])
        assert [p.quantity for p in result.profiles] == ["T_yy", "eps_yy"]
        assert all(p.model is ModelKind.NONLINEAR for p in result.profiles)

    def test_example1_case2_bottom_maximum(self, params):
        result = run_experiment(Domain.EXAMPLE1, TemperatureCase.CASE2, ModelKind.LINEAR, 3, params)
        mesh = result.mesh
        bottom = mesh.nodes_on_line(0.0)
        theta = result.state.theta
        assert mesh.points[bottom[np.argmax(theta[bottom])], 0] == pytest.approx(0.5)

    def test_pair_shares_mesh_and_temperature(self, params):
        pair = ThermoelasticSolver(params).run_pair(Domain.EXAMPLE2, TemperatureCase.CASE2, 3)
        assert pair.linear.mesh is pair.nonlinear.mesh
        assert np.array_equal(pair.linear.state.theta, pair.nonlinear.state.theta)
        assert pair.linear.params.beta == 0.0
        assert pair.nonlinear.params.beta == params.beta

    @pytest.mark.slow
    def test_beta_continuation_approaches_linear(self, params):
        mesh = build_unit_square(3)
        theta = solve_heat(mesh, params, TemperatureCase.CASE1)
        distances = beta_continuation(mesh, params, theta, [1e-3, 1e-4, 1e-5])
        values = [d for _, d in distances]
        assert values[0] > values[1] > values[2] > 0.0
