"""
Heat solve followed by Newton iteration of the strain-limiting mechanics
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from assembly import (BodyForce, apply_dirichlet, assemble_heat, assemble_newton_system,
                      assemble_residual_norm, default_geometry, strains_at_quadrature)
from constitutive import energy_norm_components
from errors import ConvergenceError, LimitFemError, StrainLimitViolation
from fem_core import DirichletCondition, build_dof_map, l2_norm
from linalg import CGResult, cg_ssor, sparse_direct_solve
from mesh import Mesh, build_slit_square, build_unit_square
from models import (BoundaryTag, Domain, FieldKind, MaterialParams, ModelKind, NewtonConfig,
                    SolutionState, TemperatureCase)
from postproc import LineProfile, RecoveredFields, recover_fields, sample_reference_line

logger = logging.getLogger(__name__)

HEAT_CG_TOL = 1e-12
HEAT_CG_MAX_ITER = 20000
MECHANICS_CG_TOL = 1e-12
MECHANICS_CG_ITER_PER_DOF = 20

DIRECT = "direct"
CG = "cg"
MECHANICS_SOLVERS = (DIRECT, CG)

# Gamma3 pulls the top edge, Gamma1 only pins u_y, so Gamma3 wins at shared corners
TOP_PULL = (0.0, 1.0)
TOP_PRIORITY = 2
BOTTOM_PRIORITY = 1

PROFILE_QUANTITIES = ("T_yy", "eps_yy")


def heat_conditions(case: TemperatureCase) -> List[DirichletCondition]:
    """Temperature on the bottom edge; every other boundary is insulated"""
    if case is TemperatureCase.CASE1:
        return [DirichletCondition(BoundaryTag.GAMMA1, 0, 100.0)]
    return [DirichletCondition(BoundaryTag.GAMMA1, 0, lambda x, y: 500.0 * x * (1.0 - x))]


def displacement_conditions() -> List[DirichletCondition]:
    return [
        DirichletCondition(BoundaryTag.GAMMA3, 0, TOP_PULL[0], TOP_PRIORITY),
        DirichletCondition(BoundaryTag.GAMMA3, 1, TOP_PULL[1], TOP_PRIORITY),
        DirichletCondition(BoundaryTag.GAMMA1, 1, 0.0, BOTTOM_PRIORITY),
    ]


def build_mesh(domain: Domain, refinements: int) -> Mesh:
    if domain is Domain.EXAMPLE2:
        return build_slit_square(refinements)
    return build_unit_square(refinements)


def strain_limit_certificate(mesh: Mesh, params: MaterialParams, u: np.ndarray) -> float:
    """max over quadrature points of beta * |E^(1/2)[eps(u)]|"""
    if params.beta == 0.0:
        return 0.0
    eps = strains_at_quadrature(mesh, default_geometry(mesh), u)
    return float(params.beta * np.max(energy_norm_components(eps, params)))


@dataclass
class ExperimentResult:
    domain: Domain
    case: TemperatureCase
    model: ModelKind
    refinements: int
    mesh: Mesh
    params: MaterialParams
    state: SolutionState
    fields: Optional[RecoveredFields] = None
    profiles: List[LineProfile] = field(default_factory=list)
    heat: Optional[CGResult] = None
    wall_time: float = 0.0

    @property
    def label(self) -> str:
        return f"{self.domain.value}_case{self.case.value}_{self.model.value}"

    def summary(self) -> Dict[str, object]:
        state = self.state
        return {
            "domain": self.domain.value,
            "case": self.case.value,
            "model": self.model.value,
            "refinements": self.refinements,
            "h": self.mesh.h,
            "cells": self.mesh.n_cells,
            "nodes": self.mesh.n_nodes,
            "dofs": 2 * self.mesh.n_nodes,
            "converged": state.converged,
            "iterations": state.iterations,
            "final_residual": state.final_residual,
            "residual_history": list(state.newton_history),
            "certificate": state.certificate,
            "heat_cg_iterations": self.heat.iterations if self.heat else 0,
            "wall_time": self.wall_time,
            "message": state.message,
        }


@dataclass
class PairResult:
    linear: ExperimentResult
    nonlinear: ExperimentResult


class ThermoelasticSolver:
    def __init__(self, params: Optional[MaterialParams] = None,
                 newton: Optional[NewtonConfig] = None,
                 mechanics_solver: str = DIRECT):
        if mechanics_solver not in MECHANICS_SOLVERS:
            raise ValueError(f"unknown mechanics solver {mechanics_solver!r}")
        self.params = params or MaterialParams()
        self.newton = newton or NewtonConfig()
        self.mechanics_solver = mechanics_solver
        self.last_heat: Optional[CGResult] = None

    def _linear_solve(self, matrix, rhs: np.ndarray) -> np.ndarray:
        if self.mechanics_solver == CG:
            result = cg_ssor(matrix, rhs, tol=MECHANICS_CG_TOL,
                             max_iter=MECHANICS_CG_ITER_PER_DOF * rhs.size)
            if not result.converged:
                raise ConvergenceError("mechanics solve", result.iterations, result.residual,
                                       MECHANICS_CG_TOL)
            return result.x
        return sparse_direct_solve(matrix, rhs)

    def solve_heat(self, mesh: Mesh, case: TemperatureCase,
                   params: Optional[MaterialParams] = None) -> np.ndarray:
        """Steady temperature with the case's bottom-edge values"""
        params = params or self.params
        system = apply_dirichlet(assemble_heat(mesh, params, heat_conditions(case)))
        result = cg_ssor(system.matrix, system.rhs, tol=HEAT_CG_TOL, max_iter=HEAT_CG_MAX_ITER)
        self.last_heat = result
        if not result.converged:
            logger.error("Heat (%s) did not converge", case.name)
            raise ConvergenceError(f"heat solve ({case.name})", result.iterations, result.residual,
                                   HEAT_CG_TOL)
        logger.info("Heat (%s): CG %d iterations, relative residual %.3e",
                    case.name, result.iterations, result.residual)
        theta = result.x
        theta[system.dof_map.constrained] = system.dof_map.values
        return theta

    def solve_mechanics(self, mesh: Mesh, theta: Optional[np.ndarray],
                        params: Optional[MaterialParams] = None,
                        dirichlet: Optional[Sequence[DirichletCondition]] = None,
                        body_force: Optional[BodyForce] = None) -> SolutionState:
        """Linear initial solve, then u <- u + du until the free residual drops below tol

        The initial solve counts as the first iteration; it evaluates body_force
        with beta = 0.
        """
        params = params or self.params
        newton = self.newton
        conditions = displacement_conditions() if dirichlet is None else list(dirichlet)
        full_map = build_dof_map(mesh, FieldKind.VECTOR, conditions)
        step_map = full_map.homogeneous()
        geometry = default_geometry(mesh)
        n_dofs = full_map.n_dofs
        theta_field = np.zeros(mesh.n_nodes) if theta is None else theta
        state = SolutionState(theta=theta_field, u=np.zeros(n_dofs))

        linear = params.linearized()
        system = apply_dirichlet(assemble_newton_system(
            mesh, linear, state.u, theta, full_map, body_force, geometry))
        u = self._linear_solve(system.matrix, system.rhs)
        u[full_map.constrained] = full_map.values

        iteration = 1
        try:
            residual = assemble_residual_norm(mesh, params, u, theta, full_map, body_force, geometry)
            state.newton_history.append(residual)
            logger.info("Newton %2d: residual %.3e (linear initial guess)", iteration, residual)
            while residual > newton.tol and iteration < newton.max_iter:
                iteration += 1
                system = apply_dirichlet(assemble_newton_system(
                    mesh, params, u, theta, step_map, body_force, geometry))
                u = u + self._linear_solve(system.matrix, system.rhs)
                residual = assemble_residual_norm(mesh, params, u, theta, full_map, body_force, geometry)
                state.newton_history.append(residual)
                logger.info("Newton %2d: residual %.3e, max beta*N %.4f", iteration, residual,
                            strain_limit_certificate(mesh, params, u))
        except StrainLimitViolation as exc:
            raise exc.at_iteration(iteration) from exc

        state.u = u
        state.converged = residual <= newton.tol
        state.certificate = strain_limit_certificate(mesh, params, u)
        if state.converged:
            state.message = f"converged in {state.iterations} iterations"
            logger.info("Newton converged in %d iterations, residual %.3e", state.iterations, residual)
        else:
            state.message = f"not converged after {state.iterations} iterations (residual {residual:.3e})"
            logger.warning("Newton %s", state.message)
        return state

    def run_experiment(self, domain: Domain, case: TemperatureCase, model: ModelKind,
                       refinements: int, total_stress: bool = False,
                       profile_samples: Optional[int] = None,
                       mesh: Optional[Mesh] = None, theta: Optional[np.ndarray] = None) -> ExperimentResult:
        """Mesh, heat, mechanics and recovered fields for one combination"""
        start = time.perf_counter()
        mesh = mesh if mesh is not None else build_mesh(domain, refinements)
        if theta is None:
            theta = self.solve_heat(mesh, case)
        params = self.params.linearized() if model is ModelKind.LINEAR else self.params
        logger.info("Running %s / %s / %s on %d cells", domain.value, case.name, model.value, mesh.n_cells)

        state = self.solve_mechanics(mesh, theta, params)
        fields = recover_fields(mesh, params, state, total_stress=total_stress)
        profiles = []
        if mesh.has_slit:
            profiles = [sample_reference_line(fields, mesh, profile_samples, model, quantity)
                        for quantity in PROFILE_QUANTITIES]
        return ExperimentResult(domain, case, model, refinements, mesh, params, state, fields,
                                profiles, self.last_heat, time.perf_counter() - start)

    def run_pair(self, domain: Domain, case: TemperatureCase, refinements: int,
                 total_stress: bool = False, profile_samples: Optional[int] = None) -> PairResult:
        """Linear and nonlinear models on one mesh and one temperature field"""
        mesh = build_mesh(domain, refinements)
        theta = self.solve_heat(mesh, case)
        linear = self.run_experiment(domain, case, ModelKind.LINEAR, refinements, total_stress,
                                     profile_samples, mesh, theta)
        nonlinear = self.run_experiment(domain, case, ModelKind.NONLINEAR, refinements, total_stress,
                                        profile_samples, mesh, theta)
        return PairResult(linear, nonlinear)

    def beta_continuation(self, mesh: Mesh, theta: np.ndarray,
                          betas: Sequence[float]) -> List[Tuple[float, float]]:
        """L2 distance of the solution at each beta to the beta = 0 solution"""
        reference = self.solve_mechanics(mesh, theta, self.params.linearized())
        distances = []
        for beta in betas:
            state = self.solve_mechanics(mesh, theta, self.params.with_beta(beta))
            if not state.converged:
                raise LimitFemError(f"beta = {beta}: {state.message}")
            distance = l2_norm(mesh, state.u - reference.u, FieldKind.VECTOR)
            logger.info("beta = %g: L2 distance to the linear solution %.6e", beta, distance)
            distances.append((float(beta), distance))
        return distances


def solve_heat(mesh: Mesh, params: MaterialParams, case: TemperatureCase) -> np.ndarray:
    return ThermoelasticSolver(params).solve_heat(mesh, case)


def solve_mechanics(mesh: Mesh, params: MaterialParams, theta: Optional[np.ndarray],
                    newton_config: Optional[NewtonConfig] = None, **kwargs) -> SolutionState:
    return ThermoelasticSolver(params, newton_config).solve_mechanics(mesh, theta, **kwargs)


def run_experiment(domain: Domain, case: TemperatureCase, model: ModelKind, refinements: int,
                   params: Optional[MaterialParams] = None,
                   newton_config: Optional[NewtonConfig] = None, **kwargs) -> ExperimentResult:
    return ThermoelasticSolver(params, newton_config).run_experiment(domain, case, model, refinements, **kwargs)


def beta_continuation(mesh: Mesh, params: MaterialParams, theta: np.ndarray,
                      betas: Sequence[float],
                      newton_config: Optional[NewtonConfig] = None) -> List[Tuple[float, float]]:
    return ThermoelasticSolver(params, newton_config).beta_continuation(mesh, theta, betas)
