"""
Manufactured-solution verification of the nonlinear mechanics solver

The exact field u* = (sin x sin y, cos x cos y) has a trace-free strain
eps_xx = -eps_yy = cos x sin y, so E[eps] = 2 mu eps and the energy norm is
N = 2 sqrt(mu) |cos x sin y|. Differentiating L(eps(u*)) then gives the
closed form f = -div L = 2 mu (Psi(N) + N Psi'(N)) u*.
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from constitutive import energy_norm_components, stress_components
from errors import StrainLimitViolation
from fem_core import DirichletCondition, l2_norm
from mesh import Mesh, build_unit_square
from models import BoundaryTag, FieldKind, MaterialParams, NewtonConfig
from solver import ThermoelasticSolver

logger = logging.getLogger(__name__)

MANUFACTURED_PARAMS = MaterialParams(lam=1.0, mu=1.0, a=1.0, beta=0.5)
FD_STEP = 1e-4
COERCIVITY_SAMPLES = 201

ALL_EDGES = (BoundaryTag.GAMMA1, BoundaryTag.GAMMA2, BoundaryTag.GAMMA3, BoundaryTag.GAMMA4)


def exact_displacement(x, y) -> np.ndarray:
    """u*(x, y) stacked on a trailing axis of length 2"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.stack([np.sin(x) * np.sin(y), np.cos(x) * np.cos(y)], axis=-1)


def exact_strain(x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.cos(x) * np.sin(y)
    return np.stack([w, -w, np.zeros_like(w)], axis=-1)


def exact_stress(x, y, params: MaterialParams) -> np.ndarray:
    return stress_components(exact_strain(x, y), params)


def manufactured_forcing(x, y, params: MaterialParams = MANUFACTURED_PARAMS) -> np.ndarray:
    """-div L(eps(u*)) in closed form"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = 2.0 * math.sqrt(params.mu) * np.abs(np.cos(x) * np.sin(y))
    if params.beta == 0.0:
        factor = np.ones_like(n)
    else:
        scaled = (params.beta * n) ** params.a
        if np.any(scaled >= 1.0):
            raise StrainLimitViolation(float(np.max(n)), params.beta)
        # Psi + N Psi' = (1 - s)^(-1/a) + s (1 - s)^(-1/a - 1) with s = (beta N)^a
        factor = (1.0 - scaled) ** (-1.0 / params.a) + scaled * (1.0 - scaled) ** (-1.0 / params.a - 1.0)
    return 2.0 * params.mu * np.asarray(factor)[..., None] * exact_displacement(x, y)


def numerical_forcing(x, y, params: MaterialParams = MANUFACTURED_PARAMS,
                      step: float = FD_STEP) -> np.ndarray:
    """-div of the exact stress by fourth-order central differences"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)

    def derivative(dx: float, dy: float) -> np.ndarray:
        def at(k: int) -> np.ndarray:
            return exact_stress(x + k * dx, y + k * dy, params)
        return (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * step)

    d_dx = derivative(step, 0.0)
    d_dy = derivative(0.0, step)
    fx = -(d_dx[..., 0] + d_dy[..., 2])
    fy = -(d_dx[..., 2] + d_dy[..., 1])
    return np.stack([fx, fy], axis=-1)


@dataclass(frozen=True)
class ManufacturedCase:
    params: MaterialParams = MANUFACTURED_PARAMS

    def displacement(self, x, y) -> np.ndarray:
        return exact_displacement(x, y)

    def forcing(self, x, y, params: Optional[MaterialParams] = None) -> np.ndarray:
        return manufactured_forcing(x, y, params or self.params)

    def boundary_conditions(self) -> List[DirichletCondition]:
        """Trace of u* on the whole boundary"""
        conditions = []
        for tag in ALL_EDGES:
            conditions.append(DirichletCondition(tag, 0, lambda x, y: np.sin(x) * np.sin(y)))
            conditions.append(DirichletCondition(tag, 1, lambda x, y: np.cos(x) * np.cos(y)))
        return conditions

    def max_scaled_norm(self, samples: int = COERCIVITY_SAMPLES) -> float:
        """max of beta * |E^(1/2)[eps(u*)]| on a uniform sample grid of the unit square"""
        ticks = np.linspace(0.0, 1.0, samples)
        xx, yy = np.meshgrid(ticks, ticks)
        norms = energy_norm_components(exact_strain(xx, yy), self.params)
        return float(self.params.beta * np.max(norms))

    def check_coercive(self, samples: int = COERCIVITY_SAMPLES) -> float:
        value = self.max_scaled_norm(samples)
        if value >= 1.0:
            raise StrainLimitViolation(value / self.params.beta, self.params.beta)
        return value


def l2_error(mesh: Mesh, u_h: np.ndarray, exact=exact_displacement) -> float:
    """||u_h - u*|| in L2 with a 3x3 Gauss rule"""
    return l2_norm(mesh, u_h, FieldKind.VECTOR, exact=exact)


@dataclass
class ConvergenceRow:
    cycle: int
    h: float
    l2_error: float
    rate: Optional[float] = None
    iterations: int = 0


@dataclass
class ConvergenceTable:
    rows: List[ConvergenceRow] = field(default_factory=list)

    @property
    def errors(self) -> List[float]:
        return [row.l2_error for row in self.rows]

    @property
    def rates(self) -> List[float]:
        return [row.rate for row in self.rows if row.rate is not None]


def solve_cycle(cycle: int, case: Optional[ManufacturedCase] = None,
                newton: Optional[NewtonConfig] = None, mechanics_solver: str = "direct") -> ConvergenceRow:
    """One refinement level, h = 2^-cycle, temperature identically zero"""
    case = case or ManufacturedCase()
    mesh = build_unit_square(cycle)
    solver = ThermoelasticSolver(case.params, newton, mechanics_solver)
    state = solver.solve_mechanics(mesh, None, dirichlet=case.boundary_conditions(),
                                   body_force=case.forcing)
    if not state.converged:
        logger.warning("MMS cycle %d: %s", cycle, state.message)
    error = l2_error(mesh, state.u, case.displacement)
    logger.info("MMS cycle %d: h=%g, L2 error %.6e", cycle, mesh.h, error)
    return ConvergenceRow(cycle, mesh.h, error, iterations=state.iterations)


def convergence_study(cycles: int, case: Optional[ManufacturedCase] = None,
                      newton: Optional[NewtonConfig] = None,
                      mechanics_solver: str = "direct") -> ConvergenceTable:
    """h-refinement study; rate_i = log2(error_{i-1} / error_i)"""
    if cycles < 2:
        raise ValueError("a convergence study needs at least two cycles")
    case = case or ManufacturedCase()
    case.check_coercive()
    table = ConvergenceTable()
    for cycle in range(1, cycles + 1):
        row = solve_cycle(cycle, case, newton, mechanics_solver)
        if table.rows:
            row.rate = math.log2(table.rows[-1].l2_error / row.l2_error)
        table.rows.append(row)
    return table


def format_convergence_table(table: ConvergenceTable) -> str:
    lines = [f"{'cycle':>5}  {'h':>10}  {'L2 error':>16}  {'rate':>8}",
             "-" * 45]
    for row in table.rows:
        rate = "-" if row.rate is None else f"{row.rate:.4f}"
        lines.append(f"{row.cycle:>5}  {row.h:>10.6f}  {row.l2_error:>16.12f}  {rate:>8}")
    return "\n".join(lines)


def write_convergence_csv(table: ConvergenceTable, path: Union[str, Path]) -> Path:
    path = Path(path)
    with open(path, "w") as f:
        f.write("cycle,h,l2_error,rate\n")
        for row in table.rows:
            rate = "" if row.rate is None else f"{row.rate:.17g}"
            f.write(f"{row.cycle},{row.h:.17g},{row.l2_error:.17g},{rate}\n")
    logger.info("Wrote %s", path)
    return path
