"""
Exceptions raised by the solver stack
"""
from typing import Optional


class LimitFemError(Exception):
    """Base class for solver errors"""


class MeshError(LimitFemError):
    pass


class DofConflictError(LimitFemError):
    def __init__(self, dof: int, first: float, second: float):
        self.dof = dof
        super().__init__(
            f"Conflicting Dirichlet values at dof {dof}: {first!r} vs {second!r}"
        )


class StrainLimitViolation(LimitFemError):
    def __init__(self, r: float, beta: float, cell: Optional[int] = None,
                 iteration: Optional[int] = None):
        self.r = r
        self.beta = beta
        self.limit = 1.0 / beta if beta > 0 else float("inf")
        self.cell = cell
        self.iteration = iteration
        where = ""
        if cell is not None:
            where += f" in cell {cell}"
        if iteration is not None:
            where += f" at Newton iteration {iteration}"
        super().__init__(
            f"Strain limit violated{where}: energy norm {r:.6g} >= limit {self.limit:.6g}"
        )

    def at_iteration(self, iteration: int) -> "StrainLimitViolation":
        return StrainLimitViolation(self.r, self.beta, self.cell, iteration)


class SingularSystemError(LimitFemError):
    def __init__(self, message: str, pivot: int = -1):
        self.pivot = pivot
        super().__init__(message if pivot < 0 else f"{message} (pivot {pivot})")


class SolverBreakdownError(LimitFemError):
    pass


class ConvergenceError(SolverBreakdownError):
    """Iterative linear solve stopped above its tolerance"""

    def __init__(self, what: str, iterations: int, residual: float, tol: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"{what}: CG stopped after {iterations} iterations at relative residual "
            f"{residual:.3e} (tol {tol:.1e})"
        )


class ConfigError(LimitFemError):
    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        self.key = key
        self.line = line
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if key is not None:
            prefix += f"{key}: "
        super().__init__(prefix + message)
