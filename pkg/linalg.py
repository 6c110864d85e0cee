"""
Sparse storage, SSOR-preconditioned conjugate gradients and direct solves
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu, spsolve_triangular

from errors import SingularSystemError, SolverBreakdownError

logger = logging.getLogger(__name__)

CompressedMatrix = sp.csr_matrix


def to_compressed(matrix) -> sp.csr_matrix:
    """CSR copy with summed duplicates and sorted column indices"""
    csr = sp.csr_matrix(matrix, dtype=float)
    csr.sum_duplicates()
    csr.sort_indices()
    return csr


@dataclass
class CGResult:
    x: np.ndarray
    iterations: int
    residual: float  # relative, ||b - A x|| / ||b||
    converged: bool
    history: List[float] = field(default_factory=list)


class SSORPreconditioner:
    """M = w/(2-w) (D/w + L) (D/w)^-1 (D/w + U) for symmetric A"""

    def __init__(self, matrix: sp.csr_matrix, omega: float = 1.0):
        if not 0.0 < omega < 2.0:
            raise ValueError(f"SSOR relaxation must lie in (0, 2), got {omega}")
        diag = matrix.diagonal()
        if np.any(diag == 0.0):
            raise SolverBreakdownError("SSOR needs a zero-free diagonal")
        self.omega = omega
        self.scaled_diag = diag / omega
        self.lower = to_compressed(sp.tril(matrix, k=-1) + sp.diags(self.scaled_diag))
        self.upper = to_compressed(sp.triu(matrix, k=1) + sp.diags(self.scaled_diag))

    def apply(self, r: np.ndarray) -> np.ndarray:
        y = spsolve_triangular(self.lower, np.asarray(r, dtype=float), lower=True)
        z = spsolve_triangular(self.upper, self.scaled_diag * y, lower=False)
        return (2.0 - self.omega) / self.omega * z


def ssor_apply(matrix, r: np.ndarray, omega: float = 1.0) -> np.ndarray:
    return SSORPreconditioner(to_compressed(matrix), omega).apply(np.asarray(r, dtype=float))


def cg_ssor(matrix, b: np.ndarray, tol: float = 1e-12, max_iter: int = 10000,
            omega: float = 1.0, x0: Optional[np.ndarray] = None,
            callback: Optional[Callable[[np.ndarray], None]] = None) -> CGResult:
    """Preconditioned conjugate gradients; non-convergence is reported, not raised"""
    A = to_compressed(matrix)
    b = np.asarray(b, dtype=float)
    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        return CGResult(np.zeros_like(b), 0, 0.0, True, [0.0])

    precond = SSORPreconditioner(A, omega)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x
    z = precond.apply(r)
    p = z.copy()
    rz = r @ z
    history = [np.linalg.norm(r) / b_norm]

    iterations = 0
    while history[-1] > tol and iterations < max_iter:
        q = A @ p
        pq = p @ q
        if pq == 0.0:
            raise SolverBreakdownError(f"CG breakdown: p.Ap = 0 at iteration {iterations}")
        step = rz / pq
        x += step * p
        r -= step * q
        iterations += 1
        history.append(np.linalg.norm(r) / b_norm)
        if callback is not None:
            callback(x)
        if history[-1] <= tol:
            break
        z = precond.apply(r)
        rz_next = r @ z
        p = z + (rz_next / rz) * p
        rz = rz_next

    # the recurrence drifts; report the true residual
    final = np.linalg.norm(b - A @ x) / b_norm
    converged = final <= tol
    if not converged:
        logger.warning("CG stopped after %d iterations at relative residual %.3e (tol %.1e)",
                       iterations, final, tol)
    else:
        logger.debug("CG converged in %d iterations, relative residual %.3e", iterations, final)
    return CGResult(x, iterations, float(final), converged, history)


def sparse_direct_solve(matrix, b: np.ndarray) -> np.ndarray:
    """LU solve with a fill-reducing column ordering"""
    A = sp.csc_matrix(matrix, dtype=float)
    try:
        lu = splu(A, permc_spec="COLAMD")
    except RuntimeError as exc:
        raise SingularSystemError(f"direct factorisation failed: {exc}", _zero_pivot(A)) from exc
    x = lu.solve(np.asarray(b, dtype=float))
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("direct solve produced non-finite values", _zero_pivot(A))
    return x


def _zero_pivot(A: sp.spmatrix) -> int:
    row_norms = np.asarray(abs(A).sum(axis=1)).ravel()
    empty = np.flatnonzero(row_norms == 0.0)
    return int(empty[0]) if empty.size else -1
