"""
Global assembly of the heat system, the Newton system for mechanics and the residual
"""
import logging
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional

import numpy as np
import scipy.sparse as sp

from constitutive import (METRIC, energy_norm_components, find_strain_limit_violation,
                          stress_components, tangent_form_matrix)
from errors import SingularSystemError, StrainLimitViolation
from fem_core import (CellGeometry, DirichletCondition, DofMap, build_dof_map, cell_geometry,
                      evaluate_at_quadrature, gauss_rule)
from mesh import Mesh
from models import FieldKind, MaterialParams

logger = logging.getLogger(__name__)

# f(x, y, params) -> array of shape x.shape + (2,)
BodyForce = Callable[[np.ndarray, np.ndarray, MaterialParams], np.ndarray]

ASSEMBLY_GAUSS_POINTS = 2


@dataclass(frozen=True)
class SparseSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    dof_map: DofMap

    @property
    def size(self) -> int:
        return self.rhs.size


def default_geometry(mesh: Mesh, geometry: Optional[CellGeometry] = None) -> CellGeometry:
    return geometry if geometry is not None else cell_geometry(mesh, gauss_rule(ASSEMBLY_GAUSS_POINTS))


def scatter_matrix(dofs: np.ndarray, local: np.ndarray, n_dofs: int) -> sp.csr_matrix:
    """Sum element matrices (c, n, n) into a CSR matrix"""
    n = dofs.shape[1]
    rows = np.repeat(dofs, n, axis=1).ravel()
    cols = np.tile(dofs, (1, n)).ravel()
    matrix = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n_dofs, n_dofs)).tocsr()
    matrix.sum_duplicates()
    matrix.sort_indices()
    return matrix


def scatter_vector(dofs: np.ndarray, local: np.ndarray, n_dofs: int) -> np.ndarray:
    return np.bincount(dofs.ravel(), weights=local.ravel(), minlength=n_dofs)


def strain_operator(geometry: CellGeometry) -> np.ndarray:
    """B with eps_k = B[c, q, k, :] @ u_cell; rows (xx, yy, xy), dofs interleaved"""
    gx = geometry.grads[..., 0]
    gy = geometry.grads[..., 1]
    n_cells, n_q, n_nodes = gx.shape
    B = np.zeros((n_cells, n_q, 3, 2 * n_nodes))
    B[..., 0, 0::2] = gx
    B[..., 1, 1::2] = gy
    B[..., 2, 0::2] = 0.5 * gy
    B[..., 2, 1::2] = 0.5 * gx
    return B


def strains_at_quadrature(mesh: Mesh, geometry: CellGeometry, u: np.ndarray) -> np.ndarray:
    """Strain components (c, q, 3) of a nodal displacement vector"""
    B = strain_operator(geometry)
    local = u.reshape(-1, 2)[mesh.cells].reshape(mesh.n_cells, -1)
    return np.einsum("cqkd,cd->cqk", B, local)


def _check_coercive(norms: np.ndarray, params: MaterialParams) -> None:
    index = find_strain_limit_violation(norms, params)
    if index is not None:
        cell = int(index[0])
        r = float(norms[index])
        logger.error("Strain limit violated in cell %d: beta*r = %.6g", cell, params.beta * r)
        raise StrainLimitViolation(r, params.beta, cell=cell)


def assemble_mass_matrix(mesh: Mesh, geometry: Optional[CellGeometry] = None) -> sp.csr_matrix:
    """Scalar Q1 mass matrix"""
    geometry = default_geometry(mesh, geometry)
    local = np.einsum("cq,qa,qb->cab", geometry.jxw, geometry.values, geometry.values)
    return scatter_matrix(mesh.cells, local, mesh.n_nodes)


def assemble_heat(mesh: Mesh, params: MaterialParams, theta_bc: Iterable[DirichletCondition],
                  source: Optional[float] = None, geometry: Optional[CellGeometry] = None) -> SparseSystem:
    """k grad(theta) . grad(q) = g q with natural zero flux off the Dirichlet part"""
    dof_map = build_dof_map(mesh, FieldKind.SCALAR, list(theta_bc))
    if dof_map.constrained.size == 0:
        raise SingularSystemError("heat system has no Dirichlet dofs; temperature is defined up to a constant")
    geometry = default_geometry(mesh, geometry)
    g = params.g if source is None else source

    local = params.k * np.einsum("cq,cqax,cqbx->cab", geometry.jxw, geometry.grads, geometry.grads)
    local_rhs = g * np.einsum("cq,qa->ca", geometry.jxw, geometry.values)
    matrix = scatter_matrix(mesh.cells, local, dof_map.n_dofs)
    rhs = scatter_vector(mesh.cells, local_rhs, dof_map.n_dofs)
    return SparseSystem(matrix, rhs, dof_map)


def _thermal_load(mesh: Mesh, geometry: CellGeometry, params: MaterialParams,
                  theta: Optional[np.ndarray]) -> np.ndarray:
    """Local vectors (c, 8) of integral alpha grad(theta) . phi"""
    if theta is None or params.alpha == 0.0:
        return np.zeros((mesh.n_cells, 8))
    _, grad_theta = evaluate_at_quadrature(mesh, geometry, theta)
    local = params.alpha * np.einsum("cq,qa,cqi->cai", geometry.jxw, geometry.values, grad_theta)
    return local.reshape(mesh.n_cells, 8)


def _body_load(geometry: CellGeometry, params: MaterialParams,
               body_force: Optional[BodyForce]) -> Optional[np.ndarray]:
    if body_force is None:
        return None
    x, y = geometry.points[..., 0], geometry.points[..., 1]
    force = np.asarray(body_force(x, y, params), dtype=float)  # (c, q, 2)
    local = np.einsum("cq,qa,cqi->cai", geometry.jxw, geometry.values, force)
    return local.reshape(local.shape[0], 8)


def _internal_load(B: np.ndarray, geometry: CellGeometry, stress: np.ndarray) -> np.ndarray:
    """Local vectors (c, 8) of integral L(eps(u)) : eps(phi)"""
    return np.einsum("cq,cqk,cqkd->cd", geometry.jxw, METRIC * stress, B)


def assemble_newton_system(mesh: Mesh, params: MaterialParams, u_n: np.ndarray,
                           theta: Optional[np.ndarray], dof_map: DofMap,
                           body_force: Optional[BodyForce] = None,
                           geometry: Optional[CellGeometry] = None) -> SparseSystem:
    """Tangent matrix at u_n and the right-hand side -(L(eps(u_n)), eps(v)) - (alpha grad theta, v) + (f, v)"""
    geometry = default_geometry(mesh, geometry)
    B = strain_operator(geometry)
    dofs = dof_map.cell_dofs(mesh.cells)
    eps = np.einsum("cqkd,cd->cqk", B, u_n[dofs])
    _check_coercive(energy_norm_components(eps, params), params)

    W = tangent_form_matrix(eps, params)
    WB = np.einsum("cqkl,cqld->cqkd", W, B)
    local = np.einsum("cq,cqke,cqkd->ced", geometry.jxw, B, WB)
    matrix = scatter_matrix(dofs, local, dof_map.n_dofs)

    local_rhs = -_internal_load(B, geometry, stress_components(eps, params))
    local_rhs -= _thermal_load(mesh, geometry, params, theta)
    body = _body_load(geometry, params, body_force)
    if body is not None:
        local_rhs += body
    rhs = scatter_vector(dofs, local_rhs, dof_map.n_dofs)
    return SparseSystem(matrix, rhs, dof_map)


def assemble_residual(mesh: Mesh, params: MaterialParams, u_n: np.ndarray,
                      theta: Optional[np.ndarray], dof_map: DofMap,
                      body_force: Optional[BodyForce] = None,
                      geometry: Optional[CellGeometry] = None) -> np.ndarray:
    """Full residual vector (L(eps(u_n)), eps(phi_i)) + (alpha grad theta, phi_i) - (f, phi_i)"""
    geometry = default_geometry(mesh, geometry)
    eps = strains_at_quadrature(mesh, geometry, u_n)
    _check_coercive(energy_norm_components(eps, params), params)
    dofs = dof_map.cell_dofs(mesh.cells)

    stress = stress_components(eps, params)
    residual = scatter_vector(dofs, _internal_load(strain_operator(geometry), geometry, stress), dof_map.n_dofs)
    residual += scatter_vector(dofs, _thermal_load(mesh, geometry, params, theta), dof_map.n_dofs)
    body = _body_load(geometry, params, body_force)
    if body is not None:
        residual -= scatter_vector(dofs, body, dof_map.n_dofs)
    return residual


def assemble_residual_norm(mesh: Mesh, params: MaterialParams, u_n: np.ndarray,
                           theta: Optional[np.ndarray], dof_map: DofMap,
                           body_force: Optional[BodyForce] = None,
                           geometry: Optional[CellGeometry] = None) -> float:
    """Euclidean norm of the residual over free dofs"""
    residual = assemble_residual(mesh, params, u_n, theta, dof_map, body_force, geometry)
    return float(np.linalg.norm(residual[dof_map.free]))


def apply_dirichlet(system: SparseSystem, dof_map: Optional[DofMap] = None) -> SparseSystem:
    """Symmetric elimination: constrained columns to the rhs, identity rows"""
    dof_map = system.dof_map if dof_map is None else dof_map
    if dof_map.constrained.size == 0:
        return replace(system, dof_map=dof_map)

    prescribed = dof_map.prescribed_vector()
    rhs = system.rhs - system.matrix @ prescribed
    rhs[dof_map.constrained] = dof_map.values

    keep = np.ones(dof_map.n_dofs)
    keep[dof_map.constrained] = 0.0
    K = sp.diags(keep)
    matrix = (K @ system.matrix @ K + sp.diags(1.0 - keep)).tocsr()
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return SparseSystem(matrix, rhs, dof_map)
