"""
Q1 reference element, Gauss quadrature, isoparametric mapping and dof management
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Optional, Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from errors import DofConflictError, MeshError
from mesh import Mesh
from models import BoundaryTag, FieldKind

logger = logging.getLogger(__name__)

# reference corners in counterclockwise order
REFERENCE_CORNERS = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])

BoundaryValue = Union[float, Callable[[np.ndarray, np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (n_points, 2) in [-1, 1]^2
    weights: np.ndarray  # (n_points,)
    degree: int  # exact for this polynomial degree per axis

    @property
    def size(self) -> int:
        return self.weights.size


def shape_values(xi, eta) -> np.ndarray:
    """Bilinear nodal basis; trailing axis of length 4"""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    sx, sy = REFERENCE_CORNERS[:, 0], REFERENCE_CORNERS[:, 1]
    return 0.25 * (1.0 + np.multiply.outer(xi, sx)) * (1.0 + np.multiply.outer(eta, sy))


def shape_gradients(xi, eta) -> np.ndarray:
    """Reference gradients, shape (..., 4, 2) with columns d/dxi, d/deta"""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    sx, sy = REFERENCE_CORNERS[:, 0], REFERENCE_CORNERS[:, 1]
    dxi = 0.25 * sx * (1.0 + np.multiply.outer(eta, sy))
    deta = 0.25 * sy * (1.0 + np.multiply.outer(xi, sx))
    return np.stack([dxi, deta], axis=-1)


def gauss_rule(points_per_axis: int) -> QuadratureRule:
    """Tensor-product Gauss-Legendre rule on [-1, 1]^2"""
    if not 1 <= points_per_axis <= 5:
        raise ValueError(f"unsupported Gauss order {points_per_axis}; use 1..5")
    x, w = leggauss(points_per_axis)
    xi, eta = np.meshgrid(x, x, indexing="ij")
    weights = np.outer(w, w).ravel()
    return QuadratureRule(np.column_stack([xi.ravel(), eta.ravel()]), weights, 2 * points_per_axis - 1)


def map_to_physical(cell_xy: np.ndarray, point) -> Tuple[np.ndarray, np.ndarray, float]:
    """Physical point, physical shape gradients (4, 2) and det(J) for one cell"""
    xi, eta = point
    values = shape_values(xi, eta)
    ref_grads = shape_gradients(xi, eta)
    jac = ref_grads.T @ cell_xy  # rows d/dxi, d/deta; columns x, y
    det = float(np.linalg.det(jac))
    if det <= 0.0:
        raise MeshError(f"non-positive Jacobian determinant {det:.3e} at {point}")
    grads = ref_grads @ np.linalg.inv(jac).T
    return values @ cell_xy, grads, det


@dataclass(frozen=True)
class CellGeometry:
    """Quadrature data for every cell of a mesh"""
    rule: QuadratureRule
    values: np.ndarray  # (n_q, 4)
    points: np.ndarray  # (n_cells, n_q, 2)
    grads: np.ndarray  # (n_cells, n_q, 4, 2)
    jxw: np.ndarray  # (n_cells, n_q)


def cell_geometry(mesh: Mesh, rule: QuadratureRule) -> CellGeometry:
    """Vectorised isoparametric map of all cells at all rule points"""
    xi, eta = rule.points[:, 0], rule.points[:, 1]
    values = shape_values(xi, eta)  # (q, 4)
    ref_grads = shape_gradients(xi, eta)  # (q, 4, 2)
    xy = mesh.cell_coordinates()  # (c, 4, 2)

    jac = np.einsum("qar,cax->cqrx", ref_grads, xy)
    det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
    if np.any(det <= 0.0):
        bad = int(np.argwhere(det <= 0.0)[0, 0])
        logger.error("Non-positive Jacobian in cell %d", bad)
        raise MeshError(f"non-positive Jacobian determinant in cell {bad}")

    inv = np.empty_like(jac)
    inv[..., 0, 0] = jac[..., 1, 1] / det
    inv[..., 1, 1] = jac[..., 0, 0] / det
    inv[..., 0, 1] = -jac[..., 0, 1] / det
    inv[..., 1, 0] = -jac[..., 1, 0] / det
    grads = np.einsum("qar,cqxr->cqax", ref_grads, inv)
    points = np.einsum("qa,cax->cqx", values, xy)
    return CellGeometry(rule, values, points, grads, det * rule.weights)


@dataclass(frozen=True)
class DirichletCondition:
    tag: BoundaryTag
    component: int
    value: BoundaryValue
    priority: int = 0


@dataclass(frozen=True)
class DofMap:
    kind: FieldKind
    n_nodes: int
    constrained: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def components(self) -> int:
        return self.kind.components

    @property
    def n_dofs(self) -> int:
        return self.n_nodes * self.components

    @property
    def free(self) -> np.ndarray:
        mask = np.ones(self.n_dofs, dtype=bool)
        mask[self.constrained] = False
        return np.flatnonzero(mask)

    def node_dof(self, node: int, component: int = 0) -> int:
        return node * self.components + component

    def cell_dofs(self, cells: np.ndarray) -> np.ndarray:
        """Global dofs per cell, (u_x, u_y) interleaved per node for vectors"""
        comp = self.components
        return (cells[:, :, None] * comp + np.arange(comp)).reshape(cells.shape[0], -1)

    def prescribed_vector(self) -> np.ndarray:
        """Full-length vector holding the prescribed values, zero elsewhere"""
        vec = np.zeros(self.n_dofs)
        vec[self.constrained] = self.values
        return vec

    def homogeneous(self) -> "DofMap":
        return DofMap(self.kind, self.n_nodes, self.constrained, np.zeros_like(self.values))


def _evaluate(value: BoundaryValue, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if callable(value):
        return np.broadcast_to(np.asarray(value(x, y), dtype=float), x.shape)
    return np.full(x.shape, float(value))


def build_dof_map(mesh: Mesh, kind: FieldKind,
                  dirichlet: Optional[Iterable[DirichletCondition]] = None) -> DofMap:
    """Nodal dof numbering plus Dirichlet constraints interpolated at nodes"""
    comp = kind.components
    prescribed: Dict[int, Tuple[float, int]] = {}
    for cond in dirichlet or ():
        if not 0 <= cond.component < comp:
            raise ValueError(f"component {cond.component} invalid for a {kind.value} field")
        nodes = mesh.boundary_nodes(cond.tag)
        if nodes.size == 0:
            continue
        vals = _evaluate(cond.value, mesh.points[nodes, 0], mesh.points[nodes, 1])
        for node, val in zip(nodes.tolist(), vals.tolist()):
            dof = node * comp + cond.component
            if dof not in prescribed:
                prescribed[dof] = (val, cond.priority)
                continue
            old, old_priority = prescribed[dof]
            if abs(old - val) <= 1e-12 * max(1.0, abs(old)):
                continue
            if cond.priority == old_priority:
                raise DofConflictError(dof, old, val)
            if cond.priority > old_priority:
                prescribed[dof] = (val, cond.priority)

    dofs = np.array(sorted(prescribed), dtype=int)
    values = np.array([prescribed[d][0] for d in dofs.tolist()], dtype=float)
    logger.debug("DofMap(%s): %d dofs, %d constrained", kind.value, mesh.n_nodes * comp, dofs.size)
    return DofMap(kind, mesh.n_nodes, dofs, values)


def interpolate(mesh: Mesh, func: Callable[[np.ndarray, np.ndarray], np.ndarray],
                kind: FieldKind = FieldKind.SCALAR) -> np.ndarray:
    """Nodal interpolant of a scalar or 2-vector function"""
    x, y = mesh.points[:, 0], mesh.points[:, 1]
    values = np.asarray(func(x, y), dtype=float)
    if kind is FieldKind.SCALAR:
        return np.broadcast_to(values, x.shape).copy()
    # vector functions return (2, n) or (n, 2)
    if values.shape == (2, x.size):
        values = values.T
    return values.reshape(-1).copy()


def l2_norm(mesh: Mesh, nodal: np.ndarray, kind: FieldKind = FieldKind.SCALAR,
            geometry: Optional[CellGeometry] = None,
            exact: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None) -> float:
    """sqrt(integral |u_h - exact|^2), 3x3 Gauss unless a geometry is given"""
    geometry = geometry if geometry is not None else cell_geometry(mesh, gauss_rule(3))
    values, _ = evaluate_at_quadrature(mesh, geometry, nodal, kind)
    if exact is not None:
        x, y = geometry.points[..., 0], geometry.points[..., 1]
        reference = np.asarray(exact(x, y), dtype=float)
        if kind is FieldKind.VECTOR and reference.shape[0] == 2 and reference.shape != values.shape:
            reference = np.moveaxis(reference, 0, -1)
        values = values - reference
    squared = values ** 2 if kind is FieldKind.SCALAR else np.sum(values ** 2, axis=-1)
    return float(np.sqrt(np.sum(geometry.jxw * squared)))


def evaluate_at_quadrature(mesh: Mesh, geometry: CellGeometry, nodal: np.ndarray,
                           kind: FieldKind = FieldKind.SCALAR) -> Tuple[np.ndarray, np.ndarray]:
    """Field values (c, q[, 2]) and gradients (c, q[, 2], 2) at quadrature points"""
    if kind is FieldKind.SCALAR:
        local = nodal[mesh.cells]  # (c, 4)
        return (np.einsum("qa,ca->cq", geometry.values, local),
                np.einsum("cqax,ca->cqx", geometry.grads, local))
    local = nodal.reshape(-1, 2)[mesh.cells]  # (c, 4, 2)
    return (np.einsum("qa,cai->cqi", geometry.values, local),
            np.einsum("cqax,cai->cqix", geometry.grads, local))
