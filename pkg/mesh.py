"""
Structured quadrilateral meshes of the unit square, with and without the edge slit
"""
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from types import MappingProxyType
from typing import Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from errors import MeshError
from models import BoundaryTag, Node, QuadCell

logger = logging.getLogger(__name__)

GEOM_TOL = 1e-12

# local face f joins local nodes (f, f + 1 mod 4): bottom, right, top, left
LOCAL_FACES = ((0, 1), (1, 2), (2, 3), (3, 0))

FaceKey = Tuple[int, int]


@dataclass(frozen=True)
class Mesh:
    points: np.ndarray  # (n_nodes, 2)
    cells: np.ndarray  # (n_cells, 4), counterclockwise
    h: float
    tip_node: Optional[int] = None
    duplicate_pairs: Tuple[Tuple[int, int], ...] = ()  # (lower copy, upper copy)
    face_tags: Mapping[FaceKey, BoundaryTag] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.face_tags, MappingProxyType):
            object.__setattr__(self, "face_tags", MappingProxyType(dict(self.face_tags)))

    @property
    def n_nodes(self) -> int:
        return self.points.shape[0]

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def has_slit(self) -> bool:
        return self.tip_node is not None

    @property
    def nodes(self) -> List[Node]:
        return [Node(i, float(x), float(y)) for i, (x, y) in enumerate(self.points)]

    @property
    def quad_cells(self) -> List[QuadCell]:
        return [QuadCell(tuple(int(n) for n in c)) for c in self.cells]

    def cell_coordinates(self) -> np.ndarray:
        """Corner coordinates of every cell, shape (n_cells, 4, 2)"""
        return self.points[self.cells]

    def cell_areas(self) -> np.ndarray:
        xy = self.cell_coordinates()
        x, y = xy[..., 0], xy[..., 1]
        return 0.5 * np.sum(x * np.roll(y, -1, axis=1) - np.roll(x, -1, axis=1) * y, axis=1)

    def face_nodes(self, key: FaceKey) -> Tuple[int, int]:
        cell, local = key
        a, b = LOCAL_FACES[local]
        return int(self.cells[cell, a]), int(self.cells[cell, b])

    def boundary_nodes(self, tag: BoundaryTag) -> np.ndarray:
        """Sorted ids of all nodes lying on faces with the given tag"""
        ids = set()
        for key, face_tag in self.face_tags.items():
            if face_tag is tag:
                ids.update(self.face_nodes(key))
        return np.array(sorted(ids), dtype=int)

    def nodes_on_line(self, y: float, x_max: float = 1.0) -> np.ndarray:
        """Node ids with the given y and x <= x_max, ordered by x"""
        mask = (np.abs(self.points[:, 1] - y) < GEOM_TOL) & (self.points[:, 0] <= x_max + GEOM_TOL)
        ids = np.flatnonzero(mask)
        return ids[np.argsort(self.points[ids, 0], kind="stable")]


def _grid(refinements: int) -> Tuple[np.ndarray, np.ndarray, int]:
    n = 2 ** refinements
    ticks = np.linspace(0.0, 1.0, n + 1)
    xx, yy = np.meshgrid(ticks, ticks)
    points = np.column_stack([xx.ravel(), yy.ravel()])

    i, j = np.meshgrid(np.arange(n), np.arange(n))
    base = (j * (n + 1) + i).ravel()
    cells = np.column_stack([base, base + 1, base + n + 2, base + n + 1])
    return points, cells, n


def _freeze(mesh: Mesh) -> Mesh:
    mesh.points.setflags(write=False)
    mesh.cells.setflags(write=False)
    return mesh


def build_unit_square(refinements: int) -> Mesh:
    """Uniform (2^r x 2^r) grid of the unit square"""
    if refinements < 0:
        raise MeshError(f"refinements must be non-negative, got {refinements}")
    points, cells, n = _grid(refinements)
    mesh = Mesh(points=points, cells=cells, h=1.0 / n)
    mesh = replace(mesh, face_tags=classify_boundary(mesh))
    logger.info("Built unit square: %d cells, %d nodes, h=%g", mesh.n_cells, mesh.n_nodes, mesh.h)
    return _freeze(mesh)


def build_slit_square(refinements: int) -> Mesh:
    """Unit square with a slit from the tip (0.5, 0.5) to the right edge (1, 0.5)"""
    if refinements < 1:
        raise MeshError("slit mesh needs refinements >= 1 so that y = 0.5 is a grid line")
    points, cells, n = _grid(refinements)
    half = n // 2
    row = half * (n + 1)
    tip = row + half

    # grid points strictly right of the tip on the slit get an upper copy
    lower_ids = np.arange(row + half + 1, row + n + 1)
    upper_ids = np.arange(points.shape[0], points.shape[0] + lower_ids.size)
    points = np.vstack([points, points[lower_ids]])

    remap = dict(zip(lower_ids.tolist(), upper_ids.tolist()))
    upper_row_cells = np.arange(half * n, (half + 1) * n)
    for c in upper_row_cells:
        for local in (0, 1):  # bottom corners of cells just above the slit
            node = int(cells[c, local])
            if node in remap:
                cells[c, local] = remap[node]

    pairs = tuple(zip(lower_ids.tolist(), upper_ids.tolist()))
    mesh = Mesh(points=points, cells=cells, h=1.0 / n, tip_node=int(tip), duplicate_pairs=pairs)
    mesh = replace(mesh, face_tags=classify_boundary(mesh))
    logger.info("Built slit square: %d cells, %d nodes (%d duplicated), h=%g",
                mesh.n_cells, mesh.n_nodes, len(pairs), mesh.h)
    return _freeze(mesh)


def classify_boundary(mesh: Mesh) -> Dict[FaceKey, BoundaryTag]:
    """Tag every exterior face with the boundary part it lies on"""
    counts = Counter()
    for cell in mesh.cells:
        for a, b in LOCAL_FACES:
            counts[frozenset((int(cell[a]), int(cell[b])))] += 1

    tags: Dict[FaceKey, BoundaryTag] = {}
    centroids = mesh.cell_coordinates().mean(axis=1)
    for c, cell in enumerate(mesh.cells):
        for local, (a, b) in enumerate(LOCAL_FACES):
            if counts[frozenset((int(cell[a]), int(cell[b])))] > 1:
                continue
            p, q = mesh.points[cell[a]], mesh.points[cell[b]]
            tags[(c, local)] = _tag_face(p, q, centroids[c], c, local)
    return tags


def _tag_face(p: np.ndarray, q: np.ndarray, centroid: np.ndarray, cell: int, local: int) -> BoundaryTag:
    def both(axis: int, value: float) -> bool:
        return abs(p[axis] - value) < GEOM_TOL and abs(q[axis] - value) < GEOM_TOL

    if both(1, 0.0):
        return BoundaryTag.GAMMA1
    if both(0, 1.0):
        return BoundaryTag.GAMMA2
    if both(1, 1.0):
        return BoundaryTag.GAMMA3
    if both(0, 0.0):
        return BoundaryTag.GAMMA4
    if both(1, 0.5) and min(p[0], q[0]) >= 0.5 - GEOM_TOL:
        return BoundaryTag.CRACK_UPPER if centroid[1] > 0.5 else BoundaryTag.CRACK_LOWER
    logger.error("Untaggable exterior face %d of cell %d: %s-%s", local, cell, p, q)
    raise MeshError(f"exterior face {local} of cell {cell} lies on no known boundary")


def write_mesh_text(mesh: Mesh, path: Union[str, Path]) -> Path:
    """Dump nodes ("id x y") and cells ("id n0 n1 n2 n3") as plain text"""
    path = Path(path)
    lines = [f"{node.id} {node.x:.17g} {node.y:.17g}" for node in mesh.nodes]
    lines += [f"{c} " + " ".join(str(n) for n in cell.node_ids) for c, cell in enumerate(mesh.quad_cells)]
    path.write_text("\n".join(lines) + "\n")
    return path
