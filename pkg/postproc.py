"""
Field recovery, reference-line sampling and file export
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np

from assembly import default_geometry, strains_at_quadrature
from constitutive import IDENTITY, energy_norm_components, stress_components
from errors import MeshError
from fem_core import QuadratureRule, REFERENCE_CORNERS, cell_geometry
from mesh import Mesh
from models import MaterialParams, ModelKind, SolutionState

logger = logging.getLogger(__name__)

CORNER_AVERAGE = "corner-average"
NODAL = "nodal"

FIELD_NAMES = ("theta", "u_x", "u_y", "u_mag",
               "T_xx", "T_yy", "T_xy", "eps_xx", "eps_yy", "eps_xy")

REFERENCE_LINE_Y = 0.5
REFERENCE_LINE_END = 0.5

VTK_CELL_QUAD = 9

PathLike = Union[str, Path]


@dataclass
class RecoveredField:
    name: str
    values: np.ndarray  # one value per mesh node
    method: str = CORNER_AVERAGE


@dataclass
class RecoveredFields:
    fields: Dict[str, RecoveredField] = field(default_factory=dict)
    flagged: bool = False  # some corner strain left the coercive region
    total_stress: bool = False

    def __getitem__(self, name: str) -> np.ndarray:
        return self.fields[name].values

    def __contains__(self, name: str) -> bool:
        return name in self.fields

    def names(self) -> List[str]:
        return list(self.fields)

    def as_arrays(self) -> Dict[str, np.ndarray]:
        return {name: f.values for name, f in self.fields.items()}


@dataclass(frozen=True)
class LineProfile:
    x: np.ndarray
    values: np.ndarray
    quantity: str
    model: ModelKind

    @property
    def size(self) -> int:
        return self.x.size


def _corner_geometry(mesh: Mesh):
    corners = QuadratureRule(REFERENCE_CORNERS.copy(), np.ones(4), 1)
    return cell_geometry(mesh, corners)


def _safe_stress(eps: np.ndarray, params: MaterialParams) -> Tuple[np.ndarray, bool]:
    """Mechanical stress, NaN where beta * r >= 1"""
    if params.beta <= 0.0:
        return stress_components(eps, params), False
    bad = params.beta * energy_norm_components(eps, params) >= 1.0
    if not np.any(bad):
        return stress_components(eps, params), False
    stress = stress_components(np.where(bad[..., None], 0.0, eps), params)
    stress[bad] = np.nan
    return stress, True


def average_to_nodes(mesh: Mesh, corner_values: np.ndarray) -> np.ndarray:
    """Area-weighted average of per-cell corner values (c, 4[, k]) onto the nodes"""
    areas = mesh.cell_areas()
    weight = np.bincount(mesh.cells.ravel(), weights=np.repeat(areas, 4), minlength=mesh.n_nodes)
    weight[weight == 0.0] = 1.0
    if corner_values.ndim == 2:
        acc = np.bincount(mesh.cells.ravel(), weights=(areas[:, None] * corner_values).ravel(),
                          minlength=mesh.n_nodes)
        return acc / weight
    return np.column_stack([average_to_nodes(mesh, corner_values[..., k])
                            for k in range(corner_values.shape[-1])])


def quadrature_fields(mesh: Mesh, params: MaterialParams, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Strain and mechanical stress components at the 2x2 Gauss points"""
    geometry = default_geometry(mesh)
    eps = strains_at_quadrature(mesh, geometry, u)
    return eps, stress_components(eps, params)


def recover_fields(mesh: Mesh, params: MaterialParams, state: SolutionState,
                   total_stress: bool = False) -> RecoveredFields:
    """Nodal theta, displacement, stress and strain from a solved state

    Strain is averaged to the nodes first; nodal stress is the constitutive
    map of the nodal strain.
    """
    eps = strains_at_quadrature(mesh, _corner_geometry(mesh), state.u)  # (c, 4 corners, 3)
    nodal_eps = average_to_nodes(mesh, eps)
    nodal_stress, flagged = _safe_stress(nodal_eps, params)
    if flagged:
        logger.warning("Recovered strain leaves the coercive region; stress set to NaN there")
    if total_stress:
        nodal_stress = nodal_stress - params.alpha * np.asarray(state.theta)[:, None] * IDENTITY
    disp = state.displacement()

    result = RecoveredFields(flagged=flagged, total_stress=total_stress)
    for name, values in (("theta", state.theta), ("u_x", disp[:, 0]), ("u_y", disp[:, 1]),
                         ("u_mag", np.linalg.norm(disp, axis=1))):
        result.fields[name] = RecoveredField(name, np.asarray(values, dtype=float).copy(), NODAL)
    for k, suffix in enumerate(("xx", "yy", "xy")):
        result.fields[f"T_{suffix}"] = RecoveredField(f"T_{suffix}", nodal_stress[:, k])
        result.fields[f"eps_{suffix}"] = RecoveredField(f"eps_{suffix}", nodal_eps[:, k])
    return result


def sample_reference_line(fields: RecoveredFields, mesh: Mesh, n_samples: Optional[int] = None,
                          model: ModelKind = ModelKind.NONLINEAR,
                          quantity: str = "T_yy") -> LineProfile:
    """Values of one quantity along y = 0.5 from x = 0 up to the slit tip"""
    if not mesh.has_slit:
        raise MeshError("reference line sampling needs the slit mesh")
    if quantity not in fields:
        raise KeyError(f"unknown field {quantity!r}")
    line_nodes = mesh.nodes_on_line(REFERENCE_LINE_Y, x_max=REFERENCE_LINE_END)
    node_x = mesh.points[line_nodes, 0]
    if not n_samples:
        xs = node_x.copy()
    elif n_samples < 2:
        raise ValueError("a line profile needs at least two samples")
    else:
        xs = np.linspace(0.0, REFERENCE_LINE_END, n_samples)
    values = np.interp(xs, node_x, fields[quantity][line_nodes])
    return LineProfile(xs, values, quantity, model)


def write_vtk(mesh: Mesh, fields: Union[RecoveredFields, Mapping[str, np.ndarray]], path: PathLike,
              names: Optional[Iterable[str]] = None, title: str = "limitfem fields") -> Path:
    """Legacy ASCII unstructured grid with point scalars"""
    arrays = fields.as_arrays() if isinstance(fields, RecoveredFields) else dict(fields)
    selected = list(names) if names is not None else list(arrays)
    for name in selected:
        if np.asarray(arrays[name]).shape[0] != mesh.n_nodes:
            raise ValueError(f"field {name!r} does not cover every node")

    path = Path(path)
    with open(path, "w") as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write(f"{title}\n")
        f.write("ASCII\n")
        f.write("DATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {mesh.n_nodes} double\n")
        for x, y in mesh.points:
            f.write(f"{x:.17g} {y:.17g} 0\n")
        f.write(f"CELLS {mesh.n_cells} {5 * mesh.n_cells}\n")
        for cell in mesh.cells:
            f.write("4 " + " ".join(str(int(n)) for n in cell) + "\n")
        f.write(f"CELL_TYPES {mesh.n_cells}\n")
        f.write(f"{VTK_CELL_QUAD}\n" * mesh.n_cells)
        f.write(f"POINT_DATA {mesh.n_nodes}\n")
        for name in selected:
            f.write(f"SCALARS {name} double 1\n")
            f.write("LOOKUP_TABLE default\n")
            for value in np.asarray(arrays[name], dtype=float):
                f.write(f"{value:.17g}\n")
    logger.info("Wrote %s (%d fields)", path, len(selected))
    return path


def write_fields_csv(mesh: Mesh, fields: RecoveredFields, path: PathLike) -> Path:
    """One row per node: id, coordinates and every recovered field"""
    path = Path(path)
    names = fields.names()
    with open(path, "w") as f:
        f.write(",".join(["node", "x", "y"] + names) + "\n")
        for node, (x, y) in enumerate(mesh.points):
            row = [str(node), f"{x:.17g}", f"{y:.17g}"]
            row += [f"{fields[name][node]:.17g}" for name in names]
            f.write(",".join(row) + "\n")
    logger.info("Wrote %s", path)
    return path


def write_profile_csv(profile: LineProfile, path: PathLike) -> Path:
    path = Path(path)
    with open(path, "w") as f:
        f.write("x,value,model\n")
        for x, value in zip(profile.x, profile.values):
            f.write(f"{x:.17g},{value:.17g},{profile.model.value}\n")
    logger.info("Wrote %s (%d samples of %s)", path, profile.size, profile.quantity)
    return path


def profile_filename(profile: LineProfile) -> str:
    return f"profile_{profile.quantity}_{profile.model.value}.csv"
