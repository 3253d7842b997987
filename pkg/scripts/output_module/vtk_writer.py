"""Per-report-step cell fields as legacy ASCII VTK files.

Each active cell is written as its own hexahedron (eight private corner points), so
the geometry follows the cell depths exactly; the vertical axis is elevation, i.e.
minus depth.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import meshio
import numpy as np

from reservoir_module.grid import Grid
from reservoir_module.model import BlackOilModel, PrimaryVariables
from reservoir_module.pvt import Phase
from reservoir_module.units import UnitSystem

logger = logging.getLogger(__name__)

FIELD_ARRAYS = ("PRESSURE", "SWAT", "SGAS", "SOIL", "RS")
# corner offsets in VTK hexahedron order: bottom face counter-clockwise, then top face
HEX_CORNERS = np.array([
    [-1, -1, -1], [1, -1, -1], [1, 1, -1], [-1, 1, -1],
    [-1, -1, 1], [1, -1, 1], [1, 1, 1], [-1, 1, 1],
], dtype=float)


@dataclass(frozen=True)
class FieldSnapshot:
    """Cell arrays of one report step, already in output units."""

    step: int
    time: float  # s
    arrays: dict[str, np.ndarray]


def snapshot_fields(
    model: BlackOilModel, primary: PrimaryVariables, step: int, time: float, units: UnitSystem
) -> FieldSnapshot:
    """Evaluate PRESSURE (oil), SWAT, SGAS, SOIL and RS for every active cell."""
    state = model.update_secondary(primary).values()
    sw = np.array(state.saturation[Phase.WATER], dtype=float)
    sg = np.array(state.saturation[Phase.GAS], dtype=float)
    arrays = {
        "PRESSURE": np.asarray(units.from_si("pressure", primary.pressure), dtype=float).copy(),
        "SWAT": sw,
        "SGAS": sg,
        # closes to one exactly instead of carrying s_o's rounding
        "SOIL": 1.0 - sw - sg,
        "RS": np.asarray(units.from_si("gas_oil_ratio", np.array(state.rgo, dtype=float)), dtype=float),
    }
    return FieldSnapshot(step, time, arrays)


def hexahedra(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Corner points and hexahedron connectivity of the active cells."""
    centre = grid.centroid[grid.active].copy()
    centre[:, 2] = -centre[:, 2]
    half = grid.sizes[grid.active] / 2.0
    points = (centre[:, None, :] + HEX_CORNERS[None, :, :] * half[:, None, :]).reshape(-1, 3)
    cells = np.arange(len(points), dtype=np.int64).reshape(-1, 8)
    return points, cells


def vtk_path(output_dir: str | Path, case_name: str, step: int) -> Path:
    return Path(output_dir) / f"{case_name}-{step:04d}.vtk"


def write_vtk(snapshot: FieldSnapshot, grid: Grid, output_dir: str | Path, case_name: str) -> Path:
    """Write one snapshot as ``<case>-NNNN.vtk``.

    Raises:
        OSError: the file could not be written
    """
    points, cells = hexahedra(grid)
    missing = [name for name in FIELD_ARRAYS if name not in snapshot.arrays]
    if missing:
        raise ValueError(f"snapshot lacks field arrays {missing}")
    mesh = meshio.Mesh(
        points,
        [("hexahedron", cells)],
        cell_data={name: [np.asarray(snapshot.arrays[name], dtype=float)] for name in FIELD_ARRAYS},
    )
    path = vtk_path(output_dir, case_name, snapshot.step)
    meshio.write(path, mesh, file_format="vtk", binary=False)
    logger.debug("field output written to %s", path)
    return path
