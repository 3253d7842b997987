"""Cartesian grid geometry, rock properties and two-point transmissibilities.

Cells are numbered in deck order, i fastest: ``global = i + nx*(j + ny*k)``. Simulation
unknowns live on active cells only; ``Grid.active_index`` maps a global cell to its
active index (or -1).
"""

import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from numerics_module.errors import ConfigurationError, GeometryError, InputError

logger = logging.getLogger(__name__)

AXES = ("x", "y", "z")


@dataclass(frozen=True)
class RockProps:
    """Per-active-cell rock data in SI units."""

    permeability: np.ndarray  # (n, 3) diagonal tensor, m²
    porosity: np.ndarray  # (n,) reference porosity
    compressibility: float = 0.0  # 1/Pa
    reference_pressure: float = 0.0  # Pa

    def __post_init__(self):
        if np.any(self.permeability < 0.0):
            raise InputError("permeability must be non-negative")
        if np.any((self.porosity < 0.0) | (self.porosity > 1.0)):
            raise InputError("porosity must lie in [0, 1]")


@dataclass(frozen=True)
class Connection:
    """One cell-to-cell connection between active cells ``i < j``."""

    i: int
    j: int
    transmissibility: float
    depth_difference: float  # z_i - z_j


@dataclass(frozen=True)
class ConnectionSet:
    """All connections of a grid as parallel arrays."""

    cells: np.ndarray  # (m, 2) active indices, cells[:, 0] < cells[:, 1]
    transmissibility: np.ndarray  # (m,) m³
    depth_difference: np.ndarray  # (m,) m

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self) -> Iterator[Connection]:
        for (i, j), trans, dz in zip(self.cells, self.transmissibility, self.depth_difference):
            yield Connection(int(i), int(j), float(trans), float(dz))


@dataclass(frozen=True)
class Grid:
    """Geometry of a Cartesian grid with per-cell depths."""

    dims: tuple[int, int, int]
    sizes: np.ndarray  # (N, 3) dx, dy, dz for every global cell
    depth: np.ndarray  # (N,) cell-centre depth, positive downwards
    centroid: np.ndarray  # (N, 3)
    active: np.ndarray  # (N,) bool
    neighbors: np.ndarray = field(repr=False)  # (f, 3): global i, global j, axis

    @property
    def num_global(self) -> int:
        return int(np.prod(self.dims))

    @property
    def volume(self) -> np.ndarray:
        return np.prod(self.sizes, axis=1)

    @property
    def active_cells(self) -> np.ndarray:
        return np.flatnonzero(self.active)

    @property
    def active_index(self) -> np.ndarray:
        index = np.full(self.num_global, -1, dtype=np.int64)
        index[self.active] = np.arange(int(self.active.sum()))
        return index

    @property
    def num_cells(self) -> int:
        return int(self.active.sum())

    @property
    def cell_depth(self) -> np.ndarray:
        return self.depth[self.active]

    @property
    def cell_volume(self) -> np.ndarray:
        return self.volume[self.active]

    def global_index(self, i: int, j: int, k: int) -> int:
        """Global index of zero-based (i, j, k)."""
        nx, ny, nz = self.dims
        if not (0 <= i < nx and 0 <= j < ny and 0 <= k < nz):
            raise InputError(f"cell ({i + 1}, {j + 1}, {k + 1}) outside grid {nx}x{ny}x{nz}")
        return i + nx * (j + ny * k)

    def pore_volume(self, rock: RockProps) -> np.ndarray:
        """Reference pore volume φ_ref·V of every active cell."""
        return rock.porosity * self.cell_volume

    def connections(
        self,
        rock: RockProps,
        nnc: Sequence[tuple[int, int, float]] = (),
    ) -> ConnectionSet:
        """Geometric neighbour connections plus explicit non-neighbour connections.

        Args:
            rock: Permeability of the active cells
            nnc: ``(global i, global j, transmissibility in SI)`` triples

        Raises:
            InputError: an NNC touches an inactive cell or joins a cell to itself
        """
        active_index = self.active_index
        pairs = {}

        for gi, gj, axis in self.neighbors:
            half_i = half_transmissibility(
                _face_area(self.sizes[gi], axis),
                rock.permeability[active_index[gi]],
                _unit(axis) * self.sizes[gi, axis] / 2.0,
                _unit(axis),
            )
            half_j = half_transmissibility(
                _face_area(self.sizes[gj], axis),
                rock.permeability[active_index[gj]],
                -_unit(axis) * self.sizes[gj, axis] / 2.0,
                -_unit(axis),
            )
            pairs[(int(active_index[gi]), int(active_index[gj]))] = transmissibility(half_i, half_j)

        for gi, gj, trans in nnc:
            ai, aj = active_index[gi], active_index[gj]
            if ai < 0 or aj < 0:
                raise InputError(f"NNC between global cells {gi} and {gj} touches an inactive cell")
            if ai == aj:
                raise InputError(f"NNC joins global cell {gi} to itself")
            key = (int(min(ai, aj)), int(max(ai, aj)))
            if key in pairs:
                logger.info("NNC %s duplicates a neighbour connection, adding transmissibilities", key)
            pairs[key] = pairs.get(key, 0.0) + float(trans)

        keys = sorted(pairs)
        cells = np.array(keys, dtype=np.int64).reshape(-1, 2)
        depth = self.cell_depth
        return ConnectionSet(
            cells=cells,
            transmissibility=np.array([pairs[key] for key in keys], dtype=float),
            depth_difference=depth[cells[:, 0]] - depth[cells[:, 1]],
        )


def _unit(axis: int) -> np.ndarray:
    vector = np.zeros(3)
    vector[axis] = 1.0
    return vector


def _face_area(size: np.ndarray, axis: int) -> float:
    other = [a for a in range(3) if a != axis]
    return float(size[other[0]] * size[other[1]])


def half_transmissibility(
    area: float, permeability: Any, cell_to_face: Any, normal: Any
) -> float:
    """Half-transmissibility t = |F|·(K d)·n / |d|² of one cell towards one face.

    Args:
        area: Face area |F|
        permeability: Diagonal of K (3 values)
        cell_to_face: Vector d from the cell centroid to the face centroid
        normal: Unit face normal pointing away from the cell

    Raises:
        GeometryError: the centroid coincides with the face centroid
    """
    d = np.asarray(cell_to_face, dtype=float)
    distance_sq = float(d @ d)
    if distance_sq == 0.0:
        raise GeometryError("cell centroid coincides with face centroid")
    k_times_d = np.asarray(permeability, dtype=float) * d
    return float(area * (k_times_d @ np.asarray(normal, dtype=float)) / distance_sq)


def transmissibility(t_ij: float, t_ji: float) -> float:
    """Harmonic combination of two half-transmissibilities (0 when either is 0)."""
    if t_ij <= 0.0 or t_ji <= 0.0:
        return 0.0
    return t_ij * t_ji / (t_ij + t_ji)


def pore_volume_multiplier(pressure: Any, rock: RockProps) -> Any:
    """Linearized rock compaction m_φ = 1 + c_r (p − p_ref)."""
    return 1.0 + rock.compressibility * (pressure - rock.reference_pressure)


def build_cartesian(
    dims: Sequence[int],
    sizes: Sequence[Any],
    tops: Any,
    active: Any = None,
) -> Grid:
    """Build a Cartesian grid with cells stacked downwards from ``tops``.

    Args:
        dims: (nx, ny, nz)
        sizes: (dx, dy, dz), each a scalar or one value per cell
        tops: Top depth of the first layer (nx·ny values) or of every cell; scalar allowed
        active: Per-cell activity flags (ACTNUM); all active when omitted

    Raises:
        ConfigurationError: non-positive dimensions or cell sizes, wrong array lengths
    """
    nx, ny, nz = (int(d) for d in dims)
    if min(nx, ny, nz) <= 0:
        raise ConfigurationError(f"grid dimensions must be positive, got {nx}x{ny}x{nz}")
    n = nx * ny * nz

    columns = []
    for axis, values in zip(AXES, sizes):
        array = np.broadcast_to(np.asarray(values, dtype=float), (n,)) if np.ndim(values) == 0 \
            else np.asarray(values, dtype=float)
        if array.shape != (n,):
            raise ConfigurationError(f"d{axis} needs {n} values, got {array.size}")
        if np.any(array <= 0.0):
            raise ConfigurationError(f"d{axis} must be positive in every cell")
        columns.append(array)
    size = np.stack(columns, axis=1)
    # (k, j, i) views of the per-cell arrays
    dx, dy, dz = (column.reshape(nz, ny, nx) for column in columns)

    tops = np.asarray(tops, dtype=float)
    if tops.ndim == 0:
        tops = np.full(nx * ny, float(tops))
    if tops.size == nx * ny:
        top = np.empty((nz, ny, nx))
        top[0] = tops.reshape(ny, nx)
        for k in range(1, nz):
            top[k] = top[k - 1] + dz[k - 1]
    elif tops.size == n:
        top = tops.reshape(nz, ny, nx)
    else:
        raise ConfigurationError(f"TOPS needs {nx * ny} or {n} values, got {tops.size}")
    depth = (top + dz / 2.0).reshape(n)

    x_left = np.cumsum(dx, axis=2) - dx
    y_left = np.cumsum(dy, axis=1) - dy
    centroid = np.stack(
        [(x_left + dx / 2.0).reshape(n), (y_left + dy / 2.0).reshape(n), depth], axis=1
    )

    if active is None:
        active = np.ones(n, dtype=bool)
    else:
        active = np.asarray(active).astype(bool).reshape(-1)
        if active.shape != (n,):
            raise ConfigurationError(f"ACTNUM needs {n} values, got {active.size}")

    index = np.arange(n).reshape(nz, ny, nx)
    neighbor_blocks = []
    for axis, (left, right) in enumerate([
        (index[:, :, :-1], index[:, :, 1:]),
        (index[:, :-1, :], index[:, 1:, :]),
        (index[:-1, :, :], index[1:, :, :]),
    ]):
        left, right = left.reshape(-1), right.reshape(-1)
        keep = active[left] & active[right]
        neighbor_blocks.append(
            np.stack([left[keep], right[keep], np.full(keep.sum(), axis)], axis=1)
        )
    neighbors = np.concatenate(neighbor_blocks).astype(np.int64).reshape(-1, 3)

    return Grid(
        dims=(nx, ny, nz),
        sizes=size,
        depth=depth,
        centroid=centroid,
        active=active,
        neighbors=neighbors,
    )
