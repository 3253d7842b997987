"""Fully implicit black-oil residual and its localized Jacobian assembly.

Unknowns per active cell are (p_o, s_w, x). The meaning of x is s_g while free gas
exists and the dissolved gas-oil ratio r_go otherwise. Equations per cell are the water,
oil and gas component balances in surface volumes per second:

    R_α,i = (φ_ref,i V_i / Δt)(A_α,i − A⁰_α,i) + Σ_j u_α,ij + q_α,i

All cells are evaluated at once: every field of a ``CellState`` is an ``Evaluation``
array whose derivatives are taken with respect to that cell's own unknowns.
"""

import logging
from dataclasses import dataclass, field, fields
from enum import IntEnum
from typing import TYPE_CHECKING, Any

import numpy as np

from numerics_module.autodiff import Evaluation, value_of, where
from numerics_module.linalg import BlockCSR

from .grid import ConnectionSet, Grid, RockProps, pore_volume_multiplier
from .pvt import FluidSystem, Phase
from .satfunc import SatCurve, SaturationFunctions
from .units import GRAVITY

if TYPE_CHECKING:
    from .wells import WellSet, WellSystemBlocks

logger = logging.getLogger(__name__)

NUM_EQUATIONS = 3
COMPONENTS = (Phase.WATER, Phase.OIL, Phase.GAS)
SWITCH_THRESHOLD = 1e-4
SWITCH_BACKOFF = 1e-3
# transmissibility multiplier m_T; constant
TRANSMISSIBILITY_MULTIPLIER = 1.0


class VariableMeaning(IntEnum):
    GAS_SATURATION = 0
    DISSOLVED_GAS = 1


@dataclass
class PrimaryVariables:
    """Per-cell unknowns (p_o, s_w, x) and the meaning of x."""

    pressure: np.ndarray
    water_saturation: np.ndarray
    x: np.ndarray
    meaning: np.ndarray

    def __post_init__(self):
        self.pressure = np.asarray(self.pressure, dtype=float)
        self.water_saturation = np.asarray(self.water_saturation, dtype=float)
        self.x = np.asarray(self.x, dtype=float)
        self.meaning = np.asarray(self.meaning, dtype=np.int8)

    @property
    def num_cells(self) -> int:
        return len(self.pressure)

    @property
    def has_free_gas(self) -> np.ndarray:
        return self.meaning == VariableMeaning.GAS_SATURATION

    def copy(self) -> "PrimaryVariables":
        return PrimaryVariables(
            self.pressure.copy(), self.water_saturation.copy(), self.x.copy(), self.meaning.copy()
        )

    def as_array(self) -> np.ndarray:
        return np.stack([self.pressure, self.water_saturation, self.x], axis=1)

    def with_values(self, values: np.ndarray) -> "PrimaryVariables":
        """Same meanings, new (p_o, s_w, x) columns."""
        values = np.asarray(values, dtype=float).reshape(-1, NUM_EQUATIONS)
        return PrimaryVariables(values[:, 0].copy(), values[:, 1].copy(), values[:, 2].copy(), self.meaning.copy())


@dataclass
class CellState:
    """Secondary quantities of a set of cells, indexed per phase where relevant."""

    primary: PrimaryVariables
    saturation: list[Any]
    pressure: list[Any]
    b: list[Any]
    viscosity: list[Any]
    density: list[Any]
    relperm: list[Any]
    mobility: list[Any]
    rgo: Any
    pore_volume_multiplier: Any
    accumulation: list[Any] = field(default_factory=list)

    def take(self, index: np.ndarray, derivatives: bool = True) -> "CellState":
        """Subset of cells; with ``derivatives=False`` fields become plain arrays."""

        def pick(item):
            if isinstance(item, list):
                return [pick(entry) for entry in item]
            if isinstance(item, Evaluation):
                sub = item[index]
                return sub if derivatives else np.asarray(sub.value)
            return np.asarray(item)[index]

        values = {f.name: pick(getattr(self, f.name)) for f in fields(self) if f.name != "primary"}
        primary = PrimaryVariables(
            self.primary.pressure[index],
            self.primary.water_saturation[index],
            self.primary.x[index],
            self.primary.meaning[index],
        )
        return CellState(primary=primary, **values)

    def values(self) -> "CellState":
        return self.take(np.arange(self.primary.num_cells), derivatives=False)

    def accumulation_values(self) -> np.ndarray:
        return np.stack([np.asarray(value_of(a)) for a in self.accumulation], axis=1)


@dataclass
class AssembledSystem:
    """Jacobian, residual and well coupling blocks for one Newton iteration."""

    jacobian: BlockCSR
    residual: np.ndarray  # (n, 3)
    state: CellState
    wells: list["WellSystemBlocks"] = field(default_factory=list)


class BlackOilModel:
    """Residual evaluation and Jacobian assembly on a fixed grid."""

    def __init__(
        self,
        grid: Grid,
        rock: RockProps,
        fluid: FluidSystem,
        satfunc: SaturationFunctions,
        connections: ConnectionSet,
        gravity: float = GRAVITY,
    ):
        self.grid = grid
        self.rock = rock
        self.fluid = fluid
        self.satfunc = satfunc
        self.connections = connections
        self.gravity = gravity
        self.pore_volume = grid.pore_volume(rock)
        self.num_cells = grid.num_cells

        self.pattern = BlockCSR.from_pattern(self.num_cells, connections.cells, NUM_EQUATIONS)
        ci, cj = connections.cells[:, 0], connections.cells[:, 1]
        self._diag = self.pattern.diagonal_positions
        self._pos_ij = self.pattern.positions(ci, cj)
        self._pos_ji = self.pattern.positions(cj, ci)

    # -- cell properties -------------------------------------------------------

    def update_secondary(self, pv: PrimaryVariables) -> CellState:
        """Seed (p_o, s_w, x) as AD variables and evaluate every secondary quantity."""
        p = Evaluation.variable(pv.pressure, 0)
        sw = Evaluation.variable(pv.water_saturation, 1)
        x = Evaluation.variable(pv.x, 2)
        free_gas = pv.has_free_gas

        sg = where(free_gas, x, 0.0)
        if self.fluid.has_dissolved_gas:
            rgo = where(free_gas, self.fluid.saturated_rs(p), x)
        else:
            rgo = Evaluation.constant(np.zeros(pv.num_cells))
        so = 1.0 - sw - sg

        pw = p - self.satfunc.capillary(SatCurve.PCOW, sw)
        pg = p + self.satfunc.capillary(SatCurve.PCOG, sg)
        bw, muw = self.fluid.water_props(pw)
        bo, muo = self.fluid.oil_props(p, rgo, saturated=free_gas)
        bg, mug = self.fluid.gas_props(pg)

        krw = self.satfunc.relperm_two_phase(SatCurve.KRW, sw)
        krg = self.satfunc.relperm_two_phase(SatCurve.KRG, sg)
        kro = self.satfunc.kro_three_phase(sw, sg, so)
        m_phi = pore_volume_multiplier(p, self.rock)

        state = CellState(
            primary=pv,
            saturation=[sw, so, sg],
            pressure=[pw, p, pg],
            b=[bw, bo, bg],
            viscosity=[muw, muo, mug],
            density=[
                self.fluid.phase_density(Phase.WATER, bw),
                self.fluid.phase_density(Phase.OIL, bo, rgo),
                self.fluid.phase_density(Phase.GAS, bg),
            ],
            relperm=[krw, kro, krg],
            mobility=[krw / muw, kro / muo, krg / mug],
            rgo=rgo,
            pore_volume_multiplier=m_phi,
        )
        state.accumulation = [
            m_phi * bw * sw,
            m_phi * bo * so,
            m_phi * (bg * sg + rgo * bo * so),
        ]
        return state

    def accumulation(self, pv: PrimaryVariables) -> np.ndarray:
        """A_α per cell as plain values, shape (n, 3)."""
        return self.update_secondary(pv).accumulation_values()

    def switch_variables(self, pv: PrimaryVariables) -> tuple[PrimaryVariables, int]:
        """Switch the meaning of x where free gas appears or disappears.

        Returns:
            Updated copy and the number of switched cells
        """
        if not self.fluid.has_dissolved_gas:
            return pv.copy(), 0
        result = pv.copy()
        rs = np.asarray(self.fluid.saturated_rs(pv.pressure), dtype=float)
        free_gas = pv.meaning == VariableMeaning.GAS_SATURATION
        to_dissolved = free_gas & (pv.x < -SWITCH_THRESHOLD)
        to_free = ~free_gas & (pv.x > rs * (1.0 + SWITCH_THRESHOLD))

        result.x[to_dissolved] = rs[to_dissolved] * (1.0 - SWITCH_BACKOFF)
        result.meaning[to_dissolved] = VariableMeaning.DISSOLVED_GAS
        result.x[to_free] = SWITCH_BACKOFF
        result.meaning[to_free] = VariableMeaning.GAS_SATURATION

        switched = int(to_dissolved.sum() + to_free.sum())
        if switched:
            logger.debug(
                "variable switch: %d cells lost free gas, %d gained it",
                int(to_dissolved.sum()), int(to_free.sum()),
            )
        return result, switched

    # -- fluxes ----------------------------------------------------------------

    def connection_flux(
        self,
        state_i: CellState,
        state_j: CellState,
        transmissibility: Any,
        depth_difference: Any,
    ) -> list[Any]:
        """Upwinded surface-volume fluxes u_α,ij from cell i to cell j.

        Works on single connections or arrays of them; either side may carry
        derivatives (the focus side) or plain values.
        """
        phase_flux = []
        upwind_i = []
        for phase in Phase:
            rho_avg = 0.5 * (state_i.density[phase] + state_j.density[phase])
            dphi = (
                state_i.pressure[phase]
                - state_j.pressure[phase]
                - self.gravity * rho_avg * depth_difference
            )
            from_i = np.asarray(value_of(dphi)) >= 0.0
            carried = where(
                from_i,
                state_i.b[phase] * state_i.mobility[phase],
                state_j.b[phase] * state_j.mobility[phase],
            )
            phase_flux.append(transmissibility * TRANSMISSIBILITY_MULTIPLIER * carried * dphi)
            upwind_i.append(from_i)

        rgo_upwind = where(upwind_i[Phase.OIL], state_i.rgo, state_j.rgo)
        return [
            phase_flux[Phase.WATER],
            phase_flux[Phase.OIL],
            phase_flux[Phase.GAS] + rgo_upwind * phase_flux[Phase.OIL],
        ]

    # -- assembly --------------------------------------------------------------

    def assemble(
        self,
        state: CellState,
        accumulation0: np.ndarray,
        dt: float,
        wells: "WellSet | None" = None,
        well_context: Any = None,
    ) -> AssembledSystem:
        """Residual and block Jacobian by focus-cell localized linearization.

        Args:
            state: Secondary state of all cells (with derivatives)
            accumulation0: A⁰ values at the start of the step, shape (n, 3)
            dt: Time step in seconds
            wells: Open wells, or None
            well_context: Per-step well data from ``WellSet.prepare_step``
        """
        if dt <= 0.0:
            raise ValueError(f"time step must be positive, got {dt}")
        jacobian = self.pattern.zeros_like()
        residual = np.zeros((self.num_cells, NUM_EQUATIONS))
        scale = self.pore_volume / dt

        for comp in range(NUM_EQUATIONS):
            acc = state.accumulation[comp]
            residual[:, comp] += scale * (np.asarray(acc.value) - accumulation0[:, comp])
            np.add.at(jacobian.blocks, (self._diag, comp), scale[:, None] * acc.derivs)

        if len(self.connections):
            ci, cj = self.connections.cells[:, 0], self.connections.cells[:, 1]
            trans = self.connections.transmissibility
            dz = self.connections.depth_difference
            focus_i = self.connection_flux(state.take(ci), state.take(cj, False), trans, dz)
            focus_j = self.connection_flux(state.take(ci, False), state.take(cj), trans, dz)
            for comp in range(NUM_EQUATIONS):
                flux = np.asarray(focus_i[comp].value)
                np.add.at(residual[:, comp], ci, flux)
                np.add.at(residual[:, comp], cj, -flux)
                np.add.at(jacobian.blocks, (self._diag[ci], comp), focus_i[comp].derivs)
                np.add.at(jacobian.blocks, (self._pos_ji, comp), -focus_i[comp].derivs)
                np.add.at(jacobian.blocks, (self._pos_ij, comp), focus_j[comp].derivs)
                np.add.at(jacobian.blocks, (self._diag[cj], comp), -focus_j[comp].derivs)

        system = AssembledSystem(jacobian=jacobian, residual=residual, state=state)
        if wells is not None and len(wells):
            system.wells = wells.assemble(state, well_context, dt, residual, jacobian)
        return system

    def residual(self, pv: PrimaryVariables, accumulation0: np.ndarray, dt: float, **kwargs) -> np.ndarray:
        """Residual values only (used by finite-difference checks)."""
        return self.assemble(self.update_secondary(pv), accumulation0, dt, **kwargs).residual

    # -- convergence -----------------------------------------------------------

    def average_fvf(self, state: CellState) -> np.ndarray:
        """Cell-average formation volume factor B̄_α = mean(1/b_α) per component."""
        return np.array([np.mean(1.0 / np.asarray(value_of(state.b[phase]))) for phase in COMPONENTS])

    def convergence_metrics(self, residual: np.ndarray, state: CellState, dt: float) -> dict[str, np.ndarray]:
        """Saturation-like mass-balance (MB) and local (CNV) residual norms per component.

        Both norms are the pore-volume scaled residuals |R|·Δt/PV multiplied by the cell-average
        formation volume factor B̄_α, which turns surface volumes into reservoir volumes.
        """
        fvf = self.average_fvf(state)
        mb = fvf * np.abs(residual.sum(axis=0)) * dt / self.pore_volume.sum()
        cnv = fvf * np.max(np.abs(residual) * dt / self.pore_volume[:, None], axis=0)
        return {"mb": mb, "cnv": cnv}

    def in_place(self, pv: PrimaryVariables) -> np.ndarray:
        """Surface volume of each component in place, shape (3,)."""
        return (self.pore_volume[:, None] * self.accumulation(pv)).sum(axis=0)
