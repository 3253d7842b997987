"""Reservoir physics: grid, fluids, initial state, discretized equations and wells.

This module provides tools for:
- Building Cartesian grids and TPFA connections
- Black-oil PVT and three-phase saturation functions
- Hydrostatic equilibration
- Residual and Jacobian assembly of the black-oil equations
- Standard wells and their Schur-complement coupling
"""

from .equil import EquilRecord, Equilibrator, InitialState, equilibrate
from .grid import ConnectionSet, Grid, RockProps, build_cartesian
from .model import AssembledSystem, BlackOilModel, PrimaryVariables, VariableMeaning
from .pvt import DeadOilPvt, DryGasPvt, FluidSystem, LiveOilPvt, Phase, SurfaceDensities, WaterPvt
from .satfunc import SaturationFunctions
from .tables import PiecewiseLinear
from .units import FIELD, METRIC, UnitSystem
from .wells import (
    ControlMode,
    RateTarget,
    SchurComplement,
    StandardWell,
    WellConnection,
    WellControl,
    WellSet,
    WellSpec,
    WellState,
    WellType,
)

__all__ = [
    "Grid",
    "RockProps",
    "ConnectionSet",
    "build_cartesian",
    "Phase",
    "WaterPvt",
    "DryGasPvt",
    "DeadOilPvt",
    "LiveOilPvt",
    "SurfaceDensities",
    "FluidSystem",
    "SaturationFunctions",
    "PiecewiseLinear",
    "UnitSystem",
    "FIELD",
    "METRIC",
    "EquilRecord",
    "InitialState",
    "Equilibrator",
    "equilibrate",
    "BlackOilModel",
    "PrimaryVariables",
    "VariableMeaning",
    "AssembledSystem",
    "WellType",
    "ControlMode",
    "RateTarget",
    "WellControl",
    "WellConnection",
    "WellSpec",
    "WellState",
    "StandardWell",
    "WellSet",
    "SchurComplement",
]
