"""Hydrostatic equilibration from EQUIL contacts.

Each phase pressure follows dp/dz = ρ_α(p, z)·g. The datum zone fixes one phase;
the other two are anchored at the water-oil and gas-oil contacts through the contact
capillary pressures. Saturations come from inverting the capillary curves, or from
sharp contacts when the curves are identically zero.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

import numpy as np

from numerics_module.errors import ConfigurationError

from .model import PrimaryVariables, VariableMeaning
from .pvt import FluidSystem, Phase
from .satfunc import SatCurve, SaturationFunctions
from .tables import PiecewiseLinear
from .units import GRAVITY

logger = logging.getLogger(__name__)

RK4_STEP = 0.5  # m
RK4_MIN_STEPS = 20


@dataclass(frozen=True)
class EquilRecord:
    """One EQUIL record in SI units; depths positive downwards."""

    datum_depth: float
    datum_pressure: float
    woc_depth: float
    woc_capillary_pressure: float = 0.0
    goc_depth: float = 0.0
    goc_capillary_pressure: float = 0.0

    def __post_init__(self):
        if self.goc_depth > self.woc_depth:
            raise ConfigurationError(
                f"gas-oil contact ({self.goc_depth:g} m) lies below water-oil contact ({self.woc_depth:g} m)"
            )
        if self.datum_pressure <= 0.0:
            raise ConfigurationError("EQUIL datum pressure must be positive")

    @property
    def datum_phase(self) -> Phase:
        """Phase whose pressure the datum fixes; a datum on a contact belongs to the deeper zone."""
        if self.datum_depth >= self.woc_depth:
            return Phase.WATER
        if self.datum_depth < self.goc_depth:
            return Phase.GAS
        return Phase.OIL


@dataclass
class InitialState:
    """Equilibrated cell state."""

    primary: PrimaryVariables
    water_saturation: np.ndarray
    oil_saturation: np.ndarray
    gas_saturation: np.ndarray
    rgo: np.ndarray
    phase_pressure: dict[Phase, np.ndarray]


def rk4_integrate(
    density: Callable[[float, float], float],
    z_from: float,
    p_from: float,
    z_to: float,
    gravity: float = GRAVITY,
) -> float:
    """Integrate dp/dz = ρ(z, p)·g with classical RK4.

    Uses max(20, ceil(|Δz| / 0.5 m)) equal steps.
    """
    span = z_to - z_from
    if span == 0.0:
        return float(p_from)
    steps = max(RK4_MIN_STEPS, math.ceil(abs(span) / RK4_STEP))
    h = span / steps
    z, p = float(z_from), float(p_from)
    for _ in range(steps):
        k1 = gravity * density(z, p)
        k2 = gravity * density(z + h / 2.0, p + h * k1 / 2.0)
        k3 = gravity * density(z + h / 2.0, p + h * k2 / 2.0)
        k4 = gravity * density(z + h, p + h * k3)
        p += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        z += h
    return p


class Equilibrator:
    """Builds the initial state of all active cells from one EQUIL record."""

    def __init__(
        self,
        fluid: FluidSystem,
        satfunc: SaturationFunctions,
        rsvd: PiecewiseLinear | None = None,
        gravity: float = GRAVITY,
    ):
        self.fluid = fluid
        self.satfunc = satfunc
        self.rsvd = rsvd
        self.gravity = gravity

    def rgo_at(self, pressure: float, depth: float) -> float:
        """Dissolved gas-oil ratio: saturated value capped by RSVD."""
        if not self.fluid.has_dissolved_gas:
            return 0.0
        rs = float(self.fluid.saturated_rs(pressure))
        if self.rsvd is None:
            return rs
        return min(rs, float(self.rsvd(depth, "rs")))

    def density(self, phase: Phase, depth: float, pressure: float) -> float:
        if phase == Phase.WATER:
            b, _ = self.fluid.water_props(pressure)
            return float(self.fluid.phase_density(Phase.WATER, b))
        if phase == Phase.GAS:
            b, _ = self.fluid.gas_props(pressure)
            return float(self.fluid.phase_density(Phase.GAS, b))
        rgo = self.rgo_at(pressure, depth)
        saturated = not self.fluid.has_dissolved_gas or rgo >= float(self.fluid.saturated_rs(pressure))
        b, _ = self.fluid.oil_props(pressure, rgo, saturated)
        return float(self.fluid.phase_density(Phase.OIL, b, rgo))

    def integrate_phase_pressure(self, phase: Phase, z_from: float, p_from: float, z_to: float) -> float:
        """Phase pressure at ``z_to`` given its value at ``z_from``."""
        return rk4_integrate(
            lambda z, p: self.density(phase, z, p), z_from, p_from, z_to, self.gravity
        )

    def profile(self, phase: Phase, z_anchor: float, p_anchor: float, depths: np.ndarray) -> np.ndarray:
        """Phase pressure at each depth, integrated piecewise outwards from the anchor."""
        depths = np.asarray(depths, dtype=float)
        unique = np.unique(depths)
        pressure = {}
        below = unique[unique >= z_anchor]
        above = unique[unique < z_anchor][::-1]
        for targets in (below, above):
            z, p = z_anchor, p_anchor
            for target in targets:
                p = self.integrate_phase_pressure(phase, z, p, float(target))
                z = float(target)
                pressure[z] = p
        return np.array([pressure[float(d)] for d in depths])

    def anchors(self, record: EquilRecord) -> dict[Phase, tuple[float, float]]:
        """(depth, pressure) anchor of every phase pressure curve."""
        woc, goc = record.woc_depth, record.goc_depth
        pcow, pcog = record.woc_capillary_pressure, record.goc_capillary_pressure
        datum = (record.datum_depth, record.datum_pressure)
        datum_phase = record.datum_phase

        if datum_phase == Phase.OIL:
            p_o_woc = self.integrate_phase_pressure(Phase.OIL, *datum, woc)
            p_o_goc = self.integrate_phase_pressure(Phase.OIL, *datum, goc)
            return {
                Phase.OIL: datum,
                Phase.WATER: (woc, p_o_woc - pcow),
                Phase.GAS: (goc, p_o_goc + pcog),
            }
        if datum_phase == Phase.WATER:
            p_o_woc = self.integrate_phase_pressure(Phase.WATER, *datum, woc) + pcow
            p_o_goc = self.integrate_phase_pressure(Phase.OIL, woc, p_o_woc, goc)
            return {
                Phase.WATER: datum,
                Phase.OIL: (woc, p_o_woc),
                Phase.GAS: (goc, p_o_goc + pcog),
            }
        p_o_goc = self.integrate_phase_pressure(Phase.GAS, *datum, goc) - pcog
        p_o_woc = self.integrate_phase_pressure(Phase.OIL, goc, p_o_goc, woc)
        return {
            Phase.GAS: datum,
            Phase.OIL: (goc, p_o_goc),
            Phase.WATER: (woc, p_o_woc - pcow),
        }

    def equilibrate(self, depth: Any, record: EquilRecord) -> InitialState:
        """Initial pressures, saturations and dissolved gas for cells at ``depth``.

        Args:
            depth: Cell-centre depths of the active cells (m)
            record: Contacts and datum

        Returns:
            InitialState with primary variables ready for the simulator
        """
        depth = np.asarray(depth, dtype=float)
        anchors = self.anchors(record)
        p = {phase: self.profile(phase, *anchors[phase], depth) for phase in Phase}
        sf = self.satfunc

        if sf.capillary_is_zero(SatCurve.PCOW):
            sw = np.where(depth >= record.woc_depth, sf.sw_max, sf.swco)
        else:
            sw = np.clip(sf.invert_capillary(SatCurve.PCOW, p[Phase.OIL] - p[Phase.WATER]), sf.swco, sf.sw_max)
        if sf.capillary_is_zero(SatCurve.PCOG):
            sg = np.where(depth < record.goc_depth, sf.sg_max, 0.0)
        else:
            sg = np.clip(sf.invert_capillary(SatCurve.PCOG, p[Phase.GAS] - p[Phase.OIL]), 0.0, sf.sg_max)
        sw = np.asarray(sw, dtype=float)
        sg = np.minimum(np.asarray(sg, dtype=float), 1.0 - sw)
        so = 1.0 - sw - sg

        # cell oil pressure follows the phase that owns the zone
        p_o = p[Phase.OIL].copy()
        water_zone = depth >= record.woc_depth
        gas_zone = depth < record.goc_depth
        p_o[water_zone] = (p[Phase.WATER] + sf.capillary(SatCurve.PCOW, sw))[water_zone]
        p_o[gas_zone] = (p[Phase.GAS] - sf.capillary(SatCurve.PCOG, sg))[gas_zone]

        rgo = np.array([self.rgo_at(pressure, z) for pressure, z in zip(p_o, depth)])
        meaning = np.full(len(depth), VariableMeaning.GAS_SATURATION, dtype=np.int8)
        x = sg.copy()
        if self.fluid.has_dissolved_gas:
            rs = np.asarray(self.fluid.saturated_rs(p_o), dtype=float)
            dissolved = (sg <= 0.0) & (rgo < rs)
            meaning[dissolved] = VariableMeaning.DISSOLVED_GAS
            x[dissolved] = rgo[dissolved]
            rgo = np.where(dissolved, rgo, rs)

        logger.info(
            "equilibrated %d cells: datum in %s zone, p_o in [%.6g, %.6g] Pa",
            len(depth), record.datum_phase.name.lower(), float(p_o.min()), float(p_o.max()),
        )
        return InitialState(
            primary=PrimaryVariables(p_o, sw, x, meaning),
            water_saturation=sw,
            oil_saturation=so,
            gas_saturation=sg,
            rgo=rgo,
            phase_pressure={Phase.WATER: p[Phase.WATER], Phase.OIL: p_o, Phase.GAS: p[Phase.GAS]},
        )


def equilibrate(
    depth: Any,
    record: EquilRecord,
    fluid: FluidSystem,
    satfunc: SaturationFunctions,
    rsvd: PiecewiseLinear | None = None,
) -> InitialState:
    """Functional form of ``Equilibrator.equilibrate``."""
    return Equilibrator(fluid, satfunc, rsvd).equilibrate(depth, record)
