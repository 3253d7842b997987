"""Black-oil PVT: water, dead or live oil, dry gas.

All property functions accept plain reals, numpy arrays or AD evaluations and return
the same kind. Tables store shrinkage factors b = 1/B and viscosities in SI.
"""

import logging
from dataclasses import dataclass
from enum import IntEnum
from typing import Any, Protocol

import numpy as np

from numerics_module.autodiff import Evaluation, value_of, where
from numerics_module.errors import InputError

from .tables import PiecewiseLinear

logger = logging.getLogger(__name__)


class Phase(IntEnum):
    WATER = 0
    OIL = 1
    GAS = 2


@dataclass(frozen=True)
class WaterPvt:
    """Constant-compressibility water (PVTW)."""

    reference_pressure: float
    reference_b: float
    compressibility: float
    reference_viscosity: float
    viscosibility: float = 0.0

    def __post_init__(self):
        if self.reference_b <= 0.0 or self.reference_viscosity <= 0.0:
            raise InputError("PVTW: formation volume factor and viscosity must be positive")

    def props(self, pressure: Any) -> tuple[Any, Any]:
        """b_w and μ_w from second-order expansions of the exponential laws.

        Viscosity follows the PVTW convention μ_w = μ_ref·(1 + X + X²/2)/(1 + Y + Y²/2)
        with X = c_w·Δp and Y = −c_μ·Δp, so it moves with pressure even when c_μ = 0.
        """
        x = self.compressibility * (pressure - self.reference_pressure)
        y = -self.viscosibility * (pressure - self.reference_pressure)
        expansion_x = 1.0 + x + x * x / 2.0
        expansion_y = 1.0 + y + y * y / 2.0
        b = self.reference_b * expansion_x
        # μ_w/b_w follows the viscosibility law
        mu = self.reference_viscosity * expansion_x / expansion_y
        return b, mu


class DryGasPvt:
    """Dry gas (PVDG): b_g and μ_g tabulated against gas pressure."""

    def __init__(self, pressure: Any, b: Any, viscosity: Any):
        self.table = PiecewiseLinear(
            pressure,
            {"b": b, "mu": viscosity},
            name="PVDG",
            units={"x": "pressure", "b": "1", "mu": "viscosity"},
        )
        if np.any(self.table.columns["b"] <= 0.0) or np.any(self.table.columns["mu"] <= 0.0):
            raise InputError("PVDG: formation volume factors and viscosities must be positive")

    def props(self, pressure: Any) -> tuple[Any, Any]:
        return self.table(pressure, "b"), self.table(pressure, "mu")


class OilPvt(Protocol):
    has_dissolved_gas: bool

    def saturated_rs(self, pressure: Any) -> Any: ...

    def props(self, pressure: Any, rgo: Any, saturated: Any) -> tuple[Any, Any]: ...


class DeadOilPvt:
    """Dead oil (PVDO): no dissolved gas."""

    has_dissolved_gas = False

    def __init__(self, pressure: Any, b: Any, viscosity: Any):
        self.table = PiecewiseLinear(
            pressure,
            {"b": b, "mu": viscosity},
            name="PVDO",
            units={"x": "pressure", "b": "1", "mu": "viscosity"},
        )
        if np.any(self.table.columns["b"] <= 0.0) or np.any(self.table.columns["mu"] <= 0.0):
            raise InputError("PVDO: formation volume factors and viscosities must be positive")

    def saturated_rs(self, pressure: Any) -> Any:
        return 0.0 * pressure

    def props(self, pressure: Any, rgo: Any = None, saturated: Any = True) -> tuple[Any, Any]:
        return self.table(pressure, "b"), self.table(pressure, "mu")


class LiveOilPvt:
    """Live oil (PVTO) with dissolved gas.

    The saturated table holds (p_bub, r_s, b_o, μ_o) per record. Every record also owns
    an undersaturated branch (p, b_o, μ_o) starting at its bubble point; records given
    without one borrow the shape of the nearest record that has one.
    """

    has_dissolved_gas = True

    def __init__(self, records: list[tuple[float, np.ndarray]]):
        """Initialize from PVTO records.

        Args:
            records: ``(r_s, rows)`` pairs in SI, ``rows`` of shape (k, 3) holding
                (p, b_o, μ_o); the first row is the saturated point

        Raises:
            InputError: fewer than two records, unordered r_s or bubble points,
                non-positive properties
        """
        if len(records) < 2:
            raise InputError("PVTO: at least two records are required")
        rs = np.array([r for r, _ in records], dtype=float)
        rows = [np.asarray(r, dtype=float).reshape(-1, 3) for _, r in records]
        if np.any(np.diff(rs) <= 0.0):
            raise InputError("PVTO: dissolved gas-oil ratios must be strictly increasing")
        for rs_value, branch in zip(rs, rows):
            if np.any(branch[:, 1:] <= 0.0):
                raise InputError(f"PVTO: non-positive property in record r_s={rs_value:g}")

        bubble = np.array([branch[0] for branch in rows])
        self.saturated = PiecewiseLinear(
            bubble[:, 0],
            {"rs": rs, "b": bubble[:, 1], "mu": bubble[:, 2]},
            name="PVTO saturated",
            units={"x": "pressure", "rs": "gas_oil_ratio", "b": "1", "mu": "viscosity"},
        )
        self.rs_nodes = rs
        self.branches = [
            PiecewiseLinear(
                branch[:, 0],
                {"b": branch[:, 1], "mu": branch[:, 2]},
                name=f"PVTO r_s={rs_value:.6g}",
                units={"x": "pressure", "b": "1", "mu": "viscosity"},
            )
            for rs_value, branch in zip(rs, _complete_branches(rows))
        ]
        self._warned_rs = False

    def saturated_rs(self, pressure: Any) -> Any:
        return self.saturated(pressure, "rs")

    def props(self, pressure: Any, rgo: Any, saturated: Any) -> tuple[Any, Any]:
        """b_o and μ_o on the saturated or undersaturated branch.

        Args:
            pressure: Oil pressure
            rgo: Dissolved gas-oil ratio (ignored where ``saturated``)
            saturated: Flag, or boolean array per entry
        """
        flags = np.asarray(saturated, dtype=bool)
        b_sat, mu_sat = self.saturated(pressure, "b"), self.saturated(pressure, "mu")
        if flags.all():
            return b_sat, mu_sat
        b_under, mu_under = self._undersaturated(pressure, rgo)
        if not flags.any():
            return b_under, mu_under
        return where(flags, b_sat, b_under), where(flags, mu_sat, mu_under)

    def _undersaturated(self, pressure: Any, rgo: Any) -> tuple[Any, Any]:
        rs = self.rs_nodes
        rgo_value = np.asarray(value_of(rgo), dtype=float)
        if not self._warned_rs and np.any(rgo_value > rs[-1]):
            self._warned_rs = True
            logger.warning(
                "PVTO: dissolved gas-oil ratio %.6g above last record %.6g, extrapolating",
                float(np.max(rgo_value)), rs[-1],
            )
        seg = np.clip(np.searchsorted(rs, rgo_value, side="right") - 1, 0, len(rs) - 2)
        # constant below the first record
        rgo_clamped = where(rgo_value < rs[0], rs[0], rgo)
        weight = (rgo_clamped - rs[seg]) / (rs[seg + 1] - rs[seg])

        b_branches = [branch(pressure, "b") for branch in self.branches]
        mu_branches = [branch(pressure, "mu") for branch in self.branches]
        b_lo, b_hi = _pick(b_branches, seg), _pick(b_branches, seg + 1)
        mu_lo, mu_hi = _pick(mu_branches, seg), _pick(mu_branches, seg + 1)
        return b_lo * (1.0 - weight) + b_hi * weight, mu_lo * (1.0 - weight) + mu_hi * weight


def _pick(values: list[Any], index: np.ndarray) -> Any:
    """Select ``values[index[e]][e]`` entrywise."""
    if not isinstance(values[0], Evaluation):
        shape = np.broadcast_shapes(np.shape(values[0]), np.shape(index))
        stacked = np.stack([np.broadcast_to(v, shape) for v in values])
        index = np.broadcast_to(index, shape)
        picked = np.take_along_axis(stacked, index[None, ...], axis=0)[0]
        return float(picked) if picked.ndim == 0 else picked
    cls = type(values[0])
    shape = np.broadcast_shapes(np.shape(values[0].value), np.shape(index))
    value = np.stack([np.broadcast_to(v.value, shape) for v in values])
    derivs = np.stack([np.broadcast_to(v.derivs, shape + (cls.NUM_DERIVS,)) for v in values])
    index = np.broadcast_to(index, shape)
    picked_value = np.take_along_axis(value, index[None, ...], axis=0)[0]
    picked_derivs = np.take_along_axis(derivs, index[None, ..., None], axis=0)[0]
    return cls(picked_value, picked_derivs)


def _complete_branches(rows: list[np.ndarray]) -> list[np.ndarray]:
    """Give every record an undersaturated branch, borrowing the nearest record's shape."""
    donors = [i for i, branch in enumerate(rows) if len(branch) > 1]
    if not donors:
        raise InputError("PVTO: no record defines undersaturated data")
    completed = []
    for i, branch in enumerate(rows):
        if len(branch) > 1:
            completed.append(branch)
            continue
        above = [d for d in donors if d > i]
        donor = rows[above[0] if above else donors[-1]]
        offsets = donor[:, 0] - donor[0, 0]
        ratios = donor[:, 1:] / donor[0, 1:]
        completed.append(np.column_stack([branch[0, 0] + offsets, branch[0, 1:] * ratios]))
    return completed


@dataclass(frozen=True)
class SurfaceDensities:
    oil: float
    water: float
    gas: float


class FluidSystem:
    """Water, oil and gas PVT plus surface densities."""

    def __init__(self, water: WaterPvt, oil: OilPvt, gas: DryGasPvt, densities: SurfaceDensities):
        self.water = water
        self.oil = oil
        self.gas = gas
        self.densities = densities

    @property
    def has_dissolved_gas(self) -> bool:
        return self.oil.has_dissolved_gas

    def water_props(self, pressure: Any) -> tuple[Any, Any]:
        return self.water.props(pressure)

    def saturated_rs(self, pressure: Any) -> Any:
        return self.oil.saturated_rs(pressure)

    def oil_props(self, pressure: Any, rgo: Any, saturated: Any) -> tuple[Any, Any]:
        return self.oil.props(pressure, rgo, saturated)

    def gas_props(self, pressure: Any) -> tuple[Any, Any]:
        return self.gas.props(pressure)

    def phase_density(self, phase: Phase, b: Any, rgo: Any = 0.0) -> Any:
        """Reservoir density of a phase from its shrinkage factor (r_og ≡ 0)."""
        if phase == Phase.WATER:
            return b * self.densities.water
        if phase == Phase.OIL:
            return b * (self.densities.oil + rgo * self.densities.gas)
        return b * self.densities.gas
