"""Relative permeability and capillary pressure from SWOF/SGOF tables."""

from enum import Enum
from typing import Any

import numpy as np

from numerics_module.autodiff import maximum, where
from numerics_module.errors import InputError

from .tables import PiecewiseLinear

SEGREGATION_EPSILON = 1e-10


class SatCurve(Enum):
    """Tabulated curve: (table, column)."""

    KRW = ("water", "krw")
    KROW = ("water", "krow")
    PCOW = ("water", "pcow")
    KRG = ("gas", "krg")
    KROG = ("gas", "krog")
    PCOG = ("gas", "pcog")


class SaturationFunctions:
    """Two-phase water-oil and gas-oil curves with the segregated three-phase k_ro."""

    def __init__(self, swof: Any, sgof: Any):
        """Initialize from table rows.

        Args:
            swof: Rows (s_w, k_rw, k_row, p_cow), p_cow in Pa
            sgof: Rows (s_g, k_rg, k_rog, p_cog), p_cog in Pa

        Raises:
            InputError: saturations outside [0, 1], relative permeabilities outside
                [0, 1] or curves with the wrong monotonicity
        """
        swof = np.asarray(swof, dtype=float).reshape(-1, 4)
        sgof = np.asarray(sgof, dtype=float).reshape(-1, 4)
        units = {"x": "saturation", "pcow": "pressure", "pcog": "pressure"}
        self.water = PiecewiseLinear(
            swof[:, 0], {"krw": swof[:, 1], "krow": swof[:, 2], "pcow": swof[:, 3]},
            name="SWOF", units=units, clamp=True,
        )
        self.gas = PiecewiseLinear(
            sgof[:, 0], {"krg": sgof[:, 1], "krog": sgof[:, 2], "pcog": sgof[:, 3]},
            name="SGOF", units=units, clamp=True,
        )
        _check_curves("SWOF", swof, rising=(1,), falling=(2, 3))
        _check_curves("SGOF", sgof, rising=(1, 3), falling=(2,))

    @property
    def swco(self) -> float:
        """Connate water saturation (first SWOF node)."""
        return float(self.water.x[0])

    @property
    def sw_max(self) -> float:
        return float(self.water.x[-1])

    @property
    def sg_max(self) -> float:
        return float(self.gas.x[-1])

    def _table(self, curve: SatCurve) -> PiecewiseLinear:
        return self.water if curve.value[0] == "water" else self.gas

    def relperm_two_phase(self, curve: SatCurve, saturation: Any) -> Any:
        """Look up a relative permeability curve at its own table saturation."""
        return self._table(curve)(saturation, curve.value[1])

    def capillary(self, curve: SatCurve, saturation: Any) -> Any:
        """Look up p_cow(s_w) or p_cog(s_g)."""
        return self._table(curve)(saturation, curve.value[1])

    def krow_of_oil(self, so: Any) -> Any:
        """k_row as a function of oil saturation in the water-oil system."""
        return self.relperm_two_phase(SatCurve.KROW, 1.0 - so)

    def krog_of_oil(self, so: Any) -> Any:
        """k_rog as a function of oil saturation in the gas-oil system with connate water."""
        return self.relperm_two_phase(SatCurve.KROG, 1.0 - so - self.swco)

    def kro_three_phase(self, sw: Any, sg: Any, so: Any) -> Any:
        """Segregation-weighted oil relative permeability.

        k_ro = k_row + s_g (k_rog − k_row) / (s_w − s_wco + s_g), which equals the
        saturation-weighted average of k_row and k_rog; k_row when the weight sum
        vanishes.
        """
        krow = self.krow_of_oil(so)
        krog = self.krog_of_oil(so)
        water_weight = maximum(sw - self.swco, 0.0)
        denominator = water_weight + sg
        small = np.asarray(denominator < SEGREGATION_EPSILON)
        safe = where(small, 1.0, denominator)
        kro = krow + sg * (krog - krow) / safe
        return where(small, krow, kro)

    def invert_capillary(self, curve: SatCurve, pc: Any) -> Any:
        """Saturation at which the capillary curve equals ``pc`` (clamped to the table)."""
        return self._table(curve).inverse(pc, curve.value[1])

    def capillary_is_zero(self, curve: SatCurve) -> bool:
        table = self._table(curve)
        return table.is_constant(curve.value[1]) and table.columns[curve.value[1]][0] == 0.0


def _check_curves(name: str, rows: np.ndarray, rising: tuple, falling: tuple):
    if np.any((rows[:, 0] < 0.0) | (rows[:, 0] > 1.0)):
        raise InputError(f"{name}: saturations must lie in [0, 1]")
    if np.any((rows[:, 1:3] < 0.0) | (rows[:, 1:3] > 1.0)):
        raise InputError(f"{name}: relative permeabilities must lie in [0, 1]")
    for col in rising:
        if np.any(np.diff(rows[:, col]) < 0.0):
            raise InputError(f"{name}: column {col + 1} must be non-decreasing")
    for col in falling:
        if np.any(np.diff(rows[:, col]) > 0.0):
            raise InputError(f"{name}: column {col + 1} must be non-increasing")
