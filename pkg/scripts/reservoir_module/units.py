"""Deck unit systems and their conversion to SI.

Every real deck item carries a dimension name. ``UnitSystem.to_si`` is the only place
deck values become SI; ``UnitSystem.from_si`` is the only place results leave it.
"""

from dataclasses import dataclass, field

import numpy as np

GRAVITY = 9.80665  # m/s²

FOOT = 0.3048
PSI = 6894.757293168361
BAR = 1.0e5
DAY = 86400.0
CENTIPOISE = 1.0e-3
MILLIDARCY = 9.869233e-16
STB = 0.158987294928
MSCF = 1000.0 * FOOT**3
LB_PER_FT3 = 0.45359237 / FOOT**3


@dataclass(frozen=True)
class UnitSystem:
    """Scale factors (deck unit → SI) keyed by dimension name."""

    name: str
    factors: dict[str, float] = field(repr=False)

    def to_si(self, dimension: str | None, value):
        """Convert deck values of ``dimension`` to SI (``None`` and ``"1"`` pass through)."""
        if dimension is None or dimension == "1":
            return value
        return np.multiply(value, self._factor(dimension)) if _is_array(value) else value * self._factor(dimension)

    def from_si(self, dimension: str | None, value):
        """Convert SI values back to deck units of ``dimension``."""
        if dimension is None or dimension == "1":
            return value
        return np.divide(value, self._factor(dimension)) if _is_array(value) else value / self._factor(dimension)

    def _factor(self, dimension: str) -> float:
        try:
            return self.factors[dimension]
        except KeyError:
            raise ValueError(f"unit system {self.name} has no dimension '{dimension}'") from None


def _is_array(value) -> bool:
    return isinstance(value, (np.ndarray, list, tuple))


# dimensions shared by both systems
_COMMON = {
    "time": DAY,
    "viscosity": CENTIPOISE,
    "permeability": MILLIDARCY,
    "saturation": 1.0,
}

FIELD = UnitSystem(
    "FIELD",
    {
        **_COMMON,
        "length": FOOT,
        "pressure": PSI,
        "compressibility": 1.0 / PSI,
        "density": LB_PER_FT3,
        "liquid_surface_rate": STB / DAY,
        "gas_surface_rate": MSCF / DAY,
        "gas_oil_ratio": MSCF / STB,
        "oil_fvf": 1.0,  # rb/stb
        "gas_fvf": STB / MSCF,  # rb/Mscf
        "transmissibility": CENTIPOISE * STB / DAY / PSI,
    },
)

METRIC = UnitSystem(
    "METRIC",
    {
        **_COMMON,
        "length": 1.0,
        "pressure": BAR,
        "compressibility": 1.0 / BAR,
        "density": 1.0,
        "liquid_surface_rate": 1.0 / DAY,
        "gas_surface_rate": 1.0 / DAY,
        "gas_oil_ratio": 1.0,
        "oil_fvf": 1.0,
        "gas_fvf": 1.0,
        "transmissibility": CENTIPOISE / DAY / BAR,
    },
)

UNIT_SYSTEMS = {"FIELD": FIELD, "METRIC": METRIC}
