"""Stage 2 of deck parsing: keywords to a simulation case.

Sections are checked for order, every real item is converted to SI through the deck's
unit system, tables become PVT and saturation function objects, and the SCHEDULE
section is folded left to right into report steps, each holding the wells that are
open during it.
"""

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from numerics_module.errors import DeckError, InputError
from reservoir_module.equil import EquilRecord
from reservoir_module.grid import ConnectionSet, Grid, RockProps, build_cartesian
from reservoir_module.pvt import DeadOilPvt, DryGasPvt, FluidSystem, LiveOilPvt, Phase, SurfaceDensities, WaterPvt
from reservoir_module.satfunc import SaturationFunctions
from reservoir_module.tables import PiecewiseLinear
from reservoir_module.units import DAY, FIELD, PSI, UNIT_SYSTEMS, UnitSystem
from reservoir_module.wells import ControlMode, RateTarget, WellConnection, WellControl, WellSpec, WellType

from .deck_parser import SECTIONS, Deck, DeckItem, DeckKeyword

logger = logging.getLogger(__name__)

REQUIRED_SECTIONS = ("RUNSPEC", "GRID", "PROPS", "SOLUTION", "SCHEDULE")
DEFAULT_PRODUCER_BHP = 14.7 * PSI
DEFAULT_INJECTOR_BHP = 1.0e5 * PSI
PRODUCER_MODES = {
    "ORAT": RateTarget.OIL,
    "WRAT": RateTarget.WATER,
    "GRAT": RateTarget.GAS,
    "LRAT": RateTarget.LIQUID,
}
SUMMARY_WELL_VECTORS = ("WBHP", "WOPR", "WWPR", "WGPR", "WGOR", "WWIR", "WGIR")
SUMMARY_FIELD_VECTORS = ("FOPR", "FWPR", "FGPR", "FWIR", "FGIR", "FPR")


@dataclass(frozen=True)
class ReportStep:
    """One TSTEP interval and the wells open during it."""

    length: float  # s
    wells: tuple[WellSpec, ...]
    reissued: frozenset[str] = frozenset()  # wells given a control keyword since the previous step


@dataclass
class SimCase:
    """Everything a run needs, in SI units."""

    name: str
    title: str
    units: UnitSystem
    start: str | None
    grid: Grid
    rock: RockProps
    fluid: FluidSystem
    satfunc: SaturationFunctions
    connections: ConnectionSet
    equil: EquilRecord
    rsvd: PiecewiseLinear | None
    schedule: list[ReportStep]
    summary: list[tuple[str, str | None]] = field(default_factory=list)

    @property
    def total_time(self) -> float:
        return float(sum(step.length for step in self.schedule))

    @property
    def well_names(self) -> list[str]:
        return _well_names(self.schedule)

    def describe(self) -> dict[str, Any]:
        """Plain-data summary of the resolved case (SI units, times in days)."""
        return {
            "name": self.name,
            "units": self.units.name,
            "dims": list(self.grid.dims),
            "active_cells": self.grid.num_cells,
            "connections": len(self.connections),
            "dissolved_gas": self.fluid.has_dissolved_gas,
            "pore_volume": round(float(self.grid.pore_volume(self.rock).sum()), 6),
            "equil": {
                "datum_depth": self.equil.datum_depth,
                "datum_pressure": self.equil.datum_pressure,
                "woc_depth": self.equil.woc_depth,
                "goc_depth": self.equil.goc_depth,
            },
            "report_steps": [
                {
                    "days": step.length / DAY,
                    "wells": {
                        spec.name: {
                            "type": spec.well_type.value,
                            "mode": spec.control.mode.value,
                            "rate_target": spec.control.rate_target.value,
                            "rate_limit": spec.control.rate_limit,
                            "bhp_limit": spec.control.bhp_limit,
                            "cells": [c.cell for c in spec.connections],
                        }
                        for spec in step.wells
                    },
                }
                for step in self.schedule
            ],
            "summary": [f"{vector}:{well}" if well else vector for vector, well in self.summary],
        }


def _well_names(schedule: list[ReportStep]) -> list[str]:
    """Names of every well open in some report step, in order of first appearance."""
    return list(dict.fromkeys(spec.name for step in schedule for spec in step.wells))


def _real_array(keyword: DeckKeyword, units: UnitSystem, item: str = "DATA") -> np.ndarray:
    """Convert a repeated real item to SI, cycling its per-column dimensions."""
    deck_item: DeckItem = keyword.records[0][item]
    if any(deck_item.defaulted):
        raise keyword.error("defaulted values are not supported")
    return _convert(deck_item, units)


def _convert(item: DeckItem, units: UnitSystem) -> np.ndarray:
    dims = item.dimension
    values = np.array(item.values, dtype=float)
    if isinstance(dims, tuple):
        out = values.copy()
        for column, dim in enumerate(dims):
            out[column::len(dims)] = units.to_si(dim, values[column::len(dims)])
        return out
    return np.asarray(units.to_si(dims, values), dtype=float)


def _value(keyword: DeckKeyword, record_index: int, name: str, units: UnitSystem, required: bool = True) -> Any:
    item = keyword.records[record_index][name]
    value = item.value
    if value is None:
        if required:
            raise keyword.error(f"item {name} (record {record_index + 1}) is required")
        return None
    if item.type == "real":
        return float(units.to_si(item.dimension, value))
    return value


def _rows(keyword: DeckKeyword, data: np.ndarray, columns: int) -> np.ndarray:
    if len(data) == 0 or len(data) % columns:
        raise keyword.error(f"table needs a multiple of {columns} values, got {len(data)}")
    return data.reshape(-1, columns)


class CaseBuilder:
    """Resolves a stage-1 deck into a ``SimCase``."""

    def __init__(self, deck: Deck, name: str = "CASE"):
        self.deck = deck
        self.name = name
        self.units = FIELD

    def _require(self, name: str) -> DeckKeyword:
        keyword = self.deck.get(name)
        if keyword is None:
            raise DeckError(f"required keyword {name} is missing", self.deck.path)
        return keyword

    def check_sections(self):
        """Required sections present, all sections in canonical order."""
        seen = [kw for kw in self.deck if kw.name in SECTIONS]
        names = [kw.name for kw in seen]
        for required in REQUIRED_SECTIONS:
            if required not in names:
                raise DeckError(f"required section {required} is missing", self.deck.path)
        order = [SECTIONS.index(name) for name in names]
        for previous, (current, keyword) in zip(order, zip(order[1:], seen[1:])):
            if current <= previous:
                raise keyword.error("section out of order or repeated")

    def build(self) -> SimCase:
        self.check_sections()
        for name in ("OIL", "WATER", "GAS"):
            if name not in self.deck:
                raise DeckError(f"only three-phase decks are supported: {name} missing", self.deck.path)
        unit_names = [name for name in UNIT_SYSTEMS if name in self.deck]
        if len(unit_names) > 1:
            raise DeckError("both FIELD and METRIC given", self.deck.path)
        self.units = UNIT_SYSTEMS[unit_names[0]] if unit_names else FIELD

        grid, rock, nnc = self.build_grid()
        fluid, satfunc = self.build_props()
        equil, rsvd = self.build_solution()
        try:
            connections = grid.connections(rock, nnc)
        except InputError as error:
            raise self._require("NNC").error(str(error)) from None
        schedule = self.build_schedule(grid)
        summary = self.build_summary(schedule)

        title = self.deck.get("TITLE")
        start = self.deck.get("START")
        case = SimCase(
            name=self.name,
            title=title.records[0]["TEXT"].value if title else self.name,
            units=self.units,
            start=" ".join(str(v.value) for v in start.records[0].items) if start else None,
            grid=grid,
            rock=rock,
            fluid=fluid,
            satfunc=satfunc,
            connections=connections,
            equil=equil,
            rsvd=rsvd,
            schedule=schedule,
            summary=summary,
        )
        logger.info(
            "case %s: %d active cells, %d connections, %d report steps",
            case.name, grid.num_cells, len(connections), len(schedule),
        )
        return case

    # -- GRID ------------------------------------------------------------------

    def build_grid(self) -> tuple[Grid, RockProps, list[tuple[int, int, float]]]:
        dimens = self._require("DIMENS")
        dims = tuple(int(dimens.records[0][axis].value) for axis in ("NX", "NY", "NZ"))
        if min(dims) <= 0:
            raise dimens.error(f"dimensions must be positive, got {dims}")
        n = int(np.prod(dims))

        def cell_array(name: str, fallback: np.ndarray | None = None, sizes: tuple[int, ...] = ()) -> np.ndarray:
            keyword = self.deck.get(name)
            if keyword is None:
                if fallback is None:
                    raise DeckError(f"required keyword {name} is missing", self.deck.path)
                return fallback
            values = _real_array(keyword, self.units)
            if len(values) not in (sizes or (n,)):
                expected = " or ".join(str(s) for s in (sizes or (n,)))
                raise keyword.error(f"expected {expected} values, got {len(values)}")
            return values

        sizes = [cell_array(name) for name in ("DX", "DY", "DZ")]
        tops = cell_array("TOPS", sizes=(dims[0] * dims[1], n))
        permx = cell_array("PERMX")
        permy = cell_array("PERMY", permx)
        permz = cell_array("PERMZ", permx)
        poro = cell_array("PORO")

        active = np.ones(n, dtype=bool)
        actnum = self.deck.get("ACTNUM")
        if actnum is not None:
            flags = np.array(actnum.records[0]["DATA"].values)
            if len(flags) != n:
                raise actnum.error(f"expected {n} values, got {len(flags)}")
            active = flags > 0
        inert = active & (poro <= 0.0)
        if inert.any():
            logger.info("deactivating %d cells with zero porosity", int(inert.sum()))
            active &= ~inert

        try:
            grid = build_cartesian(dims, sizes, tops, active)
            rock = self._rock(grid, np.stack([permx, permy, permz], axis=1), poro)
        except InputError as error:
            raise DeckError(str(error), self.deck.path) from None

        nnc = []
        nnc_keyword = self.deck.get("NNC")
        for keyword in self.deck.all("NNC"):
            for index, record in enumerate(keyword.records):
                ijk = [int(record[name].value) - 1 for name in ("I1", "J1", "K1", "I2", "J2", "K2")]
                try:
                    first = grid.global_index(*ijk[:3])
                    second = grid.global_index(*ijk[3:])
                except InputError as error:
                    raise keyword.error(f"record {index + 1}: {error}") from None
                nnc.append((first, second, _value(keyword, index, "TRAN", self.units)))
        if nnc_keyword is not None:
            logger.info("%d non-neighbour connections", len(nnc))
        return grid, rock, nnc

    def _rock(self, grid: Grid, permeability: np.ndarray, porosity: np.ndarray) -> RockProps:
        rock = self.deck.get("ROCK")
        compressibility, reference = 0.0, 0.0
        if rock is not None:
            reference = _value(rock, 0, "PREF", self.units)
            compressibility = _value(rock, 0, "CR", self.units)
        return RockProps(
            permeability=permeability[grid.active],
            porosity=porosity[grid.active],
            compressibility=compressibility,
            reference_pressure=reference,
        )

    # -- PROPS -----------------------------------------------------------------

    def build_props(self) -> tuple[FluidSystem, SaturationFunctions]:
        pvtw = self._require("PVTW")
        density = self._require("DENSITY")
        try:
            water = WaterPvt(
                reference_pressure=_value(pvtw, 0, "PREF", self.units),
                reference_b=1.0 / _value(pvtw, 0, "BW", self.units),
                compressibility=_value(pvtw, 0, "CW", self.units),
                reference_viscosity=_value(pvtw, 0, "MUW", self.units),
                viscosibility=_value(pvtw, 0, "CVW", self.units),
            )
        except (InputError, ZeroDivisionError) as error:
            raise pvtw.error(str(error)) from None

        pvdg = self._require("PVDG")
        gas_rows = _rows(pvdg, _real_array(pvdg, self.units), 3)
        gas = self._table(pvdg, lambda: DryGasPvt(gas_rows[:, 0], 1.0 / gas_rows[:, 1], gas_rows[:, 2]))

        if "DISGAS" in self.deck:
            pvto = self._require("PVTO")
            records = []
            for index, record in enumerate(pvto.records):
                rs = _value(pvto, index, "RS", self.units)
                rows = _rows(pvto, _convert(record["DATA"], self.units), 3)
                records.append((rs, np.column_stack([rows[:, 0], 1.0 / rows[:, 1], rows[:, 2]])))
            oil = self._table(pvto, lambda: LiveOilPvt(records))
        else:
            if "PVTO" in self.deck:
                raise self.deck.get("PVTO").error("live oil tables need DISGAS in RUNSPEC")
            pvdo = self._require("PVDO")
            oil_rows = _rows(pvdo, _real_array(pvdo, self.units), 3)
            oil = self._table(pvdo, lambda: DeadOilPvt(oil_rows[:, 0], 1.0 / oil_rows[:, 1], oil_rows[:, 2]))

        densities = SurfaceDensities(
            oil=_value(density, 0, "OIL", self.units),
            water=_value(density, 0, "WATER", self.units),
            gas=_value(density, 0, "GAS", self.units),
        )
        swof, sgof = self._require("SWOF"), self._require("SGOF")
        swof_rows = _rows(swof, _real_array(swof, self.units), 4)
        sgof_rows = _rows(sgof, _real_array(sgof, self.units), 4)
        satfunc = self._table(swof, lambda: SaturationFunctions(swof_rows, sgof_rows))
        return FluidSystem(water, oil, gas, densities), satfunc

    @staticmethod
    def _table(keyword: DeckKeyword, factory):
        try:
            return factory()
        except InputError as error:
            raise keyword.error(str(error)) from None

    # -- SOLUTION --------------------------------------------------------------

    def build_solution(self) -> tuple[EquilRecord, PiecewiseLinear | None]:
        equil = self._require("EQUIL")
        try:
            record = EquilRecord(
                datum_depth=_value(equil, 0, "DATUM_DEPTH", self.units),
                datum_pressure=_value(equil, 0, "DATUM_PRESSURE", self.units),
                woc_depth=_value(equil, 0, "WOC_DEPTH", self.units),
                woc_capillary_pressure=_value(equil, 0, "WOC_PC", self.units),
                goc_depth=_value(equil, 0, "GOC_DEPTH", self.units),
                goc_capillary_pressure=_value(equil, 0, "GOC_PC", self.units),
            )
        except InputError as error:
            raise equil.error(str(error)) from None

        rsvd = None
        keyword = self.deck.get("RSVD")
        if keyword is not None:
            rows = _rows(keyword, _real_array(keyword, self.units), 2)
            rsvd = self._table(
                keyword,
                lambda: PiecewiseLinear(rows[:, 0], {"rs": rows[:, 1]}, name="RSVD", clamp=True,
                                        units={"x": "length", "rs": "gas_oil_ratio"}),
            )
        return record, rsvd

    # -- SCHEDULE --------------------------------------------------------------

    def build_schedule(self, grid: Grid) -> list[ReportStep]:
        """Fold the SCHEDULE keywords into report steps."""
        names = [kw.name for kw in self.deck]
        start = names.index("SCHEDULE")
        wells: dict[str, dict[str, Any]] = {}
        steps: list[ReportStep] = []
        reissued: set[str] = set()
        active_index = grid.active_index

        for keyword in self.deck.keywords[start + 1:]:
            handler = getattr(self, f"_schedule_{keyword.name.lower()}", None)
            if keyword.name == "TSTEP":
                for length in _real_array(keyword, self.units):
                    if length <= 0.0:
                        raise keyword.error(f"report step lengths must be positive, got {length / DAY:g} days")
                    steps.append(ReportStep(float(length), self._open_wells(wells), frozenset(reissued)))
                    reissued.clear()
            elif handler is not None:
                for index, record in enumerate(keyword.records):
                    handler(keyword, index, wells, grid, active_index)
                    if keyword.name in ("WCONPROD", "WCONINJE"):
                        reissued.add(record["WELL"].value)
        return steps

    def _well(self, keyword: DeckKeyword, index: int, wells: dict[str, dict[str, Any]]) -> dict[str, Any]:
        name = keyword.records[index]["WELL"].value
        if name not in wells:
            raise keyword.error(f"record {index + 1}: well '{name}' is not defined by WELSPECS")
        return wells[name]

    def _schedule_welspecs(self, keyword, index, wells, grid, active_index):
        record = keyword.records[index]
        name = record["WELL"].value
        draft = wells.setdefault(name, {"name": name, "connections": {}, "control": None, "open": True})
        draft["head"] = (int(_value(keyword, index, "I", self.units)), int(_value(keyword, index, "J", self.units)))
        draft["datum"] = _value(keyword, index, "REF_DEPTH", self.units, required=False)

    def _schedule_compdat(self, keyword, index, wells, grid, active_index):
        draft = self._well(keyword, index, wells)
        record = keyword.records[index]
        i = record["I"].value or draft["head"][0]
        j = record["J"].value or draft["head"][1]
        k1 = _value(keyword, index, "K1", self.units)
        k2 = _value(keyword, index, "K2", self.units)
        if not 1 <= k1 <= k2:
            raise keyword.error(f"record {index + 1}: invalid layer range {k1}..{k2}")
        factor = record["CF"].value
        if factor is None:
            raise keyword.error(f"record {index + 1}: connection transmissibility factor (item 8) is required")
        if factor < 0.0:
            raise keyword.error(f"record {index + 1}: negative connection transmissibility factor")
        status = record["STATUS"].value.upper()
        if status not in ("OPEN", "SHUT"):
            raise keyword.error(f"record {index + 1}: unknown connection status '{status}'")
        for k in range(k1, k2 + 1):
            try:
                cell = grid.global_index(i - 1, j - 1, k - 1)
            except InputError as error:
                raise keyword.error(f"record {index + 1}: {error}") from None
            if active_index[cell] < 0:
                raise keyword.error(f"record {index + 1}: connection ({i}, {j}, {k}) is in an inactive cell")
            draft["connections"][(i, j, k)] = (
                WellConnection(int(active_index[cell]), float(self.units.to_si("transmissibility", factor)),
                               float(grid.depth[cell])),
                status == "OPEN",
            )

    def _schedule_wconprod(self, keyword, index, wells, grid, active_index):
        draft = self._well(keyword, index, wells)
        record = keyword.records[index]
        draft["open"] = record["STATUS"].value.upper() != "SHUT"
        mode = (record["CMODE"].value or "").upper()
        if mode not in (*PRODUCER_MODES, "BHP"):
            raise keyword.error(f"record {index + 1}: unsupported producer control mode '{mode}'")
        bhp = _value(keyword, index, "BHP", self.units, required=False) or DEFAULT_PRODUCER_BHP

        if mode == "BHP":
            given = [(m, _value(keyword, index, m, self.units, required=False)) for m in PRODUCER_MODES]
            given = [(m, v) for m, v in given if v is not None]
            target, limit = (PRODUCER_MODES[given[0][0]], given[0][1]) if given else (RateTarget.OIL, None)
            control_mode = ControlMode.BHP
        else:
            target = PRODUCER_MODES[mode]
            limit = _value(keyword, index, mode, self.units, required=False)
            if limit is None:
                raise keyword.error(f"record {index + 1}: control mode {mode} needs its rate item")
            control_mode = ControlMode.RATE
        draft["type"] = WellType.PRODUCER
        draft["phase"] = None
        draft["control"] = self._control(keyword, index, control_mode, target, limit, bhp)

    def _schedule_wconinje(self, keyword, index, wells, grid, active_index):
        draft = self._well(keyword, index, wells)
        record = keyword.records[index]
        kind = (record["TYPE"].value or "").upper()
        if kind not in ("WATER", "GAS"):
            raise keyword.error(f"record {index + 1}: injector type must be WATER or GAS, got '{kind}'")
        draft["open"] = record["STATUS"].value.upper() != "SHUT"
        mode = (record["CMODE"].value or "").upper()
        if mode not in ("RATE", "BHP"):
            raise keyword.error(f"record {index + 1}: unsupported injector control mode '{mode}'")
        rate = record["RATE"].value
        dimension = "liquid_surface_rate" if kind == "WATER" else "gas_surface_rate"
        limit = None if rate is None else float(self.units.to_si(dimension, rate))
        if mode == "RATE" and limit is None:
            raise keyword.error(f"record {index + 1}: RATE control needs a rate")
        bhp = _value(keyword, index, "BHP", self.units, required=False) or DEFAULT_INJECTOR_BHP
        draft["type"] = WellType.INJECTOR
        draft["phase"] = Phase.WATER if kind == "WATER" else Phase.GAS
        draft["control"] = self._control(
            keyword, index, ControlMode(mode), RateTarget(kind), limit, bhp
        )

    @staticmethod
    def _control(keyword, index, mode, target, limit, bhp) -> WellControl:
        try:
            return WellControl(mode, target, limit, bhp)
        except InputError as error:
            raise keyword.error(f"record {index + 1}: {error}") from None

    def _open_wells(self, wells: dict[str, dict[str, Any]]) -> tuple[WellSpec, ...]:
        specs = []
        for draft in wells.values():
            connections = tuple(conn for conn, is_open in draft["connections"].values() if is_open)
            if draft["control"] is None or not draft["open"] or not connections:
                continue
            specs.append(WellSpec(
                name=draft["name"],
                well_type=draft["type"],
                connections=connections,
                datum_depth=draft["datum"] if draft["datum"] is not None else connections[0].depth,
                control=draft["control"],
                injected_phase=draft["phase"],
            ))
        return tuple(specs)

    # -- SUMMARY ---------------------------------------------------------------

    def build_summary(self, schedule: list[ReportStep]) -> list[tuple[str, str | None]]:
        names = _well_names(schedule)
        vectors: list[tuple[str, str | None]] = []
        for keyword in self.deck:
            if keyword.name in SUMMARY_FIELD_VECTORS:
                vectors.append((keyword.name, None))
            elif keyword.name in SUMMARY_WELL_VECTORS:
                listed = keyword.records[0]["WELLS"].values if keyword.records else []
                for well in listed or names:
                    vectors.append((keyword.name, well))
        return list(dict.fromkeys(vectors))


def build_case(deck: Deck, name: str = "CASE") -> SimCase:
    """Resolve a stage-1 deck into a ``SimCase``.

    Raises:
        DeckError: missing sections or keywords, undefined wells, inactive connections,
            invalid tables; the message names the keyword and record
    """
    return CaseBuilder(deck, name).build()
