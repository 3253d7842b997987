"""Shared fixtures: a small three-phase fluid, saturation tables, grids and deck paths."""

from pathlib import Path

import numpy as np
import pytest

from deck_module.case_builder import SimCase, build_case
from deck_module.deck_parser import parse_deck_file
from reservoir_module.grid import RockProps, build_cartesian
from reservoir_module.pvt import DeadOilPvt, DryGasPvt, FluidSystem, LiveOilPvt, SurfaceDensities, WaterPvt
from reservoir_module.satfunc import SaturationFunctions
from reservoir_module.units import BAR, CENTIPOISE, MILLIDARCY
from solver_module.nonlinear import SimulationResults, run_schedule

DECKS_DIR = Path(__file__).resolve().parent.parent / "data" / "decks"

# (r_s, [(p bar, B_o, mu_o cP), ...])
PVTO_RECORDS = [
    (20.0, [(50.0, 1.10, 1.20)]),
    (60.0, [(150.0, 1.20, 0.90)]),
    (100.0, [(250.0, 1.30, 0.70), (350.0, 1.28, 0.75)]),
    (140.0, [(350.0, 1.40, 0.60), (450.0, 1.38, 0.65)]),
]
# p bar, B_g, mu_g cP
PVDG_ROWS = [
    (20.0, 0.060, 0.012),
    (50.0, 0.025, 0.013),
    (150.0, 0.0085, 0.018),
    (250.0, 0.0052, 0.024),
    (350.0, 0.0040, 0.029),
    (600.0, 0.0030, 0.036),
]
PVDO_ROWS = [(20.0, 1.08, 1.4), (200.0, 1.05, 1.5), (600.0, 1.02, 1.7)]


def _si_rows(rows) -> np.ndarray:
    rows = np.asarray(rows, dtype=float)
    return np.column_stack([rows[:, 0] * BAR, 1.0 / rows[:, 1], rows[:, 2] * CENTIPOISE])


def make_fluid(dissolved_gas: bool = True) -> FluidSystem:
    """Live (PVTO) or dead (PVDO) oil with dry gas and water, SI units."""
    water = WaterPvt(
        reference_pressure=200.0 * BAR,
        reference_b=1.0 / 1.02,
        compressibility=4.5e-5 / BAR,
        reference_viscosity=0.4 * CENTIPOISE,
    )
    gas_rows = _si_rows(PVDG_ROWS)
    gas = DryGasPvt(gas_rows[:, 0], gas_rows[:, 1], gas_rows[:, 2])
    if dissolved_gas:
        oil = LiveOilPvt([(rs, _si_rows(rows)) for rs, rows in PVTO_RECORDS])
    else:
        oil_rows = _si_rows(PVDO_ROWS)
        oil = DeadOilPvt(oil_rows[:, 0], oil_rows[:, 1], oil_rows[:, 2])
    return FluidSystem(water, oil, gas, SurfaceDensities(oil=800.0, water=1020.0, gas=0.9))


def make_satfunc(capillary: bool = False) -> SaturationFunctions:
    """Simple SWOF/SGOF pair with connate water 0.2; optional capillary pressure."""
    pcow = np.array([2.0, 0.5, 0.1, 0.0]) * BAR if capillary else np.zeros(4)
    pcog = np.array([0.0, 0.2, 1.0]) * BAR if capillary else np.zeros(3)
    swof = np.column_stack([[0.2, 0.5, 0.8, 1.0], [0.0, 0.2, 0.6, 1.0], [1.0, 0.3, 0.0, 0.0], pcow])
    sgof = np.column_stack([[0.0, 0.3, 0.8], [0.0, 0.2, 0.7], [1.0, 0.3, 0.0], pcog])
    return SaturationFunctions(swof, sgof)


def make_box(dims=(3, 1, 1), size=(10.0, 10.0, 2.0), top=1000.0, perm_md=100.0, porosity=0.25, **rock):
    """Cartesian grid plus uniform rock and its connections."""
    grid = build_cartesian(dims, size, top)
    n = grid.num_cells
    rock_props = RockProps(np.full((n, 3), perm_md * MILLIDARCY), np.full(n, porosity), **rock)
    return grid, rock_props, grid.connections(rock_props)


@pytest.fixture
def live_fluid() -> FluidSystem:
    return make_fluid(dissolved_gas=True)


@pytest.fixture
def dead_fluid() -> FluidSystem:
    return make_fluid(dissolved_gas=False)


@pytest.fixture
def satfunc() -> SaturationFunctions:
    return make_satfunc()


@pytest.fixture
def capillary_satfunc() -> SaturationFunctions:
    return make_satfunc(capillary=True)


@pytest.fixture
def box_factory():
    return make_box


@pytest.fixture
def decks_dir() -> Path:
    return DECKS_DIR


def load_case(name: str) -> SimCase:
    """Parse and resolve one of the bundled decks by stem."""
    return build_case(parse_deck_file(DECKS_DIR / f"{name}.DATA"), name)


@pytest.fixture
def case_loader():
    return load_case


@pytest.fixture(scope="session")
def schedule_runner():
    """Runs a bundled deck through its whole schedule once per test session.

    Returns a function of the deck stem giving ``(results, report states)``, where the
    report states hold the cell unknowns and well states after every report step.
    """
    cache: dict[str, tuple[SimulationResults, list]] = {}

    def run(name: str):
        if name not in cache:
            states = []
            results = run_schedule(load_case(name), on_report=lambda record, state: states.append(state.copy()))
            cache[name] = (results, states)
        return cache[name]

    return run
