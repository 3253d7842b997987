"""Standard wells coupled to the reservoir through a Schur complement.

Each open well carries four unknowns: the weighted total surface rate
Q_t = Σ g_α Q_α, the weighted fractions F_w = g_w Q_w / Q_t and F_g = g_g Q_g / Q_t,
and the bottom-hole pressure. Production rates are positive, injection negative.
Its equations are three component balances with a small wellbore storage term and
one control equation (BHP or surface rate).
"""

import logging
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any

import numpy as np
import scipy.sparse as sp
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from numerics_module.autodiff import Evaluation, evaluation_type, value_of, where
from numerics_module.errors import ConfigurationError, WellSingularityError
from numerics_module.linalg import BlockCSR

from .model import NUM_EQUATIONS, CellState
from .pvt import FluidSystem, Phase
from .units import GRAVITY

logger = logging.getLogger(__name__)

WELL_UNKNOWNS = 4
WellEvaluation = evaluation_type(WELL_UNKNOWNS)
# g_w, g_o, g_g
COMPONENT_WEIGHTS = (1.0, 1.0, 0.01)
WELLBORE_VOLUME = 0.1  # m³
INITIAL_DRAWDOWN = 1.0e5  # Pa
RATE_EPSILON = 1e-14


class WellType(str, Enum):
    PRODUCER = "PRODUCER"
    INJECTOR = "INJECTOR"


class ControlMode(str, Enum):
    BHP = "BHP"
    RATE = "RATE"


class RateTarget(str, Enum):
    """Surface rate a RATE control acts on."""

    OIL = "OIL"
    WATER = "WATER"
    GAS = "GAS"
    LIQUID = "LIQUID"


@dataclass(frozen=True)
class WellControl:
    """Active control plus the limit that may take over.

    ``rate_limit`` is the surface-rate target (m³/s, positive) of a RATE control and
    the rate limit of a BHP control; ``bhp_limit`` is the target of a BHP control and
    the pressure limit of a RATE control.
    """

    mode: ControlMode
    rate_target: RateTarget
    rate_limit: float | None
    bhp_limit: float

    def __post_init__(self):
        if self.bhp_limit <= 0.0:
            raise ConfigurationError(f"BHP limit must be positive, got {self.bhp_limit}")
        if self.mode == ControlMode.RATE and (self.rate_limit is None or self.rate_limit <= 0.0):
            raise ConfigurationError("rate control needs a positive rate target")

    @property
    def target(self) -> float:
        return self.rate_limit if self.mode == ControlMode.RATE else self.bhp_limit


@dataclass(frozen=True)
class WellConnection:
    cell: int  # active cell index
    factor: float  # connection transmissibility factor T_w,j, m³
    depth: float


@dataclass(frozen=True)
class WellSpec:
    """Static description of a well for one report step."""

    name: str
    well_type: WellType
    connections: tuple[WellConnection, ...]
    datum_depth: float
    control: WellControl
    injected_phase: Phase | None = None

    def __post_init__(self):
        if not self.connections:
            raise ConfigurationError(f"well {self.name} has no open connections")
        if self.well_type == WellType.INJECTOR and self.injected_phase not in (Phase.WATER, Phase.GAS):
            raise ConfigurationError(f"injector {self.name} must inject WATER or GAS")


@dataclass
class WellState:
    """Current values of the four well unknowns and the active control."""

    total_rate: float
    water_fraction: float
    gas_fraction: float
    bhp: float
    control: WellControl

    def as_array(self) -> np.ndarray:
        return np.array([self.total_rate, self.water_fraction, self.gas_fraction, self.bhp])

    def copy(self) -> "WellState":
        return replace(self)

    @property
    def surface_rates(self) -> list[float]:
        return surface_rates(self.total_rate, self.water_fraction, self.gas_fraction)


@dataclass
class WellStepData:
    """Per-step well data held fixed through the Newton iterations."""

    state: WellState
    pressure_drops: np.ndarray
    storage0: list[float]


@dataclass
class WellSystemBlocks:
    """Linearized well equations of one well.

    ``cells`` lists the reservoir cells the local blocks refer to, one per connection;
    ``B`` has one column block and ``C`` one row block per entry of ``cells``.
    """

    name: str
    cells: np.ndarray
    D: np.ndarray  # (k, k)
    B: np.ndarray  # (k, b*ncon)
    C: np.ndarray  # (b*ncon, k)
    residual: np.ndarray  # (k,)
    metric: np.ndarray = field(default_factory=lambda: np.zeros(0))


def surface_rates(total_rate: Any, water_fraction: Any, gas_fraction: Any) -> list[Any]:
    """Component surface rates (Q_w, Q_o, Q_g) from the weighted unknowns."""
    g_w, g_o, g_g = COMPONENT_WEIGHTS
    oil_fraction = 1.0 - water_fraction - gas_fraction
    return [
        water_fraction * total_rate / g_w,
        oil_fraction * total_rate / g_o,
        gas_fraction * total_rate / g_g,
    ]


def controlled_rate(rates: list[Any], well_type: WellType, control: WellControl) -> Any:
    """Positive magnitude of the rate a control acts on."""
    target = control.rate_target
    if well_type == WellType.INJECTOR:
        phase = Phase.WATER if target == RateTarget.WATER else Phase.GAS
        return -rates[phase]
    if target == RateTarget.LIQUID:
        return rates[Phase.WATER] + rates[Phase.OIL]
    return rates[{RateTarget.OIL: Phase.OIL, RateTarget.WATER: Phase.WATER, RateTarget.GAS: Phase.GAS}[target]]


def _total(x: Any) -> Any:
    if isinstance(x, Evaluation):
        return type(x)(np.sum(x.value), x.derivs.sum(axis=0))
    return float(np.sum(x))


class StandardWell:
    """Equations of one standard well."""

    def __init__(
        self,
        spec: WellSpec,
        fluid: FluidSystem,
        gravity: float = GRAVITY,
        storage_volume: float = WELLBORE_VOLUME,
    ):
        self.spec = spec
        self.fluid = fluid
        self.gravity = gravity
        self.storage_volume = storage_volume
        self.cells = np.array([c.cell for c in spec.connections], dtype=np.int64)
        self.factors = np.array([c.factor for c in spec.connections], dtype=float)
        self.depths = np.array([c.depth for c in spec.connections], dtype=float)

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def is_producer(self) -> bool:
        return self.spec.well_type == WellType.PRODUCER

    # -- fluid in the wellbore -------------------------------------------------

    def wellbore_b(self, pressure: Any) -> list[Any]:
        """Shrinkage factors of the wellbore fluid at ``pressure`` (oil saturated)."""
        bw, _ = self.fluid.water_props(pressure)
        bo, _ = self.fluid.oil_props(pressure, self.fluid.saturated_rs(pressure), True)
        bg, _ = self.fluid.gas_props(pressure)
        return [bw, bo, bg]

    @staticmethod
    def surface_fractions(water_fraction: Any, gas_fraction: Any) -> list[Any]:
        """Quantities proportional to Q_α for the given weighted fractions."""
        return surface_rates(1.0, water_fraction, gas_fraction)

    def reservoir_fractions(self, water_fraction: Any, gas_fraction: Any, b: list[Any]) -> list[Any]:
        """Reservoir-volume fractions of the wellbore mixture at local shrinkage factors."""
        volumes = [s / b_alpha for s, b_alpha in zip(self.surface_fractions(water_fraction, gas_fraction), b)]
        total = volumes[0] + volumes[1] + volumes[2]
        return [v / total for v in volumes]

    def injection_fractions(self, water_fraction: Any, gas_fraction: Any, b: list[Any]) -> list[Any]:
        """Reservoir-volume composition pushed through injecting connections."""
        if not self.is_producer:
            return [1.0 if phase == self.spec.injected_phase else 0.0 for phase in Phase]
        return self.reservoir_fractions(water_fraction, gas_fraction, b)

    def default_mixture(self, cells: CellState) -> np.ndarray:
        """Surface composition used before the well has flowed."""
        if not self.is_producer:
            return np.array([1.0 if phase == self.spec.injected_phase else 0.0 for phase in Phase])
        weighted = [
            float(np.sum(self.factors * cells.mobility[phase] * cells.b[phase])) for phase in Phase
        ]
        weighted[Phase.GAS] += float(
            np.sum(self.factors * cells.rgo * cells.b[Phase.OIL] * cells.mobility[Phase.OIL])
        )
        mixture = np.clip(np.array(weighted), 0.0, None)
        if mixture.sum() <= 0.0:
            return np.array([0.0, 1.0, 0.0])
        return mixture / mixture.sum()

    def storage(self, water_fraction: Any, gas_fraction: Any, bhp: Any) -> list[Any]:
        """Wellbore storage A_α,w = V_w·b_α(p_bhp)·(reservoir-volume fraction)."""
        b = self.wellbore_b(bhp)
        fractions = self.reservoir_fractions(water_fraction, gas_fraction, b)
        return [self.storage_volume * b_alpha * f for b_alpha, f in zip(b, fractions)]

    # -- operations ------------------------------------------------------------

    def connection_pressure_drops(self, well_state: WellState, cells: CellState) -> np.ndarray:
        """Hydrostatic drop h_w,j from the datum to every connection, explicit in time.

        Args:
            well_state: Start-of-step well unknowns
            cells: Start-of-step values of the connection cells

        Returns:
            Pressure difference p(z_j) − p_bhp per connection (Pa)
        """
        if abs(well_state.total_rate) > RATE_EPSILON:
            mixture = np.clip(
                np.array(self.surface_fractions(well_state.water_fraction, well_state.gas_fraction)), 0.0, None
            )
        else:
            mixture = self.default_mixture(cells)
        if mixture.sum() <= 0.0:
            mixture = self.default_mixture(cells)
        return self.pressure_drops_for_mixture(mixture, well_state.bhp)

    def mixture_density(self, mixture: np.ndarray, pressure: float) -> float:
        densities = self.fluid.densities
        surface = np.array([densities.water, densities.oil, densities.gas])
        b = np.array([float(v) for v in self.wellbore_b(pressure)])
        return float(mixture @ surface / np.sum(mixture / b))

    def pressure_drops_for_mixture(self, mixture: np.ndarray, bhp: float) -> np.ndarray:
        """Integrate ρ_mix·g·Δz segment-wise from the datum to each connection."""
        datum = self.spec.datum_depth
        drops = np.zeros(len(self.depths))
        order = np.argsort(self.depths)
        below = [j for j in order if self.depths[j] >= datum]
        above = [j for j in order[::-1] if self.depths[j] < datum]
        for sequence in (below, above):
            z, dp = datum, 0.0
            for j in sequence:
                dz = self.depths[j] - z
                dp += self.mixture_density(mixture, bhp + dp) * self.gravity * dz
                z = self.depths[j]
                drops[j] = dp
        return drops

    def connection_inflow(
        self,
        cells: CellState,
        bhp: Any,
        water_fraction: Any,
        gas_fraction: Any,
        pressure_drops: np.ndarray,
    ) -> tuple[list[Any], list[Any]]:
        """Reservoir-volume and surface-volume rates into the wellbore per connection.

        A connection produces when its drawdown p_j − (p_bhp + h_j) is positive, using
        the cell mobilities; otherwise it injects the wellbore mixture with the cell's
        total mobility.
        """
        drawdown = cells.pressure[Phase.OIL] - (bhp + pressure_drops)
        producing = np.asarray(value_of(drawdown)) > 0.0
        total_mobility = cells.mobility[Phase.WATER] + cells.mobility[Phase.OIL] + cells.mobility[Phase.GAS]
        injected = self.injection_fractions(water_fraction, gas_fraction, cells.b)

        reservoir, surface = [], []
        for phase in Phase:
            produced = self.factors * cells.mobility[phase] * drawdown
            pushed = self.factors * total_mobility * injected[phase] * drawdown
            reservoir.append(where(producing, produced, pushed))
            surface.append(cells.b[phase] * reservoir[-1])
        # dissolved gas travels with produced oil only
        dissolved = where(producing, cells.rgo * surface[Phase.OIL], 0.0)
        surface[Phase.GAS] = surface[Phase.GAS] + dissolved
        return reservoir, surface

    def control_equation(self, rates: list[Any], bhp: Any, control: WellControl) -> Any:
        if control.mode == ControlMode.BHP:
            return bhp - control.bhp_limit
        return controlled_rate(rates, self.spec.well_type, control) - control.rate_limit

    def well_residuals(
        self,
        cells: CellState,
        unknowns: list[Any],
        step: WellStepData,
        dt: float,
    ) -> tuple[list[Any], list[Any]]:
        """Component balances and control equation.

        Args:
            cells: Connection cells (plain values, or evaluations for cell derivatives)
            unknowns: (Q_t, F_w, F_g, p_bhp), plain or seeded evaluations
            step: Pressure drops, start-of-step storage and active control
            dt: Time step in seconds

        Returns:
            The four residuals and the per-connection surface inflows
        """
        total_rate, water_fraction, gas_fraction, bhp = unknowns
        _, inflow = self.connection_inflow(cells, bhp, water_fraction, gas_fraction, step.pressure_drops)
        rates = surface_rates(total_rate, water_fraction, gas_fraction)
        storage = self.storage(water_fraction, gas_fraction, bhp)
        equations = [
            (storage[phase] - step.storage0[phase]) / dt + rates[phase] - _total(inflow[phase])
            for phase in Phase
        ]
        equations.append(self.control_equation(rates, bhp, step.state.control))
        return equations, inflow

    def assemble(
        self,
        state: CellState,
        step: WellStepData,
        dt: float,
        residual: np.ndarray,
        jacobian: BlockCSR,
    ) -> WellSystemBlocks:
        """Add connection sinks to the reservoir system and build D, B, C and R_w."""
        values = step.state.as_array()
        total_rate, water_fraction, gas_fraction, bhp = values
        ncon = len(self.cells)

        # derivatives with respect to the connection cells' unknowns
        _, inflow_cells = self.connection_inflow(
            state.take(self.cells), bhp, water_fraction, gas_fraction, step.pressure_drops
        )
        # derivatives with respect to the well's own unknowns
        unknowns = [WellEvaluation.variable(v, k) for k, v in enumerate(values)]
        equations, inflow_well = self.well_residuals(
            state.take(self.cells, derivatives=False), unknowns, step, dt
        )

        B = np.zeros((WELL_UNKNOWNS, ncon, NUM_EQUATIONS))
        C = np.zeros((ncon, NUM_EQUATIONS, WELL_UNKNOWNS))
        diag = jacobian.diagonal_positions[self.cells]
        for phase in Phase:
            sink = inflow_cells[phase]
            np.add.at(residual[:, phase], self.cells, np.asarray(sink.value))
            np.add.at(jacobian.blocks, (diag, phase), sink.derivs)
            B[phase] = -sink.derivs
            C[:, phase, :] = inflow_well[phase].derivs

        return WellSystemBlocks(
            name=self.name,
            cells=self.cells,
            D=np.stack([eq.derivs for eq in equations]),
            B=B.reshape(WELL_UNKNOWNS, ncon * NUM_EQUATIONS),
            C=C.reshape(ncon * NUM_EQUATIONS, WELL_UNKNOWNS),
            residual=np.array([float(eq.value) for eq in equations]),
        )

    def initial_state(self, cells: CellState, control: WellControl) -> WellState:
        """First guess for a newly opened well from the connection cells."""
        reference = float(cells.pressure[Phase.OIL][0])
        if control.mode == ControlMode.BHP:
            bhp = control.bhp_limit
        elif self.is_producer:
            bhp = max(reference - INITIAL_DRAWDOWN, control.bhp_limit)
        else:
            bhp = min(reference + INITIAL_DRAWDOWN, control.bhp_limit)

        mixture = self.default_mixture(cells)
        weighted = np.array(COMPONENT_WEIGHTS) * mixture
        water_fraction, gas_fraction = (float(v) for v in weighted[[0, 2]] / weighted.sum())
        drops = self.pressure_drops_for_mixture(mixture, bhp)
        _, inflow = self.connection_inflow(cells, bhp, water_fraction, gas_fraction, drops)
        total_rate = float(sum(g * float(np.sum(q)) for g, q in zip(COMPONENT_WEIGHTS, inflow)))

        if control.mode == ControlMode.RATE:
            unit_rate = weighted.sum() if self.is_producer else -weighted.sum()
            rates = surface_rates(unit_rate, water_fraction, gas_fraction)
            per_unit = float(controlled_rate(rates, self.spec.well_type, control))
            if per_unit > 0.0:
                total_rate = unit_rate * control.rate_limit / per_unit
        return WellState(total_rate, water_fraction, gas_fraction, bhp, control)

    def apply_update(self, well_state: WellState, change: np.ndarray, dp_max_rel: float) -> WellState:
        """Add a Newton change with the bottom-hole pressure chopped and fractions kept physical."""
        d_rate, d_water, d_gas, d_bhp = (float(v) for v in change)
        limit = dp_max_rel * abs(well_state.bhp)
        d_bhp = float(np.clip(d_bhp, -limit, limit))
        water = float(np.clip(well_state.water_fraction + d_water, 0.0, 1.0))
        gas = float(np.clip(well_state.gas_fraction + d_gas, 0.0, 1.0))
        if water + gas > 1.0:
            water, gas = water / (water + gas), gas / (water + gas)
        return WellState(well_state.total_rate + d_rate, water, gas, well_state.bhp + d_bhp, well_state.control)

    def switch_control(self, well_state: WellState) -> tuple[WellState, bool]:
        """Switch between rate and BHP control when the inactive limit is violated."""
        control = well_state.control
        if control.mode == ControlMode.RATE:
            if self.is_producer:
                violated = well_state.bhp < control.bhp_limit
            else:
                violated = well_state.bhp > control.bhp_limit
            if violated:
                logger.info(
                    "well %s: BHP limit %.6g Pa reached, switching from RATE to BHP control",
                    self.name, control.bhp_limit,
                )
                new_control = replace(control, mode=ControlMode.BHP)
                return replace(well_state, bhp=control.bhp_limit, control=new_control), True
            return well_state, False

        if control.rate_limit is None:
            return well_state, False
        rate = float(controlled_rate(well_state.surface_rates, self.spec.well_type, control))
        if rate > control.rate_limit:
            logger.info(
                "well %s: rate %.6g exceeds target %.6g m3/s, switching from BHP to RATE control",
                self.name, rate, control.rate_limit,
            )
            return replace(well_state, control=replace(control, mode=ControlMode.RATE)), True
        return well_state, False


class WellSet:
    """All open wells of a report step."""

    def __init__(self, wells: list[StandardWell], pore_volume: np.ndarray):
        self.wells = list(wells)
        self.pore_volume = np.asarray(pore_volume, dtype=float)
        names = [well.name for well in self.wells]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"duplicate well names: {names}")

    def __len__(self) -> int:
        return len(self.wells)

    def __iter__(self):
        return iter(self.wells)

    def prepare_step(self, states: dict[str, WellState], cells: CellState) -> dict[str, WellStepData]:
        """Freeze pressure drops and storage at the start of a step."""
        data = {}
        for well in self.wells:
            state = states[well.name]
            values = cells.take(well.cells, derivatives=False)
            storage0 = [float(v) for v in well.storage(state.water_fraction, state.gas_fraction, state.bhp)]
            data[well.name] = WellStepData(
                state=state.copy(),
                pressure_drops=well.connection_pressure_drops(state, values),
                storage0=storage0,
            )
        return data

    def assemble(
        self,
        state: CellState,
        context: dict[str, WellStepData],
        dt: float,
        residual: np.ndarray,
        jacobian: BlockCSR,
    ) -> list[WellSystemBlocks]:
        return [well.assemble(state, context[well.name], dt, residual, jacobian) for well in self.wells]

    def residual_metric(
        self,
        blocks: list[WellSystemBlocks],
        context: dict[str, WellStepData],
        fvf: np.ndarray,
        dt: float,
    ) -> tuple[float, float]:
        """Largest scaled well residuals: CNV-like for the balances, relative for the control row."""
        balance_worst = control_worst = 0.0
        for well, block in zip(self.wells, blocks):
            perforated = self.pore_volume[np.unique(well.cells)].sum()
            balance = fvf * np.abs(block.residual[:NUM_EQUATIONS]) * dt / perforated
            control = abs(block.residual[NUM_EQUATIONS]) / context[well.name].state.control.target
            block.metric = np.append(balance, control)
            balance_worst = max(balance_worst, float(balance.max()))
            control_worst = max(control_worst, float(control))
        return balance_worst, control_worst

    def switch_controls(self, context: dict[str, WellStepData]) -> int:
        switched = 0
        for well in self.wells:
            step = context[well.name]
            step.state, changed = well.switch_control(step.state)
            switched += int(changed)
        return switched


class SchurComplement:
    """Reduced reservoir operator A − Σ_w C_w D_w⁻¹ B_w and its right-hand side."""

    def __init__(self, matrix: BlockCSR, wells: list[WellSystemBlocks]):
        self.matrix = matrix
        self.wells = list(wells)
        self.block_size = matrix.block_size
        self._reservoir = matrix.to_scipy().tocsr()
        self._factors = [_factor_well(well) for well in self.wells]

    def _gather(self, x: np.ndarray, well: WellSystemBlocks) -> np.ndarray:
        return x.reshape(-1, self.block_size)[well.cells].reshape(-1)

    def _scatter_subtract(self, y: np.ndarray, well: WellSystemBlocks, local: np.ndarray):
        np.add.at(y.reshape(-1, self.block_size), well.cells, -local.reshape(-1, self.block_size))

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        y = self._reservoir @ x
        for well, factor in zip(self.wells, self._factors):
            z = lu_solve(factor, well.B @ self._gather(x, well))
            self._scatter_subtract(y, well, well.C @ z)
        return y

    __call__ = apply

    def reduce_rhs(self, reservoir_residual: np.ndarray) -> np.ndarray:
        """R_r − Σ_w C_w D_w⁻¹ R_w."""
        rhs = np.asarray(reservoir_residual, dtype=float).reshape(-1).copy()
        for well, factor in zip(self.wells, self._factors):
            self._scatter_subtract(rhs, well, well.C @ lu_solve(factor, well.residual))
        return rhs

    def recover(self, x_reservoir: np.ndarray) -> list[np.ndarray]:
        """x_w = D_w⁻¹ (R_w − B_w x_r) for every well."""
        x_reservoir = np.asarray(x_reservoir, dtype=float).reshape(-1)
        return [
            lu_solve(factor, well.residual - well.B @ self._gather(x_reservoir, well))
            for well, factor in zip(self.wells, self._factors)
        ]

    def _update(self, well: WellSystemBlocks, factor) -> np.ndarray:
        return well.C @ lu_solve(factor, well.B)

    def preconditioner_matrix(self) -> BlockCSR:
        """A with the well updates that fall inside its sparsity pattern."""
        result = self.matrix.copy()
        b = self.block_size
        for well, factor in zip(self.wells, self._factors):
            update = self._update(well, factor)
            for a, cell_a in enumerate(well.cells):
                for c, cell_c in enumerate(well.cells):
                    position = result.position(int(cell_a), int(cell_c))
                    if position >= 0:
                        result.blocks[position] -= update[a * b:(a + 1) * b, c * b:(c + 1) * b]
        return result

    def to_scipy(self) -> sp.csr_matrix:
        """Explicit reduced matrix, fill included."""
        b = self.block_size
        reduced = self._reservoir.copy()
        for well, factor in zip(self.wells, self._factors):
            index = (well.cells[:, None] * b + np.arange(b)).reshape(-1)
            rows = np.repeat(index, len(index))
            cols = np.tile(index, len(index))
            reduced = reduced - sp.csr_matrix(
                (self._update(well, factor).reshape(-1), (rows, cols)), shape=reduced.shape
            )
        return reduced.tocsr()


def _factor_well(well: WellSystemBlocks):
    """Dense LU of D_w with partial pivoting.

    Raises:
        WellSingularityError: D_w is singular or not finite
    """
    if not np.all(np.isfinite(well.D)):
        raise WellSingularityError(well.name)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(well.D, check_finite=False)
    pivots = np.abs(np.diag(lu))
    scale = max(float(np.abs(well.D).max()), 1.0)
    if pivots.min() <= np.finfo(float).eps * scale * len(pivots):
        raise WellSingularityError(well.name)
    return lu, piv


def schur_reduce(matrix: BlockCSR, wells: list[WellSystemBlocks]) -> SchurComplement:
    """Eliminate the well unknowns from the coupled system."""
    return SchurComplement(matrix, wells)


def recover_well_solution(reduced: SchurComplement, x_reservoir: np.ndarray) -> list[np.ndarray]:
    return reduced.recover(x_reservoir)
